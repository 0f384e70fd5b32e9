#pragma once

#include <cstdint>
#include <filesystem>

namespace atm {

struct FixtureOptions {
  std::uint64_t seed = 7;
  std::size_t songs_per_genre = 3;
  double seconds = 3.0;
};

/// Writes a labeled toy dataset: <dir>/{rock,metal,pop}/<genre>NN.wav built
/// from deterministic tone and noise recipes. Rock and metal are 22050 Hz
/// mono; pop is 44100 Hz stereo so ingest exercises downmix and resampling.
void make_fixture(const std::filesystem::path& dir, const FixtureOptions& options = {});

}  // namespace atm
