#include "atm/fixture.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <string>

#include "atm/audio.hpp"
#include "atm/error.hpp"
#include "atm/hash.hpp"
#include "atm/rng.hpp"

namespace atm {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Detuned sawtooth power chord, 8th-note amplitude pulse, light hiss.
std::vector<double> rock(std::size_t n, int rate, Rng& rng) {
  const double root = 98.0 + 40.0 * rng.uniform();
  const double bpm = 110.0 + 30.0 * rng.uniform();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate;
    double v = 0.0;
    for (double ratio : {1.0, 1.5, 2.0}) {
      for (int h = 1; h <= 6; ++h) v += std::sin(kTwoPi * root * ratio * h * t) / h;
    }
    const double beat = std::fmod(t * bpm / 30.0, 1.0);
    out[i] = 0.18 * v * (0.6 + 0.4 * std::exp(-6.0 * beat)) + 0.05 * (2.0 * rng.uniform() - 1.0);
  }
  return out;
}

// Hard-clipped low square riff with broadband noise bursts.
std::vector<double> metal(std::size_t n, int rate, Rng& rng) {
  const double root = 70.0 + 20.0 * rng.uniform();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate;
    const double riff = root * (std::fmod(t, 0.5) < 0.25 ? 1.0 : 1.189);
    const double drive = 4.0 * (std::sin(kTwoPi * riff * t) + 0.5 * std::sin(kTwoPi * riff * 2.01 * t));
    const double burst = std::fmod(t * 8.0, 1.0) < 0.3 ? 0.45 : 0.15;
    out[i] = 0.5 * std::tanh(drive) + burst * (2.0 * rng.uniform() - 1.0);
  }
  return out;
}

// Clean sine melody stepping every half second over a soft kick.
std::vector<double> pop(std::size_t n, int rate, Rng& rng) {
  static constexpr double kScale[] = {1.0, 1.122, 1.26, 1.335, 1.498, 1.682};
  const double base = 392.0 + 100.0 * rng.uniform();
  std::vector<double> notes(64);
  for (double& note : notes) note = base * kScale[rng.below(std::size(kScale))];
  std::vector<double> out(n);
  double phase = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate;
    const double f = notes[static_cast<std::size_t>(t * 2.0) % notes.size()];
    phase += kTwoPi * f / rate;
    const double kick_t = std::fmod(t, 0.5);
    const double kick = std::sin(kTwoPi * 55.0 * kick_t) * std::exp(-18.0 * kick_t);
    out[i] = 0.35 * std::sin(phase) + 0.1 * std::sin(2.0 * phase) + 0.3 * kick;
  }
  return out;
}

void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

void make_fixture(const std::filesystem::path& dir, const FixtureOptions& options) {
  if (options.songs_per_genre == 0 || !(options.seconds > 0.0)) {
    fail(ErrorCode::InvalidArgument, "fixture needs songs and a positive duration");
  }
  struct Recipe {
    const char* genre;
    int rate;
    int channels;
    std::vector<double> (*make)(std::size_t, int, Rng&);
  };
  const Recipe recipes[] = {{"rock", 22050, 1, rock}, {"metal", 22050, 1, metal}, {"pop", 44100, 2, pop}};
  for (const auto& r : recipes) {
    const auto genre_dir = dir / r.genre;
    std::filesystem::create_directories(genre_dir);
    for (std::size_t s = 0; s < options.songs_per_genre; ++s) {
      const std::string name = std::string(r.genre) + (s < 10 ? "0" : "") + std::to_string(s);
      Rng rng(derive_seed(options.seed, name));
      const auto n = static_cast<std::size_t>(std::llround(options.seconds * r.rate));
      const auto mono = r.make(n, r.rate, rng);
      AudioSignal sig;
      sig.sample_rate = r.rate;
      sig.channels = r.channels;
      sig.samples.reserve(n * r.channels);
      for (double v : mono) {
        for (int c = 0; c < r.channels; ++c) {
          // Slight level offset between channels.
          sig.samples.push_back(std::clamp(v * (c == 0 ? 1.0 : 0.9), -1.0, 1.0));
        }
      }
      write_bytes(genre_dir / (name + ".wav"), encode_wav_pcm16(sig));
    }
  }
}

}  // namespace atm
