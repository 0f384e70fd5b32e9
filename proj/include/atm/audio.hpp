#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace atm {

inline constexpr int kCanonicalSampleRate = 22050;
inline constexpr double kDefaultClipSeconds = 0.10;

/// Decoded PCM audio. Samples are interleaved when channels > 1.
struct AudioSignal {
  std::vector<double> samples;
  int sample_rate = 0;
  int channels = 1;

  std::size_t frames() const noexcept {
    return channels > 0 ? samples.size() / static_cast<std::size_t>(channels) : 0;
  }
};

struct AudioClip {
  std::string song_id;
  std::size_t clip_index = 0;
  double start_time = 0.0;
  std::vector<double> samples;
  int sample_rate = 0;
};

/// Parses a RIFF/WAVE container holding integer PCM (8/16/24/32-bit) or
/// IEEE float (32/64-bit). Samples are scaled and clamped to [-1, 1].
AudioSignal decode_wav(std::span<const std::uint8_t> bytes);

/// 16-bit PCM RIFF/WAVE encoder. decode_wav(encode_wav_pcm16(s)) reproduces
/// any signal whose samples are multiples of 1/32768 exactly.
std::vector<std::uint8_t> encode_wav_pcm16(const AudioSignal& signal);

AudioSignal to_mono(const AudioSignal& signal);

/// Linear interpolation onto a grid at target_rate. Expects mono input.
AudioSignal resample(const AudioSignal& signal, int target_rate);

/// Non-overlapping clips of round(clip_seconds * rate) samples; the trailing
/// partial clip is dropped.
std::vector<AudioClip> segment_clips(const AudioSignal& signal, const std::string& song_id,
                                     double clip_seconds = kDefaultClipSeconds);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

/// decode_wav + to_mono + resample, the ingest path used by the pipeline.
AudioSignal load_song(const std::filesystem::path& path, int target_rate = kCanonicalSampleRate);

}  // namespace atm
