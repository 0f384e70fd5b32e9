#pragma once

#include <span>
#include <string>
#include <vector>

#include "atm/audio.hpp"
#include "atm/matrix.hpp"

namespace atm {

enum class FrameAggregation { Mean, FirstFrame };

struct MfccConfig {
  std::size_t n_fft = 1024;
  std::size_t hop = 512;
  std::size_t n_mels = 40;
  std::size_t n_coeffs = 13;
  double pre_emphasis = 0.97;
  double fmin = 0.0;
  double fmax = 0.0;  // <= 0 selects the Nyquist frequency
  double log_floor = 1e-10;
  FrameAggregation aggregation = FrameAggregation::Mean;

  double resolved_fmax(int sample_rate) const {
    return fmax > 0.0 ? fmax : sample_rate / 2.0;
  }
};

/// Throws InvalidArgument when the config cannot be used at this rate.
void validate(const MfccConfig& config, int sample_rate);

struct ClipFeature {
  std::string song_id;
  std::size_t clip_index = 0;
  std::vector<double> values;
};

double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Center frequencies (Hz) of the n_mels triangular filters.
std::vector<double> mel_center_frequencies(const MfccConfig& config, int sample_rate);

/// [n_mels x (n_fft/2 + 1)] triangular filters on the mel scale, unnormalized
/// (peak weight 1).
Matrix mel_filterbank(const MfccConfig& config, int sample_rate);

/// Orthonormal DCT-II basis, [n_coeffs x n_mels].
Matrix dct2_matrix(std::size_t n_coeffs, std::size_t n_mels);

/// |X_k|^2 for k = 0..n/2 of a real frame. Radix-2 FFT when n is a power of
/// two, direct summation otherwise.
std::vector<double> power_spectrum(std::span<const double> frame);

/// Holds the filterbank, DCT basis and window for one (config, rate) pair.
/// Immutable after construction and safe to share between threads.
class MfccExtractor {
 public:
  MfccExtractor(const MfccConfig& config, int sample_rate);

  const MfccConfig& config() const noexcept { return config_; }
  int sample_rate() const noexcept { return sample_rate_; }

  /// Cepstral vector for each frame of the clip, pre-emphasis included.
  std::vector<std::vector<double>> frame_coefficients(std::span<const double> samples) const;

  ClipFeature compute(const AudioClip& clip) const;

 private:
  MfccConfig config_;
  int sample_rate_;
  Matrix filterbank_;
  Matrix dct_;
  std::vector<double> window_;
};

inline ClipFeature mfcc_clip(const AudioClip& clip, const MfccConfig& config) {
  return MfccExtractor(config, clip.sample_rate).compute(clip);
}

}  // namespace atm
