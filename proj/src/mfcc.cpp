#include "atm/mfcc.hpp"

#include <bit>
#include <cmath>
#include <complex>
#include <numbers>

#include "atm/error.hpp"

namespace atm {
namespace {

void fft_in_place(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
    const std::size_t half = len / 2;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < half; ++k) {
        // Twiddles from the angle directly; a running product drifts.
        const std::complex<double> w = std::polar(1.0, ang * static_cast<double>(k));
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + half] * w;
        a[i + k] = u + v;
        a[i + k + half] = u - v;
      }
    }
  }
}

}  // namespace

void validate(const MfccConfig& c, int sample_rate) {
  const auto bad = [](const std::string& what) { fail(ErrorCode::InvalidArgument, "mfcc: " + what); };
  if (sample_rate <= 0) bad("sample_rate must be positive");
  if (c.n_fft < 2) bad("n_fft must be at least 2");
  if (c.hop == 0 || c.hop > c.n_fft) bad("hop must be in (0, n_fft]");
  if (c.n_mels == 0) bad("n_mels must be positive");
  if (c.n_coeffs == 0 || c.n_coeffs > c.n_mels) bad("n_coeffs must be in (0, n_mels]");
  if (!(c.pre_emphasis >= 0.0 && c.pre_emphasis < 1.0)) bad("pre_emphasis must be in [0, 1)");
  const double fmax = c.resolved_fmax(sample_rate);
  if (!(c.fmin >= 0.0 && c.fmin < fmax)) bad("fmin must be in [0, fmax)");
  if (fmax > sample_rate / 2.0) bad("fmax above Nyquist");
  if (!(c.log_floor > 0.0)) bad("log_floor must be positive");
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

namespace {

// n_mels + 2 edge points, equally spaced in mel.
std::vector<double> mel_points(const MfccConfig& config, int sample_rate) {
  const double lo = hz_to_mel(config.fmin);
  const double hi = hz_to_mel(config.resolved_fmax(sample_rate));
  const std::size_t count = config.n_mels + 2;
  std::vector<double> hz(count);
  for (std::size_t i = 0; i < count; ++i) {
    hz[i] = mel_to_hz(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1));
  }
  return hz;
}

}  // namespace

std::vector<double> mel_center_frequencies(const MfccConfig& config, int sample_rate) {
  validate(config, sample_rate);
  const auto pts = mel_points(config, sample_rate);
  return {pts.begin() + 1, pts.end() - 1};
}

Matrix mel_filterbank(const MfccConfig& config, int sample_rate) {
  validate(config, sample_rate);
  const auto pts = mel_points(config, sample_rate);
  const std::size_t bins = config.n_fft / 2 + 1;
  const double bin_hz = static_cast<double>(sample_rate) / static_cast<double>(config.n_fft);

  for (std::size_t m = 1; m < config.n_mels; ++m) {
    if (std::lround(pts[m] / bin_hz) == std::lround(pts[m + 1] / bin_hz)) {
      fail(ErrorCode::DegenerateBand, "filters " + std::to_string(m - 1) + " and " +
                                          std::to_string(m) + " share FFT bin " +
                                          std::to_string(std::lround(pts[m] / bin_hz)));
    }
  }

  Matrix fb(config.n_mels, bins);
  for (std::size_t m = 0; m < config.n_mels; ++m) {
    const double left = pts[m];
    const double center = pts[m + 1];
    const double right = pts[m + 2];
    bool any = false;
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * bin_hz;
      double w = 0.0;
      if (f > left && f <= center) {
        w = (f - left) / (center - left);
      } else if (f > center && f < right) {
        w = (right - f) / (right - center);
      }
      fb(m, k) = w;
      any = any || w > 0.0;
    }
    if (!any) {
      fail(ErrorCode::DegenerateBand, "filter " + std::to_string(m) + " covers no FFT bin");
    }
  }
  return fb;
}

Matrix dct2_matrix(std::size_t n_coeffs, std::size_t n_mels) {
  if (n_mels == 0 || n_coeffs == 0 || n_coeffs > n_mels) {
    fail(ErrorCode::InvalidArgument, "dct2_matrix needs 0 < n_coeffs <= n_mels");
  }
  Matrix m(n_coeffs, n_mels);
  const double n = static_cast<double>(n_mels);
  for (std::size_t k = 0; k < n_coeffs; ++k) {
    const double scale = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
    for (std::size_t i = 0; i < n_mels; ++i) {
      m(k, i) = scale * std::cos(std::numbers::pi * static_cast<double>(k) *
                                 (2.0 * static_cast<double>(i) + 1.0) / (2.0 * n));
    }
  }
  return m;
}

std::vector<double> power_spectrum(std::span<const double> frame) {
  const std::size_t n = frame.size();
  const std::size_t bins = n / 2 + 1;
  std::vector<double> power(bins);
  if (n == 0) return {};
  if (std::has_single_bit(n)) {
    std::vector<std::complex<double>> buf(frame.begin(), frame.end());
    fft_in_place(buf);
    for (std::size_t k = 0; k < bins; ++k) power[k] = std::norm(buf[k]);
    return power;
  }
  for (std::size_t k = 0; k < bins; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      acc += frame[t] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * t % n) /
                                            static_cast<double>(n));
    }
    power[k] = std::norm(acc);
  }
  return power;
}

MfccExtractor::MfccExtractor(const MfccConfig& config, int sample_rate)
    : config_(config),
      sample_rate_(sample_rate),
      filterbank_(mel_filterbank(config, sample_rate)),
      dct_(dct2_matrix(config.n_coeffs, config.n_mels)),
      window_(config.n_fft) {
  // Periodic Hann.
  const double n = static_cast<double>(config.n_fft);
  for (std::size_t i = 0; i < config.n_fft; ++i) {
    window_[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / n);
  }
}

std::vector<std::vector<double>> MfccExtractor::frame_coefficients(
    std::span<const double> samples) const {
  if (samples.size() < config_.n_fft) {
    fail(ErrorCode::ClipTooShort, std::to_string(samples.size()) + " samples < n_fft " +
                                      std::to_string(config_.n_fft));
  }
  std::vector<double> emph(samples.size());
  emph[0] = samples[0];
  for (std::size_t i = 1; i < samples.size(); ++i) {
    emph[i] = samples[i] - config_.pre_emphasis * samples[i - 1];
  }

  const std::size_t n_frames = 1 + (samples.size() - config_.n_fft) / config_.hop;
  std::vector<std::vector<double>> out;
  out.reserve(n_frames);
  std::vector<double> frame(config_.n_fft);
  std::vector<double> log_mel(config_.n_mels);
  for (std::size_t f = 0; f < n_frames; ++f) {
    const std::size_t start = f * config_.hop;
    for (std::size_t i = 0; i < config_.n_fft; ++i) frame[i] = emph[start + i] * window_[i];
    const auto power = power_spectrum(frame);
    for (std::size_t m = 0; m < config_.n_mels; ++m) {
      const auto weights = filterbank_.row(m);
      double energy = 0.0;
      for (std::size_t k = 0; k < power.size(); ++k) energy += weights[k] * power[k];
      log_mel[m] = std::log(std::max(energy, config_.log_floor));
    }
    std::vector<double> coeffs(config_.n_coeffs);
    for (std::size_t c = 0; c < config_.n_coeffs; ++c) {
      const auto basis = dct_.row(c);
      double acc = 0.0;
      for (std::size_t m = 0; m < config_.n_mels; ++m) acc += basis[m] * log_mel[m];
      coeffs[c] = acc;
    }
    out.push_back(std::move(coeffs));
  }
  return out;
}

ClipFeature MfccExtractor::compute(const AudioClip& clip) const {
  if (clip.sample_rate != sample_rate_) {
    fail(ErrorCode::InvalidArgument, "clip rate " + std::to_string(clip.sample_rate) +
                                         " != extractor rate " + std::to_string(sample_rate_));
  }
  const auto frames = frame_coefficients(clip.samples);
  ClipFeature feature{clip.song_id, clip.clip_index, {}};
  if (config_.aggregation == FrameAggregation::FirstFrame) {
    feature.values = frames.front();
  } else {
    feature.values.assign(config_.n_coeffs, 0.0);
    for (const auto& fr : frames) {
      for (std::size_t c = 0; c < config_.n_coeffs; ++c) feature.values[c] += fr[c];
    }
    for (double& v : feature.values) v /= static_cast<double>(frames.size());
  }
  return feature;
}

}  // namespace atm
