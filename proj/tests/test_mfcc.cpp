#include <random>

#include "atm/error.hpp"
#include "atm/mfcc.hpp"
#include "doctest.h"
#include "oracle.hpp"

using namespace atm;

TEST_CASE("mel centers for 4 filters at 8 kHz") {
  MfccConfig c;
  c.n_mels = 4;
  c.n_coeffs = 4;
  c.n_fft = 256;
  c.hop = 128;
  c.fmax = 4000;
  const auto centers = mel_center_frequencies(c, 8000);
  // Hand evaluation of 700(10^(m/2595)-1) at m = i/5 * mel(4000).
  const double expected[] = {324.46707094304395, 799.3325420665997, 1494.309739629368,
                             2511.425816714131};
  REQUIRE(centers.size() == 4);
  for (int i = 0; i < 4; ++i) CHECK(centers[i] == doctest::Approx(expected[i]).epsilon(1e-12));
}

TEST_CASE("single filter spans the band") {
  MfccConfig c;
  c.n_mels = 1;
  c.n_coeffs = 1;
  const auto fb = mel_filterbank(c, 22050);
  const auto center = mel_center_frequencies(c, 22050)[0];
  CHECK(center == doctest::Approx(oracle::inv_mel(oracle::mel(11025) / 2)));
  const double bin = 22050.0 / 1024;
  std::size_t peak = 0;
  for (std::size_t k = 0; k < fb.cols(); ++k) {
    if (fb(0, k) > fb(0, peak)) peak = k;
  }
  CHECK(std::abs(double(peak) * bin - center) <= bin);
  CHECK(fb(0, 0) == 0.0);
  CHECK(fb(0, 1) > 0.0);
}

TEST_CASE("default filterbank rows are positive") {
  const auto fb = mel_filterbank(MfccConfig{}, 22050);
  for (std::size_t m = 0; m < fb.rows(); ++m) {
    double s = 0;
    for (double w : fb.row(m)) s += w;
    CHECK(s > 0);
  }
}

TEST_CASE("too many filters for the FFT size") {
  MfccConfig c;
  c.n_fft = 64;
  c.n_mels = 40;
  CHECK_THROWS_AS(mel_filterbank(c, 22050), Error);
}

TEST_CASE("dct basics") {
  const auto m = dct2_matrix(8, 8);
  for (std::size_t i = 0; i < 8; ++i) {
    for (std::size_t j = 0; j < 8; ++j) {
      double dot = 0;
      for (std::size_t k = 0; k < 8; ++k) dot += m(i, k) * m(j, k);
      CHECK(dot == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-9));
    }
  }
  for (std::size_t k = 1; k < 8; ++k) {
    double s = 0;
    for (std::size_t i = 0; i < 8; ++i) s += m(k, i) * 3.0;
    CHECK(std::abs(s) < 1e-12);
  }
  // Orthonormal size-2 transform of (1, 0).
  const auto d2 = dct2_matrix(2, 2);
  CHECK(d2(0, 0) == doctest::Approx(1 / std::sqrt(2.0)));
  CHECK(d2(1, 0) == doctest::Approx(1 / std::sqrt(2.0)));
}

TEST_CASE("fft power spectrum equals direct dft") {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> nd;
  std::vector<double> x(256);
  for (double& v : x) v = nd(gen);
  const auto fast = power_spectrum(x);
  const auto slow = oracle::dft_power(x);
  for (std::size_t k = 0; k < slow.size(); ++k) CHECK(fast[k] == doctest::Approx(slow[k]).epsilon(1e-9));
}

TEST_CASE("silent clip") {
  AudioClip clip{"s", 0, 0, std::vector<double>(2205, 0.0), 22050};
  MfccExtractor ex(MfccConfig{}, 22050);
  const auto frames = ex.frame_coefficients(clip.samples);
  REQUIRE(frames.size() == 3);
  CHECK(frames[0] == frames[1]);
  CHECK(frames[1] == frames[2]);
  const auto f = ex.compute(clip);
  CHECK(f.values.size() == 13);
  // log of the floor in every band: only c0 survives the DCT.
  CHECK(f.values[0] == doctest::Approx(std::log(1e-10) * std::sqrt(40.0)));
  for (std::size_t c = 1; c < 13; ++c) CHECK(std::abs(f.values[c]) < 1e-9);
}

TEST_CASE("440 Hz tone matches the reference pipeline") {
  AudioClip clip{"t", 0, 0, oracle::sine(440, 22050, 2205), 22050};
  const auto got = mfcc_clip(clip, MfccConfig{}).values;
  const auto want = oracle::mfcc(clip.samples, 22050, {});
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-6));
}

TEST_CASE("errors") {
  AudioClip shorty{"t", 0, 0, std::vector<double>(1000, 0.1), 22050};
  CHECK_THROWS_AS(mfcc_clip(shorty, MfccConfig{}), Error);
  AudioClip wrong{"t", 0, 0, std::vector<double>(2205, 0.1), 44100};
  MfccExtractor ex(MfccConfig{}, 22050);
  CHECK_THROWS_AS(ex.compute(wrong), Error);
}
