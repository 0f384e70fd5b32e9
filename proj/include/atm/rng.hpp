#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace atm {

/// Seeded random source whose derived draws are identical across standard
/// library implementations. Only the raw mt19937_64 stream is taken from the
/// standard library; every distribution is computed here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n). n must be positive.
  std::size_t below(std::size_t n);

  double normal();

  /// Gamma(shape, 1) by Marsaglia-Tsang, with the boost for shape < 1.
  double gamma(double shape);

  std::vector<double> dirichlet(std::span<const double> concentration);
  std::vector<double> symmetric_dirichlet(std::size_t dim, double concentration);

  /// Index drawn proportionally to non-negative weights (need not sum to 1).
  std::size_t categorical(std::span<const double> weights);

  template <class T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace atm
