#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ehpush {

namespace detail {

/// splitmix64 finalizer; used to derive well-separated seeds.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Deterministic pseudo-random stream. All draws are built on the raw
/// 64-bit output of std::mt19937_64, which the standard pins exactly, so
/// identical seeds give identical sequences on every platform. The
/// std::*_distribution adapters are deliberately avoided (their mapping is
/// implementation-defined).
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  /// Independent child stream; `tag` separates the per-process streams so
  /// that consumption in one never shifts the others.
  RngStream substream(std::uint64_t tag) const {
    return RngStream(detail::mix64(seed_ ^ detail::mix64(tag)));
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1), 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return uniform() < p;
  }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_below(std::uint64_t n) {
    // rejection sampling on the top bias region
    const std::uint64_t limit = n * ((~std::uint64_t{0}) / n);
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  /// Poisson count by Knuth's product method; O(mean) draws, exact.
  /// Fine for the per-period birth rates this simulator uses.
  std::uint64_t poisson(double mean) {
    if (mean <= 0.0) return 0;
    const double threshold = std::exp(-mean);
    std::uint64_t k = 0;
    double prod = uniform();
    while (prod > threshold) {
      ++k;
      prod *= uniform();
    }
    return k;
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace ehpush
