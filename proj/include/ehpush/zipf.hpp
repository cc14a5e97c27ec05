#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "ehpush/errors.hpp"

namespace ehpush {

/// Zipf popularity over ranks 1..m: the i-th ranked content is requested
/// with probability (1/i^v) / sum_{j=1..m} 1/j^v. exponent = 0 is uniform;
/// larger exponents concentrate demand on the top ranks.
///
/// The rank sampler is a plain inverse-CDF over the rank order and uses a
/// single uniform variate. Prefix sums of j^-v are cached and grown on
/// demand so the catalog size may change every period without a rescan.
class ZipfPopularity {
 public:
  explicit ZipfPopularity(double exponent) : exponent_(exponent) {
    if (exponent < 0.0) throw ConfigError("zipf exponent must be >= 0");
    prefix_.push_back(0.0);  // prefix_[i] = sum_{j=1..i} j^-v
  }

  double exponent() const { return exponent_; }

  /// Probability vector over ranks 1..m.
  std::vector<double> pmf(std::size_t m) const {
    if (m == 0) throw EmptyCatalog("zipf pmf over zero contents");
    ensure(m);
    const double norm = prefix_[m];
    std::vector<double> out(m);
    for (std::size_t i = 1; i <= m; ++i) out[i - 1] = weight(i) / norm;
    return out;
  }

  /// Inverse-CDF draw: the smallest rank whose cumulative mass covers u.
  std::size_t sample_rank(std::size_t m, double u) const {
    if (m == 0) throw EmptyCatalog("zipf sample over zero contents");
    ensure(m);
    const double target = u * prefix_[m];
    // binary search over prefix_[1..m] for the first value >= target
    std::size_t lo = 1, hi = m;
    while (lo < hi) {
      const std::size_t mid = lo + (hi - lo) / 2;
      if (prefix_[mid] >= target)
        hi = mid;
      else
        lo = mid + 1;
    }
    return lo;
  }

 private:
  double weight(std::size_t rank) const {
    return std::pow(static_cast<double>(rank), -exponent_);
  }

  void ensure(std::size_t m) const {
    while (prefix_.size() <= m) {
      const std::size_t next = prefix_.size();  // rank == index
      prefix_.push_back(prefix_.back() + weight(next));
    }
  }

  double exponent_;
  mutable std::vector<double> prefix_;
};

/// Standalone popularity vector, matching ZipfPopularity::pmf.
inline std::vector<double> zipf_pmf(std::size_t m, double exponent) {
  return ZipfPopularity(exponent).pmf(m);
}

}  // namespace ehpush
