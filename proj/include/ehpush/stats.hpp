#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "ehpush/errors.hpp"

namespace ehpush {
namespace stats {

inline double mean(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

inline double sample_variance(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double acc = 0.0;
  for (double x : xs) acc += (x - m) * (x - m);
  return acc / static_cast<double>(xs.size() - 1);
}

/// Two-sided 97.5% Student-t quantile. Exact table through 30 degrees of
/// freedom, then the usual conservative breakpoints.
inline double t_quantile_975(std::size_t dof) {
  static constexpr double table[] = {
      12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
      2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
      2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};
  if (dof == 0) return 0.0;
  if (dof <= 30) return table[dof - 1];
  if (dof < 40) return 2.042;
  if (dof < 60) return 2.021;
  if (dof < 120) return 2.000;
  return 1.980;
}

/// Half-width of the 95% confidence interval for the mean of xs, from the
/// across-sample variance (Student-t, n-1 dof). Zero for a single sample.
inline double ci95_halfwidth(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  return t_quantile_975(xs.size() - 1) *
         std::sqrt(sample_variance(xs) / static_cast<double>(xs.size()));
}

namespace detail {

inline std::vector<double> ranks_with_ties(const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> rank(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double shared = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = shared;
    i = j + 1;
  }
  return rank;
}

}  // namespace detail

/// Spearman rank correlation (tie-aware: Pearson on average ranks).
inline double spearman_rho(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw PreconditionError("spearman needs two equally sized samples of >= 2");
  const std::vector<double> rx = detail::ranks_with_ties(xs);
  const std::vector<double> ry = detail::ranks_with_ties(ys);
  const double mx = mean(rx), my = mean(ry);
  double num = 0.0, dx = 0.0, dy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    num += (rx[i] - mx) * (ry[i] - my);
    dx += (rx[i] - mx) * (rx[i] - mx);
    dy += (ry[i] - my) * (ry[i] - my);
  }
  if (dx == 0.0 || dy == 0.0)
    throw PreconditionError("spearman undefined for a constant sample");
  return num / std::sqrt(dx * dy);
}

/// Standard error of a binomial proportion estimated from n trials.
inline double binomial_se(double p, double n) {
  if (n <= 0.0) return 0.0;
  return std::sqrt(std::max(0.0, p * (1.0 - p)) / n);
}

}  // namespace stats
}  // namespace ehpush
