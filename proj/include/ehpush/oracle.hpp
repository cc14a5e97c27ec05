#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "ehpush/engine.hpp"
#include "ehpush/errors.hpp"

namespace ehpush {
namespace oracle {

inline unsigned lowest_bit(unsigned x) { return x & (~x + 1u); }
inline int popcount(unsigned x) { return std::popcount(x); }

/// Reduced model for the exact baseline analysis: a static catalog where
/// every request needs a unicast, so the only state is the battery.
struct ChainSpec {
  Energy capacity = 10;            // battery capacity
  double arrival_probability = 0.5;
  Energy arrival_amount = 3;
  Energy service_cost = 2;         // transmit cost per unicast
  double request_probability = 0.75;

  void validate() const {
    if (capacity < 0) throw ConfigError("chain: capacity must be >= 0");
    if (service_cost < 1) throw ConfigError("chain: service cost must be >= 1");
    if (service_cost > capacity)
      throw ConfigError("chain: service cost exceeds capacity, no request is servable");
    if (arrival_probability < 0 || arrival_probability > 1 ||
        request_probability < 0 || request_probability > 1)
      throw ConfigError("chain: probabilities must be in [0, 1]");
    if (arrival_amount < 0) throw ConfigError("chain: arrival amount must be >= 0");
  }
};

/// Probability vector over post-harvest battery levels 0..capacity.
struct StationaryDistribution {
  std::vector<double> probability;
};

/// Row-stochastic transition matrix over post-harvest levels: serve a
/// request (if any, and affordable), then apply the next harvest.
inline std::vector<std::vector<double>> transition_matrix(const ChainSpec& spec) {
  spec.validate();
  const std::size_t n = static_cast<std::size_t>(spec.capacity) + 1;
  std::vector<std::vector<double>> p(n, std::vector<double>(n, 0.0));
  const double pr = spec.request_probability;
  const double pa = spec.arrival_probability;
  for (std::size_t b = 0; b < n; ++b) {
    const auto serve = [&](Energy level, double weight) {
      const Energy gained =
          std::min<Energy>(level + spec.arrival_amount, spec.capacity);
      if (pa > 0.0) p[b][static_cast<std::size_t>(gained)] += weight * pa;
      if (pa < 1.0) p[b][static_cast<std::size_t>(level)] += weight * (1.0 - pa);
    };
    const Energy level = static_cast<Energy>(b);
    const Energy after_service =
        level >= spec.service_cost ? level - spec.service_cost : level;
    if (pr > 0.0) serve(after_service, pr);
    if (pr < 1.0) serve(level, 1.0 - pr);
  }
  return p;
}

namespace detail {

/// Stationary row vector of a small row-stochastic matrix: dense solve of
/// pi (P - I) = 0 with the normalization sum(pi) = 1, partial pivoting;
/// falls back to damped power iteration if elimination degenerates.
inline std::vector<double> solve_stationary(const std::vector<std::vector<double>>& p) {
  const std::size_t n = p.size();
  // a = (P^T - I) with the last row replaced by ones; rhs = e_n
  std::vector<std::vector<double>> a(n, std::vector<double>(n + 1, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a[i][j] = p[j][i] - (i == j ? 1.0 : 0.0);
  }
  for (std::size_t j = 0; j < n; ++j) a[n - 1][j] = 1.0;
  a[n - 1][n] = 1.0;

  bool singular = false;
  for (std::size_t col = 0; col < n && !singular; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
    if (std::fabs(a[pivot][col]) < 1e-13) {
      singular = true;
      break;
    }
    std::swap(a[col], a[pivot]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || a[r][col] == 0.0) continue;
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c <= n; ++c) a[r][c] -= f * a[col][c];
    }
  }

  std::vector<double> pi(n, 1.0 / static_cast<double>(n));
  if (!singular) {
    for (std::size_t i = 0; i < n; ++i) pi[i] = a[i][n] / a[i][i];
  } else {
    // damped iteration keeps periodic chains convergent
    for (int iter = 0; iter < 1000000; ++iter) {
      std::vector<double> next(n, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) next[j] += pi[i] * p[i][j];
      double drift = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        next[i] = 0.5 * next[i] + 0.5 * pi[i];
        drift = std::max(drift, std::fabs(next[i] - pi[i]));
      }
      pi.swap(next);
      if (drift < 1e-14) break;
    }
  }
  double total = 0.0;
  for (double& x : pi) {
    if (x < 0.0 && x > -1e-9) x = 0.0;
    total += x;
  }
  for (double& x : pi) x /= total;
  return pi;
}

}  // namespace detail

inline StationaryDistribution stationary_distribution(const ChainSpec& spec) {
  return {detail::solve_stationary(transition_matrix(spec))};
}

/// Exact long-run fraction of requests the macro BS must serve under the
/// reactive baseline. Requests are independent of the battery state, so
/// this equals the stationary probability mass below the service cost.
/// With no energy income the battery eventually exhausts, hence eta = 1.
inline double exact_eta_baseline(const ChainSpec& spec) {
  spec.validate();
  if (spec.arrival_probability == 0.0) return 1.0;
  const StationaryDistribution pi = stationary_distribution(spec);
  double below = 0.0;
  for (Energy b = 0; b < spec.service_cost; ++b)
    below += pi.probability[static_cast<std::size_t>(b)];
  return below;
}

/// Exact per-run expectations for a tiny frozen world, from enumerating
/// every randomness branch (energy arrival x request draw) over the
/// horizon, merged by state. Counters observe periods after the warmup,
/// mirroring Metrics.
struct ExactExpectations {
  double total_requests = 0;
  double served_locally = 0;
  double served_by_unicast = 0;
  double served_by_macro = 0;
  double pushes = 0;
  double fetched_contents = 0;
  double energy_arrived = 0;
  double energy_spent = 0;
  double energy_wasted = 0;
  double start_level = 0;  // expected battery entering the observation window
  double final_level = 0;

  bool eta_defined() const { return total_requests > 0; }
  double eta() const {
    if (!eta_defined()) return std::numeric_limits<double>::quiet_NaN();
    return served_by_macro / total_requests;  // ratio of expectations
  }
};

/// Independent re-implementation of the period semantics over bitmask
/// states (battery level, cached set, pushed set by rank). Deliberately
/// shares no step or policy code with the engine it validates.
inline ExactExpectations exhaustive_eta(const WorldConfig& config) {
  config.validate();
  if (config.birth_rate != 0.0 || config.death_rate != 0.0)
    throw PreconditionError("exhaustive oracle requires a frozen catalog");
  const std::size_t m = config.resolved_initial_contents();
  const std::uint64_t horizon = config.horizon;
  if (m > 3) throw OracleTooLarge("exhaustive oracle supports at most 3 contents");
  if (horizon > 12) throw OracleTooLarge("exhaustive oracle supports horizons up to 12");
  if (config.capacity > 64) throw OracleTooLarge("exhaustive oracle battery bound is 64");

  const Energy cap = config.capacity;
  const Energy e_h = config.energy.arrival_amount;
  const Energy e_p = config.costs.transmit_cost;
  const Energy e_f = config.costs.fetch_cost;
  const double p_arr = config.energy.arrival_probability;
  const double p_req = config.request_probability;
  const bool full_cache = full_cache_policy(config.policy);
  const unsigned full_mask = m == 0 ? 0u : ((1u << m) - 1u);

  // popularity over ranks 1..m (uniform weights when the exponent is 0)
  std::vector<double> pmf(m, 0.0);
  if (m > 0) {
    double norm = 0.0;
    for (std::size_t i = 1; i <= m; ++i)
      norm += std::pow(static_cast<double>(i), -config.zipf_exponent);
    for (std::size_t i = 1; i <= m; ++i)
      pmf[i - 1] = std::pow(static_cast<double>(i), -config.zipf_exponent) / norm;
  }

  const std::size_t mask_states = static_cast<std::size_t>(1) << (2 * m);
  const std::size_t n_states = static_cast<std::size_t>(cap + 1) * mask_states;
  const auto encode = [&](Energy b, unsigned cached, unsigned pushed) {
    return static_cast<std::size_t>(b) * mask_states +
           (static_cast<std::size_t>(cached) << m) + pushed;
  };

  std::vector<double> prob(n_states, 0.0);
  prob[encode(config.initial_level, full_cache ? full_mask : 0u, 0u)] = 1.0;

  ExactExpectations out;
  const std::uint64_t warmup = config.resolved_warmup();

  std::vector<double> next(n_states, 0.0);
  for (std::uint64_t t = 1; t <= horizon; ++t) {
    const bool observed = t > warmup;
    if (t == warmup + 1) {
      for (std::size_t s = 0; s < n_states; ++s)
        out.start_level += prob[s] * static_cast<double>(s / mask_states);
    }
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t s = 0; s < n_states; ++s) {
      const double weight = prob[s];
      if (weight == 0.0) continue;
      const Energy b0 = static_cast<Energy>(s / mask_states);
      const unsigned cached0 = static_cast<unsigned>((s % mask_states) >> m);
      const unsigned pushed0 = static_cast<unsigned>(s & ((1u << m) - 1u));

      for (int arrival = 0; arrival < 2; ++arrival) {
        const double p_branch_a = arrival ? p_arr : 1.0 - p_arr;
        if (p_branch_a == 0.0) continue;
        const Energy gained = arrival ? std::min<Energy>(b0 + e_h, cap) : b0;
        const Energy wasted = arrival ? b0 + e_h - gained : 0;

        // request = 0 means none; r in 1..m requests rank r. An empty
        // catalog yields no request regardless of the request probability.
        for (std::size_t r = 0; r <= m; ++r) {
          const double p_branch_r =
              r == 0 ? (m == 0 ? 1.0 : 1.0 - p_req) : p_req * pmf[r - 1];
          if (p_branch_r == 0.0) continue;
          const double w = weight * p_branch_a * p_branch_r;

          Energy b = gained;
          unsigned cached = cached0, pushed = pushed0;
          double macro = 0, local = 0, unicast = 0, push_cnt = 0, fetch_cnt = 0;
          Energy spent = 0;

          const unsigned bit = r == 0 ? 0u : (1u << (r - 1));
          const bool over_the_air = r != 0 && !(pushed & bit);
          if (r != 0 && !over_the_air) local = 1;

          if (over_the_air) {
            if ((cached & bit) && b >= e_p) {
              unicast = 1;
              b -= e_p;
              spent += e_p;
            } else {
              macro = 1;  // and the cell does nothing this period
            }
          } else {
            switch (config.policy) {
              case PolicyKind::kBaseline:
                break;
              case PolicyKind::kPushOnly:
                if (b >= e_p && (cached & ~pushed) != 0) {
                  pushed |= lowest_bit(cached & ~pushed);
                  b -= e_p;
                  spent += e_p;
                  push_cnt = 1;
                }
                break;
              case PolicyKind::kThreshold:
              case PolicyKind::kNoPush: {
                const int c2 = popcount(cached), c1 = popcount(pushed);
                if (m == 0) break;
                bool fetch_branch =
                    c2 == 0 || static_cast<double>(c1) / c2 >=
                                   static_cast<double>(c2) / static_cast<double>(m);
                if (fetch_branch && c2 == static_cast<int>(m)) fetch_branch = false;
                if (fetch_branch) {
                  if (b >= config.thresholds.fetch_threshold) {
                    std::size_t k = std::min<std::size_t>(config.thresholds.max_fetch,
                                                          m - static_cast<std::size_t>(c2));
                    if (e_f > 0)
                      k = std::min<std::size_t>(k, static_cast<std::size_t>(b / e_f));
                    for (std::size_t i = 0; i < k; ++i) {
                      cached |= lowest_bit(full_mask & ~cached);
                      b -= e_f;
                      spent += e_f;
                      fetch_cnt += 1;
                    }
                  }
                } else if (config.policy == PolicyKind::kThreshold) {
                  if (b >= config.thresholds.push_threshold && (cached & ~pushed) != 0) {
                    pushed |= lowest_bit(cached & ~pushed);
                    b -= e_p;
                    spent += e_p;
                    push_cnt = 1;
                  }
                }
                break;
              }
            }
          }

          if (observed) {
            out.energy_arrived += w * static_cast<double>(arrival ? e_h : 0);
            out.energy_wasted += w * static_cast<double>(wasted);
            out.energy_spent += w * static_cast<double>(spent);
            if (r != 0) out.total_requests += w;
            out.served_locally += w * local;
            out.served_by_unicast += w * unicast;
            out.served_by_macro += w * macro;
            out.pushes += w * push_cnt;
            out.fetched_contents += w * fetch_cnt;
          }
          next[encode(b, cached, pushed)] += w;
        }
      }
    }
    prob.swap(next);
  }
  for (std::size_t s = 0; s < n_states; ++s)
    out.final_level += prob[s] * static_cast<double>(s / mask_states);
  return out;
}

}  // namespace oracle
}  // namespace ehpush
