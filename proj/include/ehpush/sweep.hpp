#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "ehpush/engine.hpp"
#include "ehpush/errors.hpp"
#include "ehpush/stats.hpp"

namespace ehpush {

/// The parameter a sweep walks along.
enum class SweepAxis {
  kRequestProbability,
  kBatteryCapacity,
  kZipfExponent,
  kBirthRate,
  kFetchThreshold,
  kPushThreshold,
  kMaxFetch,
  kHarvestProbability,
  kHarvestAmount,
};

inline const char* axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kRequestProbability: return "request_prob";
    case SweepAxis::kBatteryCapacity: return "battery_capacity";
    case SweepAxis::kZipfExponent: return "zipf_exponent";
    case SweepAxis::kBirthRate: return "birth_rate";
    case SweepAxis::kFetchThreshold: return "fetch_threshold";
    case SweepAxis::kPushThreshold: return "push_threshold";
    case SweepAxis::kMaxFetch: return "max_fetch";
    case SweepAxis::kHarvestProbability: return "harvest_prob";
    case SweepAxis::kHarvestAmount: return "harvest_amount";
  }
  return "?";
}

inline SweepAxis parse_axis(const std::string& name) {
  for (SweepAxis axis :
       {SweepAxis::kRequestProbability, SweepAxis::kBatteryCapacity,
        SweepAxis::kZipfExponent, SweepAxis::kBirthRate, SweepAxis::kFetchThreshold,
        SweepAxis::kPushThreshold, SweepAxis::kMaxFetch, SweepAxis::kHarvestProbability,
        SweepAxis::kHarvestAmount})
    if (name == axis_name(axis)) return axis;
  throw ConfigError("unknown sweep axis '" + name + "'");
}

namespace detail {

inline Energy integral_axis_value(SweepAxis axis, double value) {
  const double r = std::round(value);
  if (std::fabs(value - r) > 1e-9)
    throw ConfigError(std::string(axis_name(axis)) + " values must be integers");
  return static_cast<Energy>(r);
}

}  // namespace detail

/// Applies one axis value to a base configuration.
inline void apply_axis(WorldConfig& config, SweepAxis axis, double value) {
  switch (axis) {
    case SweepAxis::kRequestProbability: config.request_probability = value; return;
    case SweepAxis::kBatteryCapacity:
      config.capacity = detail::integral_axis_value(axis, value);
      config.initial_level = std::min(config.initial_level, config.capacity);
      return;
    case SweepAxis::kZipfExponent: config.zipf_exponent = value; return;
    case SweepAxis::kBirthRate: config.birth_rate = value; return;
    case SweepAxis::kFetchThreshold:
      config.thresholds.fetch_threshold = detail::integral_axis_value(axis, value);
      return;
    case SweepAxis::kPushThreshold:
      config.thresholds.push_threshold = detail::integral_axis_value(axis, value);
      return;
    case SweepAxis::kMaxFetch:
      config.thresholds.max_fetch =
          static_cast<std::size_t>(detail::integral_axis_value(axis, value));
      return;
    case SweepAxis::kHarvestProbability: config.energy.arrival_probability = value; return;
    case SweepAxis::kHarvestAmount:
      config.energy.arrival_amount = detail::integral_axis_value(axis, value);
      return;
  }
}

/// A parameter sweep: every (axis value, policy) cell is estimated from
/// `replications` seeded runs. Replication r of every cell uses seed
/// seed_base + r, so cells share their randomness (paired comparisons).
struct SweepSpec {
  WorldConfig base;
  SweepAxis axis = SweepAxis::kRequestProbability;
  std::vector<double> values;
  std::vector<PolicyKind> policies;
  std::uint32_t replications = 20;
  std::uint64_t seed_base = 1;

  WorldConfig cell_config(double value, PolicyKind policy, std::uint32_t replication) const {
    WorldConfig config = base;
    apply_axis(config, axis, value);
    config.policy = policy;
    config.seed = seed_base + replication;
    return config;
  }

  void validate() const {
    if (values.empty()) throw ConfigError("sweep has no axis values");
    if (policies.empty()) throw ConfigError("sweep has no policies");
    if (replications < 1) throw ConfigError("sweep replications must be >= 1");
    for (double v : values) {
      for (PolicyKind p : policies) {
        try {
          cell_config(v, p, 0).validate();
        } catch (const ConfigError& e) {
          throw ConfigError("cell " + std::string(axis_name(axis)) + "=" +
                            std::to_string(v) + " policy=" + policy_name(p) + ": " +
                            e.what());
        }
      }
    }
  }
};

/// Aggregates for one (axis value, policy) cell.
struct CellResult {
  double value = 0.0;
  PolicyKind policy = PolicyKind::kBaseline;
  std::vector<double> eta_samples;  // one per replication, NaN if undefined
  double eta_mean = 0.0;
  double eta_ci95 = 0.0;
  bool eta_defined = true;
  double mean_local = 0.0;
  double mean_unicast = 0.0;
  double mean_macro = 0.0;
  double mean_pushes = 0.0;
  double mean_fetches = 0.0;
  double mean_wasted = 0.0;
};

struct SweepResult {
  SweepAxis axis = SweepAxis::kRequestProbability;
  std::uint32_t replications = 0;
  std::uint64_t seed_base = 0;
  std::vector<CellResult> cells;  // ordered by (value index, policy index)

  const CellResult& cell(double value, PolicyKind policy) const {
    for (const CellResult& c : cells)
      if (c.value == value && c.policy == policy) return c;
    throw PreconditionError("no such sweep cell");
  }
};

namespace detail {

/// Runs fn(0..n-1) on up to `threads` workers; first exception wins and is
/// rethrown on the caller after all workers drain.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  unsigned workers = std::thread::hardware_concurrency();
  if (workers == 0) workers = 1;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body);
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace detail

/// Runs the whole grid. Replications execute concurrently on disjoint
/// state; aggregation is a fixed-order reduce, so the result (and any file
/// written from it) is byte-stable for a given spec.
inline SweepResult run_sweep(const SweepSpec& spec) {
  spec.validate();
  const std::size_t n_cells = spec.values.size() * spec.policies.size();
  const std::size_t n_runs = n_cells * spec.replications;
  std::vector<Metrics> runs(n_runs);

  detail::parallel_for(n_runs, [&](std::size_t i) {
    const std::size_t cell = i / spec.replications;
    const std::uint32_t rep = static_cast<std::uint32_t>(i % spec.replications);
    const double value = spec.values[cell / spec.policies.size()];
    const PolicyKind policy = spec.policies[cell % spec.policies.size()];
    runs[i] = run(spec.cell_config(value, policy, rep));
  });

  SweepResult result;
  result.axis = spec.axis;
  result.replications = spec.replications;
  result.seed_base = spec.seed_base;
  result.cells.reserve(n_cells);
  for (std::size_t c = 0; c < n_cells; ++c) {
    CellResult cell;
    cell.value = spec.values[c / spec.policies.size()];
    cell.policy = spec.policies[c % spec.policies.size()];
    std::vector<double> local, unicast, macro, pushes, fetches, wasted;
    for (std::uint32_t r = 0; r < spec.replications; ++r) {
      const Metrics& m = runs[c * spec.replications + r];
      cell.eta_samples.push_back(m.eta());
      cell.eta_defined = cell.eta_defined && m.eta_defined();
      local.push_back(static_cast<double>(m.served_locally));
      unicast.push_back(static_cast<double>(m.served_by_unicast));
      macro.push_back(static_cast<double>(m.served_by_macro));
      pushes.push_back(static_cast<double>(m.pushes));
      fetches.push_back(static_cast<double>(m.fetched_contents));
      wasted.push_back(static_cast<double>(m.energy_wasted));
    }
    cell.eta_mean = stats::mean(cell.eta_samples);
    cell.eta_ci95 = stats::ci95_halfwidth(cell.eta_samples);
    cell.mean_local = stats::mean(local);
    cell.mean_unicast = stats::mean(unicast);
    cell.mean_macro = stats::mean(macro);
    cell.mean_pushes = stats::mean(pushes);
    cell.mean_fetches = stats::mean(fetches);
    cell.mean_wasted = stats::mean(wasted);
    result.cells.push_back(std::move(cell));
  }
  return result;
}

}  // namespace ehpush
