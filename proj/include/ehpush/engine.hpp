#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <variant>

#include "ehpush/catalog.hpp"
#include "ehpush/energy.hpp"
#include "ehpush/errors.hpp"
#include "ehpush/policy.hpp"
#include "ehpush/request.hpp"
#include "ehpush/rng.hpp"
#include "ehpush/zipf.hpp"

namespace ehpush {

/// Everything one simulation run needs. Defaults follow the case-study
/// parameter set; validate() rejects inconsistent combinations.
struct WorldConfig {
  EnergyProcess energy{0.5, 3};      // arrival probability, amount per arrival
  EnergyCosts costs{1, 2};           // fetch, transmit
  Energy capacity = 10;              // battery capacity
  Energy initial_level = 0;
  double birth_rate = 1.0;           // new contents per period (Poisson mean)
  double death_rate = 1e-3;          // per-content death probability per period
  double zipf_exponent = 1.0;
  double request_probability = 0.5;
  PolicyKind policy = PolicyKind::kBaseline;
  ThresholdParams thresholds{};
  std::uint64_t horizon = 1'000'000;
  std::optional<std::uint64_t> warmup;            // default: horizon / 10
  std::optional<std::uint64_t> initial_contents;  // default: round(birth/death)
  std::uint64_t seed = 1;

  std::uint64_t resolved_warmup() const { return warmup ? *warmup : horizon / 10; }

  std::uint64_t resolved_initial_contents() const {
    if (initial_contents) return *initial_contents;
    if (death_rate > 0.0)
      return static_cast<std::uint64_t>(std::llround(birth_rate / death_rate));
    return 0;
  }

  void validate() const {
    auto prob = [](double x) { return x >= 0.0 && x <= 1.0; };
    if (!prob(energy.arrival_probability))
      throw ConfigError("energy arrival probability must be in [0, 1]");
    if (energy.arrival_amount < 0) throw ConfigError("harvest amount must be >= 0");
    if (costs.fetch_cost < 0) throw ConfigError("fetch cost must be >= 0");
    if (costs.transmit_cost < 1) throw ConfigError("transmit cost must be >= 1");
    if (capacity < 0) throw ConfigError("battery capacity must be >= 0");
    if (initial_level < 0 || initial_level > capacity)
      throw ConfigError("initial battery level must be in [0, capacity]");
    if (birth_rate < 0.0) throw ConfigError("birth rate must be >= 0");
    if (!prob(death_rate)) throw ConfigError("death rate must be in [0, 1]");
    if (zipf_exponent < 0.0) throw ConfigError("zipf exponent must be >= 0");
    if (!prob(request_probability))
      throw ConfigError("request probability must be in [0, 1]");
    if (horizon < 1) throw ConfigError("horizon must be >= 1");
    if (resolved_warmup() >= horizon) throw ConfigError("warmup must be < horizon");
    if (threshold_policy(policy)) {
      if (thresholds.fetch_threshold < costs.fetch_cost)
        throw ConfigError("fetch threshold below fetch cost");
      if (thresholds.push_threshold < costs.transmit_cost)
        throw ConfigError("push threshold below transmit cost");
      if (thresholds.max_fetch < 1) throw ConfigError("max fetch per period must be >= 1");
    }
  }
};

/// Disposition of the period's request, if any.
enum class Outcome { kNoRequest, kServedLocally, kServedByUnicast, kServedByMacro };

inline const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::kNoRequest: return "none";
    case Outcome::kServedLocally: return "local";
    case Outcome::kServedByUnicast: return "unicast";
    case Outcome::kServedByMacro: return "macro";
  }
  return "?";
}

/// Post-warmup counters of one run. total_requests counts every request,
/// including the ones satisfied from user local storage.
struct Metrics {
  std::uint64_t total_requests = 0;
  std::uint64_t served_locally = 0;
  std::uint64_t served_by_unicast = 0;
  std::uint64_t served_by_macro = 0;
  std::uint64_t pushes = 0;
  std::uint64_t fetched_contents = 0;
  Energy energy_arrived = 0;
  Energy energy_spent = 0;
  Energy energy_wasted = 0;
  std::uint64_t periods_observed = 0;
  Energy start_level = 0;  // battery at the start of the observation window
  Energy final_level = 0;

  bool eta_defined() const { return total_requests > 0; }

  /// Fraction of requests that fell back to the macro BS; NaN when no
  /// request was observed (a zero denominator must not read as success).
  double eta() const {
    if (!eta_defined()) return std::numeric_limits<double>::quiet_NaN();
    return static_cast<double>(served_by_macro) / static_cast<double>(total_requests);
  }

  friend bool operator==(const Metrics&, const Metrics&) = default;
};

/// Full record of one period; the engine emits one per step and the
/// replay/trace paths keep them all.
struct PeriodReport {
  std::uint64_t period = 0;  // 1-based
  Energy arrived = 0;
  Energy wasted = 0;
  std::optional<ContentId> request;
  Outcome outcome = Outcome::kNoRequest;
  Action action = Idle{};
  Energy battery_after = 0;
};

inline std::string action_to_string(const Action& action) {
  if (std::holds_alternative<Idle>(action)) return "idle";
  if (const auto* p = std::get_if<Push>(&action))
    return "push:" + std::to_string(p->id);
  if (const auto* u = std::get_if<Unicast>(&action))
    return "unicast:" + std::to_string(u->id);
  const auto& f = std::get<Fetch>(action);
  std::string out = "fetch:";
  for (std::size_t i = 0; i < f.ids.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(f.ids[i]);
  }
  return out;
}

/// One line per period, the same shape the replay dump uses.
inline std::string format_report(const PeriodReport& r) {
  std::string out = std::to_string(r.period);
  out += ' ';
  out += std::to_string(r.arrived);
  out += ' ';
  out += std::to_string(r.wasted);
  out += ' ';
  out += r.request ? std::to_string(*r.request) : "-";
  out += ' ';
  out += outcome_name(r.outcome);
  out += ' ';
  out += action_to_string(r.action);
  out += ' ';
  out += std::to_string(r.battery_after);
  return out;
}

namespace detail {

inline std::uint64_t fnv1a(const std::string& s, std::uint64_t h) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace detail

/// The per-period simulation loop. Event order within a period is fixed:
/// catalog birth-death, death pruning (structural), harvest, request
/// draw, local-storage check, policy decision, action execution, metric
/// accumulation. Requests and energy arrive "at the beginning" of the
/// period, so harvested energy can fund the same period's action.
class Engine {
 public:
  explicit Engine(const WorldConfig& config)
      : cfg_(config),
        cell_{Battery(config.initial_level, config.capacity),
              Catalog(config.birth_rate, config.death_rate)},
        zipf_(config.zipf_exponent),
        full_cache_(full_cache_policy(config.policy)),
        catalog_rng_(RngStream(config.seed).substream(0xca7)),
        energy_rng_(RngStream(config.seed).substream(0xe4e)),
        request_rng_(RngStream(config.seed).substream(0x4e9)) {
    cfg_.validate();
    cell_.catalog.seed(cfg_.resolved_initial_contents(), full_cache_);
  }

  const WorldConfig& config() const { return cfg_; }
  const CellState& cell() const { return cell_; }
  std::uint64_t period() const { return period_; }

  /// Toggle per-period invariant checking (used by the fuzz suites).
  void set_paranoid(bool value) { paranoid_ = value; }

  PeriodReport step() {
    ++period_;
    cell_.catalog.step(period_, catalog_rng_, full_cache_);
    const HarvestResult h = harvest(cell_.battery, cfg_.energy, energy_rng_);
    const std::optional<ContentId> request =
        sample_request(cell_.catalog, zipf_, RequestProcess{cfg_.request_probability},
                       request_rng_);
    return finish_period(h, request, std::nullopt);
  }

  /// One period with every stochastic draw replaced by scripted values.
  /// When `forced` is set the scheduler is bypassed and the scripted
  /// action executes instead.
  PeriodReport step_scripted(Energy arrival, std::optional<ContentId> request,
                             const std::optional<Action>& forced) {
    ++period_;
    cell_.catalog.step(period_, catalog_rng_);  // frozen rates draw nothing
    HarvestResult h;
    if (arrival > 0) {
      h.arrived = arrival;
      h.wasted = cell_.battery.deposit(arrival);
    }
    return finish_period(h, request, forced);
  }

  Metrics run() {
    const std::uint64_t warmup = cfg_.resolved_warmup();
    while (period_ < cfg_.horizon) {
      if (period_ == warmup) metrics_.start_level = cell_.battery.level();
      step();
    }
    metrics_.final_level = cell_.battery.level();
    return metrics_;
  }

  const Metrics& metrics() const { return metrics_; }

 private:
  PeriodReport finish_period(const HarvestResult& h, std::optional<ContentId> request,
                             const std::optional<Action>& forced) {
    Outcome outcome = Outcome::kNoRequest;
    std::optional<ContentId> over_the_air;
    if (request) {
      if (cell_.catalog.pushed(*request)) {
        outcome = Outcome::kServedLocally;  // counted, but not over the air
      } else {
        over_the_air = request;
        outcome = Outcome::kServedByMacro;  // unless a unicast serves it below
      }
    }
    const Energy level_at_decision = cell_.battery.level();
    const Action action =
        forced ? *forced
               : decide(cfg_.policy, PolicyInput{cell_, over_the_air, cfg_.costs},
                        cfg_.thresholds);
    execute(action, over_the_air, outcome);
    if (paranoid_ && !forced)
      check_period(over_the_air, outcome, action, level_at_decision);

    PeriodReport report{period_, h.arrived, h.wasted, request,
                        outcome,  action,    cell_.battery.level()};
    if (period_ > cfg_.resolved_warmup()) observe(report, action);
    return report;
  }

  void execute(const Action& action, const std::optional<ContentId>& over_the_air,
               Outcome& outcome) {
    if (const auto* f = std::get_if<Fetch>(&action)) {
      if (f->ids.empty()) throw std::logic_error("policy returned an empty fetch");
      if (full_cache_) throw std::logic_error("fetch under a full-cache policy");
      cell_.battery.spend(static_cast<Energy>(f->ids.size()) * cfg_.costs.fetch_cost);
      for (ContentId id : f->ids) cell_.catalog.mark_cached(id);
    } else if (const auto* p = std::get_if<Push>(&action)) {
      cell_.battery.spend(cfg_.costs.transmit_cost);
      cell_.catalog.mark_pushed(p->id);
    } else if (const auto* u = std::get_if<Unicast>(&action)) {
      if (!over_the_air || *over_the_air != u->id)
        throw std::logic_error("unicast of a content nobody requested");
      if (!cell_.catalog.cached(u->id))
        throw std::logic_error("unicast of an uncached content");
      cell_.battery.spend(cfg_.costs.transmit_cost);
      outcome = Outcome::kServedByUnicast;
    }
  }

  void observe(const PeriodReport& report, const Action& action) {
    ++metrics_.periods_observed;
    metrics_.energy_arrived += report.arrived;
    metrics_.energy_wasted += report.wasted;
    metrics_.energy_spent += action_cost(action, cfg_.costs);
    switch (report.outcome) {
      case Outcome::kNoRequest: break;
      case Outcome::kServedLocally:
        ++metrics_.total_requests;
        ++metrics_.served_locally;
        break;
      case Outcome::kServedByUnicast:
        ++metrics_.total_requests;
        ++metrics_.served_by_unicast;
        break;
      case Outcome::kServedByMacro:
        ++metrics_.total_requests;
        ++metrics_.served_by_macro;
        break;
    }
    if (std::holds_alternative<Push>(action)) ++metrics_.pushes;
    if (const auto* f = std::get_if<Fetch>(&action))
      metrics_.fetched_contents += f->ids.size();
  }

  void check_period(const std::optional<ContentId>& over_the_air, Outcome outcome,
                    const Action& action, Energy level_at_decision) const {
    if (over_the_air &&
        !(std::holds_alternative<Idle>(action) || std::holds_alternative<Unicast>(action)))
      throw std::logic_error("proactive action in a period with a pending request");
    if (outcome == Outcome::kServedByMacro) {
      const bool uncached = !cell_.catalog.cached(*over_the_air);
      const bool unaffordable = level_at_decision < cfg_.costs.transmit_cost;
      if (!uncached && !unaffordable)
        throw std::logic_error("macro fallback for a servable request");
    }
    if (cell_.catalog.pushed_count() > cell_.catalog.cached_count() ||
        cell_.catalog.cached_count() > cell_.catalog.size())
      throw std::logic_error("set containment violated");
    if (full_cache_ && cell_.catalog.cached_count() != cell_.catalog.size())
      throw std::logic_error("full-cache mode lost track of the catalog");
  }

  WorldConfig cfg_;
  CellState cell_;
  ZipfPopularity zipf_;
  bool full_cache_;
  bool paranoid_ = false;
  RngStream catalog_rng_;
  RngStream energy_rng_;
  RngStream request_rng_;
  std::uint64_t period_ = 0;
  Metrics metrics_;
};

/// One seeded run; deterministic for a fixed config.
inline Metrics run(const WorldConfig& config) { return Engine(config).run(); }

}  // namespace ehpush
