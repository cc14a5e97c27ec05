#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ehpush/catalog.hpp"
#include "ehpush/energy.hpp"
#include "ehpush/errors.hpp"

namespace ehpush {

/// The cell's knowledge of the world: its battery plus the active catalog,
/// which carries the cached and pushed marks (pushed ⊆ cached ⊆ active).
struct CellState {
  Battery battery;
  Catalog catalog;
};

// -- Actions ----------------------------------------------------------------

/// Download the listed contents into the cache; fetch_cost each.
struct Fetch {
  std::vector<ContentId> ids;  // popularity order, never empty
};
/// Broadcast one cached content to all users proactively.
struct Push {
  ContentId id = 0;
};
/// Serve one over-the-air request from the cache.
struct Unicast {
  ContentId id = 0;
};
struct Idle {};

using Action = std::variant<Idle, Fetch, Push, Unicast>;

inline Energy action_cost(const Action& action, const EnergyCosts& costs) {
  if (const auto* f = std::get_if<Fetch>(&action))
    return static_cast<Energy>(f->ids.size()) * costs.fetch_cost;
  if (std::holds_alternative<Push>(action) || std::holds_alternative<Unicast>(action))
    return costs.transmit_cost;
  return 0;
}

/// True iff the battery can pay for the action in full.
inline bool affordable(const Action& action, const Battery& battery,
                       const EnergyCosts& costs) {
  return battery.can_afford(action_cost(action, costs));
}

// -- Policies ---------------------------------------------------------------

/// Thresholds for the fetch-and-push policy. Thresholds below the action
/// cost would be meaningless, so construction rejects them.
struct ThresholdParams {
  Energy fetch_threshold = 1;   // battery floor to fetch
  Energy push_threshold = 2;    // battery floor to push
  std::size_t max_fetch = 3;    // contents per fetch action
};

/// What the scheduler sees at decision time. `request` is the pending
/// over-the-air request: a request already satisfied from user local
/// storage is filtered out upstream and never reaches the policy.
struct PolicyInput {
  const CellState& cell;
  std::optional<ContentId> request;
  EnergyCosts costs;
};

namespace detail {

inline std::optional<Action> serve_or_idle(const PolicyInput& in) {
  if (!in.request) return std::nullopt;
  // Request present: serve it if possible, otherwise do nothing this
  // period (the engine then routes the request to the macro BS).
  if (in.cell.catalog.cached(*in.request) &&
      in.cell.battery.can_afford(in.costs.transmit_cost))
    return Action{Unicast{*in.request}};
  return Action{Idle{}};
}

inline Action fetch_or_idle(const PolicyInput& in, const ThresholdParams& params) {
  const Catalog& cat = in.cell.catalog;
  if (!in.cell.battery.can_afford(params.fetch_threshold)) return Idle{};
  std::size_t k = std::min(params.max_fetch, cat.size() - cat.cached_count());
  if (in.costs.fetch_cost > 0)
    k = std::min(k, static_cast<std::size_t>(in.cell.battery.level() / in.costs.fetch_cost));
  if (k == 0) return Idle{};
  return Fetch{cat.top_uncached(k)};
}

inline Action push_or_idle(const PolicyInput& in, Energy threshold) {
  if (!in.cell.battery.can_afford(std::max(threshold, in.costs.transmit_cost)))
    return Idle{};
  if (auto id = in.cell.catalog.most_popular_unpushed_cached()) return Push{*id};
  return Idle{};
}

inline Action decide_threshold_impl(const PolicyInput& in, const ThresholdParams& params,
                                    bool push_enabled) {
  if (auto serve = serve_or_idle(in)) return *serve;
  const Catalog& cat = in.cell.catalog;
  const std::size_t m = cat.size();
  if (m == 0) return Idle{};
  const std::size_t cached = cat.cached_count();
  const std::size_t pushed = cat.pushed_count();
  // r1 = |pushed|/|cached| vs r2 = |cached|/|active|; an empty cache must
  // fill, and a full cache has nothing to fetch.
  bool fetch_branch;
  if (cached == 0)
    fetch_branch = true;
  else
    fetch_branch = static_cast<double>(pushed) / static_cast<double>(cached) >=
                   static_cast<double>(cached) / static_cast<double>(m);
  if (fetch_branch && cached == m) fetch_branch = false;
  if (fetch_branch) return fetch_or_idle(in, params);
  if (push_enabled) return push_or_idle(in, params.push_threshold);
  return Idle{};
}

}  // namespace detail

/// Reactive scheduler: unicast a requested cached content when the battery
/// allows, otherwise do nothing. Never fetches, never pushes.
inline Action decide_baseline(const PolicyInput& in) {
  if (auto serve = detail::serve_or_idle(in)) return *serve;
  return Idle{};
}

/// Energy-aware proactive push (cache assumed to track the full catalog):
/// serve an over-the-air request first; in request-free periods push the
/// most popular not-yet-pushed content while energy suffices.
inline Action decide_push_only(const PolicyInput& in) {
  if (auto serve = detail::serve_or_idle(in)) return *serve;
  return detail::push_or_idle(in, in.costs.transmit_cost);
}

/// Threshold fetch-and-push scheduler. Serving a pending request comes
/// first. Otherwise, when the pushed:cached ratio is at least the
/// cached:active ratio the cache is relatively starved, so fetch up to
/// max_fetch of the most popular uncached contents (battery permitting,
/// never below fetch_threshold); in the opposite regime push the most
/// popular unpushed cached content (battery >= push_threshold).
inline Action decide_threshold(const PolicyInput& in, const ThresholdParams& params) {
  return detail::decide_threshold_impl(in, params, /*push_enabled=*/true);
}

/// The fetch-only comparison scheduler: decide_threshold with the push
/// branch removed. The pushed set stays empty, so the fetch trigger fires
/// exactly when the cache is empty.
inline Action decide_no_push(const PolicyInput& in, const ThresholdParams& params) {
  return detail::decide_threshold_impl(in, params, /*push_enabled=*/false);
}

// -- Selection --------------------------------------------------------------

enum class PolicyKind { kBaseline, kPushOnly, kThreshold, kNoPush };

/// Policies whose cache mirrors the full catalog (no fetch economy).
inline bool full_cache_policy(PolicyKind kind) {
  return kind == PolicyKind::kBaseline || kind == PolicyKind::kPushOnly;
}

inline bool threshold_policy(PolicyKind kind) {
  return kind == PolicyKind::kThreshold || kind == PolicyKind::kNoPush;
}

inline std::string policy_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kBaseline: return "baseline";
    case PolicyKind::kPushOnly: return "push";
    case PolicyKind::kThreshold: return "threshold";
    case PolicyKind::kNoPush: return "no-push";
  }
  return "?";
}

inline PolicyKind parse_policy(const std::string& name) {
  if (name == "baseline") return PolicyKind::kBaseline;
  if (name == "push") return PolicyKind::kPushOnly;
  if (name == "threshold") return PolicyKind::kThreshold;
  if (name == "no-push") return PolicyKind::kNoPush;
  throw ConfigError("unknown policy '" + name +
                    "' (expected baseline|push|threshold|no-push)");
}

inline Action decide(PolicyKind kind, const PolicyInput& in,
                     const ThresholdParams& params) {
  switch (kind) {
    case PolicyKind::kBaseline: return decide_baseline(in);
    case PolicyKind::kPushOnly: return decide_push_only(in);
    case PolicyKind::kThreshold: return decide_threshold(in, params);
    case PolicyKind::kNoPush: return decide_no_push(in, params);
  }
  return Idle{};
}

}  // namespace ehpush
