#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ehpush/engine.hpp"
#include "ehpush/errors.hpp"

namespace ehpush {

/// One scripted period. Anything omitted defaults to "nothing happens":
/// no arrival, no request, and (in forced mode) an idle action.
struct ScenarioPeriod {
  std::uint64_t period = 0;  // 1-based
  Energy arrived = 0;
  std::optional<ContentId> request;
  std::optional<Action> forced;
};

/// A deterministic replay script: per period, the exact energy arrival,
/// the exact request, and optionally the action the cell must take.
struct Scenario {
  std::vector<ScenarioPeriod> periods;  // strictly ascending period index

  std::uint64_t horizon() const {
    return periods.empty() ? 0 : periods.back().period;
  }
};

namespace detail {

inline Action parse_forced_action(const std::string& token, std::size_t line_no) {
  auto fail = [&](const std::string& why) -> Action {
    throw ScenarioError("line " + std::to_string(line_no) + ": " + why);
  };
  if (token == "idle") return Idle{};
  const auto colon = token.find(':');
  if (colon == std::string::npos)
    return fail("bad action '" + token + "' (idle|fetch:ID[,ID...]|push:ID|unicast:ID)");
  const std::string verb = token.substr(0, colon);
  const std::string args = token.substr(colon + 1);
  try {
    if (verb == "push") return Push{std::stoull(args)};
    if (verb == "unicast") return Unicast{std::stoull(args)};
    if (verb == "fetch") {
      Fetch fetch;
      std::stringstream ss(args);
      std::string piece;
      while (std::getline(ss, piece, ',')) fetch.ids.push_back(std::stoull(piece));
      if (fetch.ids.empty()) return fail("fetch with no content ids");
      return fetch;
    }
  } catch (const std::exception&) {
    return fail("bad content id in '" + token + "'");
  }
  return fail("unknown action verb '" + verb + "'");
}

}  // namespace detail

/// Parses the scenario text format: one line per period,
///   <period> <energy_arrived> <request_id|-> [<forced_action>]
/// with '#' starting a comment line. Periods must be strictly ascending.
inline Scenario parse_scenario(std::istream& in) {
  Scenario scenario;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    ScenarioPeriod sp;
    std::string request_token, action_token;
    long long period = 0, arrived = 0;
    if (!(fields >> period >> arrived >> request_token))
      throw ScenarioError("line " + std::to_string(line_no) +
                          ": expected <period> <energy> <request|->");
    if (period < 1)
      throw ScenarioError("line " + std::to_string(line_no) + ": periods are 1-based");
    if (arrived < 0)
      throw ScenarioError("line " + std::to_string(line_no) + ": negative energy arrival");
    sp.period = static_cast<std::uint64_t>(period);
    sp.arrived = arrived;
    if (request_token != "-") {
      try {
        sp.request = std::stoull(request_token);
      } catch (const std::exception&) {
        throw ScenarioError("line " + std::to_string(line_no) + ": bad request id '" +
                            request_token + "'");
      }
    }
    if (fields >> action_token)
      sp.forced = detail::parse_forced_action(action_token, line_no);
    std::string extra;
    if (fields >> extra)
      throw ScenarioError("line " + std::to_string(line_no) + ": trailing junk '" +
                          extra + "'");
    if (!scenario.periods.empty() && sp.period <= scenario.periods.back().period)
      throw ScenarioError("line " + std::to_string(line_no) +
                          ": period indices must be strictly ascending");
    scenario.periods.push_back(sp);
  }
  return scenario;
}

inline Scenario parse_scenario(const std::string& text) {
  std::istringstream in(text);
  return parse_scenario(in);
}

struct ReplayResult {
  std::vector<PeriodReport> trace;
  Metrics metrics;
};

/// Replays a script through the engine with all stochastic draws replaced
/// by the scripted values. In forced mode (use_policy == false) the
/// scripted actions execute verbatim; in policy mode the configured
/// scheduler decides and any forced columns are ignored. The catalog must
/// be frozen (zero birth and death rates): the script has no way to
/// describe catalog churn.
inline ReplayResult replay_scenario(const WorldConfig& config, const Scenario& scenario,
                                    bool use_policy = false) {
  if (scenario.periods.empty()) return {};
  if (config.birth_rate != 0.0 || config.death_rate != 0.0)
    throw ScenarioError("replay requires a frozen catalog (birth and death rates 0)");
  WorldConfig cfg = config;
  cfg.horizon = scenario.horizon();
  cfg.warmup = 0;
  Engine engine(cfg);

  ReplayResult result;
  std::size_t next = 0;
  for (std::uint64_t t = 1; t <= cfg.horizon; ++t) {
    ScenarioPeriod sp;
    if (next < scenario.periods.size() && scenario.periods[next].period == t)
      sp = scenario.periods[next++];
    if (sp.request && !engine.cell().catalog.alive(*sp.request))
      throw ScenarioError("period " + std::to_string(t) + ": unknown content id " +
                          std::to_string(*sp.request));
    try {
      result.trace.push_back(engine.step_scripted(
          sp.arrived, sp.request, use_policy ? std::nullopt : sp.forced));
    } catch (const InsufficientEnergy& e) {
      throw ScenarioError("period " + std::to_string(t) +
                          " violates energy causality: " + e.what());
    } catch (const std::logic_error& e) {
      throw ScenarioError("period " + std::to_string(t) + ": " + e.what());
    }
  }
  result.metrics = engine.metrics();
  result.metrics.start_level = config.initial_level;
  result.metrics.final_level = engine.cell().battery.level();
  return result;
}

/// Energy accounting of a script if nothing were cached or pushed ahead of
/// demand: every request but the final one answered by unicast, its
/// content fetched on first use, while the scripted energy income sits in
/// the battery untouched.
struct Counterfactual {
  Energy unicast_demand = 0;      // transmit cost x served requests
  Energy fetch_demand = 0;        // fetch cost x distinct contents
  Energy total_demand = 0;
  Energy budget = 0;              // initial level + all scripted arrivals
  Energy wasted_if_unspent = 0;   // overflow when the budget is never drawn down
};

inline Counterfactual scenario_counterfactual(const WorldConfig& config,
                                              const Scenario& scenario) {
  Counterfactual c;
  std::vector<ContentId> requests;
  for (const ScenarioPeriod& sp : scenario.periods)
    if (sp.request) requests.push_back(*sp.request);
  if (!requests.empty()) requests.pop_back();  // the final request is excluded
  const std::set<ContentId> distinct(requests.begin(), requests.end());
  c.unicast_demand = static_cast<Energy>(requests.size()) * config.costs.transmit_cost;
  c.fetch_demand = static_cast<Energy>(distinct.size()) * config.costs.fetch_cost;
  c.total_demand = c.unicast_demand + c.fetch_demand;

  Battery idle_battery(config.initial_level, config.capacity);
  c.budget = config.initial_level;
  for (const ScenarioPeriod& sp : scenario.periods) {
    c.budget += sp.arrived;
    c.wasted_if_unspent += idle_battery.deposit(sp.arrived);
  }
  return c;
}

}  // namespace ehpush
