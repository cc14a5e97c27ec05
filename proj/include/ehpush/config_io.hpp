#pragma once

#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ehpush/engine.hpp"
#include "ehpush/errors.hpp"
#include "ehpush/io.hpp"
#include "ehpush/sweep.hpp"

namespace ehpush {

namespace detail {

inline const std::set<std::string>& world_keys() {
  static const std::set<std::string> keys = {
      "harvest_prob",    "harvest_amount", "fetch_cost",     "transmit_cost",
      "battery_capacity", "initial_level",  "birth_rate",     "death_rate",
      "zipf_exponent",   "request_prob",   "policy",         "fetch_threshold",
      "push_threshold",  "max_fetch",      "horizon",        "warmup",
      "initial_contents", "seed"};
  return keys;
}

inline const std::set<std::string>& sweep_keys() {
  static const std::set<std::string> keys = {"axis", "values", "policies",
                                             "replications", "seed_base"};
  return keys;
}

template <typename T>
T get_number(const nlohmann::json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number()) throw ConfigError("config key '" + key + "' must be a number");
  return v.get<T>();
}

}  // namespace detail

/// Reads a world configuration from a flat JSON object of scalars.
/// Unknown keys are rejected so typos cannot silently fall back to
/// defaults; keys listed in `extra_allowed` (the sweep machinery) pass.
inline WorldConfig parse_world_config(const nlohmann::json& j,
                                      bool allow_sweep_keys = false) {
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  for (const auto& item : j.items()) {
    if (detail::world_keys().count(item.key())) continue;
    if (allow_sweep_keys && detail::sweep_keys().count(item.key())) continue;
    throw ConfigError("unknown config key '" + item.key() + "'");
  }
  WorldConfig config;
  config.energy.arrival_probability =
      detail::get_number(j, "harvest_prob", config.energy.arrival_probability);
  config.energy.arrival_amount =
      detail::get_number(j, "harvest_amount", config.energy.arrival_amount);
  config.costs.fetch_cost = detail::get_number(j, "fetch_cost", config.costs.fetch_cost);
  config.costs.transmit_cost =
      detail::get_number(j, "transmit_cost", config.costs.transmit_cost);
  config.capacity = detail::get_number(j, "battery_capacity", config.capacity);
  config.initial_level = detail::get_number(j, "initial_level", config.initial_level);
  config.birth_rate = detail::get_number(j, "birth_rate", config.birth_rate);
  config.death_rate = detail::get_number(j, "death_rate", config.death_rate);
  config.zipf_exponent = detail::get_number(j, "zipf_exponent", config.zipf_exponent);
  config.request_probability =
      detail::get_number(j, "request_prob", config.request_probability);
  if (j.contains("policy")) {
    if (!j.at("policy").is_string()) throw ConfigError("'policy' must be a string");
    config.policy = parse_policy(j.at("policy").get<std::string>());
  }
  config.thresholds.fetch_threshold =
      detail::get_number(j, "fetch_threshold", config.thresholds.fetch_threshold);
  config.thresholds.push_threshold =
      detail::get_number(j, "push_threshold", config.thresholds.push_threshold);
  config.thresholds.max_fetch =
      detail::get_number(j, "max_fetch", config.thresholds.max_fetch);
  config.horizon = detail::get_number(j, "horizon", config.horizon);
  if (j.contains("warmup"))
    config.warmup = detail::get_number<std::uint64_t>(j, "warmup", 0);
  if (j.contains("initial_contents"))
    config.initial_contents = detail::get_number<std::uint64_t>(j, "initial_contents", 0);
  config.seed = detail::get_number(j, "seed", config.seed);
  config.validate();
  return config;
}

inline SweepSpec parse_sweep_spec(const nlohmann::json& j) {
  SweepSpec spec;
  spec.base = parse_world_config(j, /*allow_sweep_keys=*/true);
  if (!j.contains("axis") || !j.at("axis").is_string())
    throw ConfigError("sweep config needs an 'axis' string");
  spec.axis = parse_axis(j.at("axis").get<std::string>());
  if (!j.contains("values") || !j.at("values").is_array())
    throw ConfigError("sweep config needs a 'values' array");
  for (const auto& v : j.at("values")) {
    if (!v.is_number()) throw ConfigError("'values' entries must be numbers");
    spec.values.push_back(v.get<double>());
  }
  if (!j.contains("policies") || !j.at("policies").is_array())
    throw ConfigError("sweep config needs a 'policies' array");
  for (const auto& p : j.at("policies")) {
    if (!p.is_string()) throw ConfigError("'policies' entries must be strings");
    spec.policies.push_back(parse_policy(p.get<std::string>()));
  }
  spec.replications = detail::get_number(j, "replications", spec.replications);
  spec.seed_base = detail::get_number(j, "seed_base", spec.seed_base);
  spec.validate();
  return spec;
}

inline nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
}

inline WorldConfig load_world_config(const std::string& path) {
  return parse_world_config(load_json(path));
}

inline SweepSpec load_sweep_spec(const std::string& path) {
  return parse_sweep_spec(load_json(path));
}

/// The fully resolved configuration, one "key = value" line each; embedded
/// in every emitted artifact so results are self-describing.
inline std::vector<std::string> describe_config(const WorldConfig& config) {
  std::vector<std::string> lines;
  lines.push_back("harvest_prob = " + format_double(config.energy.arrival_probability));
  lines.push_back("harvest_amount = " + std::to_string(config.energy.arrival_amount));
  lines.push_back("fetch_cost = " + std::to_string(config.costs.fetch_cost));
  lines.push_back("transmit_cost = " + std::to_string(config.costs.transmit_cost));
  lines.push_back("battery_capacity = " + std::to_string(config.capacity));
  lines.push_back("initial_level = " + std::to_string(config.initial_level));
  lines.push_back("birth_rate = " + format_double(config.birth_rate));
  lines.push_back("death_rate = " + format_double(config.death_rate));
  lines.push_back("zipf_exponent = " + format_double(config.zipf_exponent));
  lines.push_back("request_prob = " + format_double(config.request_probability));
  lines.push_back("policy = " + policy_name(config.policy));
  if (threshold_policy(config.policy)) {
    lines.push_back("fetch_threshold = " + std::to_string(config.thresholds.fetch_threshold));
    lines.push_back("push_threshold = " + std::to_string(config.thresholds.push_threshold));
    lines.push_back("max_fetch = " + std::to_string(config.thresholds.max_fetch));
  }
  lines.push_back("horizon = " + std::to_string(config.horizon));
  lines.push_back("warmup = " + std::to_string(config.resolved_warmup()));
  lines.push_back("initial_contents = " + std::to_string(config.resolved_initial_contents()));
  lines.push_back("seed = " + std::to_string(config.seed));
  return lines;
}

inline std::vector<std::string> describe_sweep(const SweepSpec& spec) {
  std::vector<std::string> lines;
  lines.push_back("axis = " + std::string(axis_name(spec.axis)));
  std::string vals = "values =";
  for (double v : spec.values) vals += " " + format_double(v);
  lines.push_back(vals);
  std::string pols = "policies =";
  for (PolicyKind p : spec.policies) pols += " " + policy_name(p);
  lines.push_back(pols);
  lines.push_back("replications = " + std::to_string(spec.replications));
  lines.push_back("seed_base = " + std::to_string(spec.seed_base));
  for (const std::string& line : describe_config(spec.base)) lines.push_back("base." + line);
  return lines;
}

}  // namespace ehpush
