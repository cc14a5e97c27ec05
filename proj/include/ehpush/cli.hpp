#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ehpush/config_io.hpp"
#include "ehpush/engine.hpp"
#include "ehpush/errors.hpp"
#include "ehpush/io.hpp"
#include "ehpush/scenario.hpp"
#include "ehpush/sweep.hpp"
#include "ehpush/validation.hpp"

namespace ehpush {
namespace cli {

inline nlohmann::json metrics_to_json(const Metrics& m) {
  nlohmann::json j;
  j["total_requests"] = m.total_requests;
  j["served_locally"] = m.served_locally;
  j["served_by_unicast"] = m.served_by_unicast;
  j["served_by_macro"] = m.served_by_macro;
  j["pushes"] = m.pushes;
  j["fetched_contents"] = m.fetched_contents;
  j["energy_arrived"] = m.energy_arrived;
  j["energy_spent"] = m.energy_spent;
  j["energy_wasted"] = m.energy_wasted;
  j["periods_observed"] = m.periods_observed;
  j["eta_defined"] = m.eta_defined();
  if (m.eta_defined())
    j["eta"] = m.eta();
  else
    j["eta"] = "undefined";
  return j;
}

inline int run_command(const std::string& config_path, std::uint64_t* seed_override,
                       std::ostream& out) {
  WorldConfig config = load_world_config(config_path);
  if (seed_override) config.seed = *seed_override;
  const Metrics metrics = run(config);
  nlohmann::json j;
  for (const std::string& line : describe_config(config)) {
    const auto eq = line.find(" = ");
    j["config"][line.substr(0, eq)] = line.substr(eq + 3);
  }
  j["metrics"] = metrics_to_json(metrics);
  out << j.dump(2) << "\n";
  return 0;
}

inline int sweep_command(const std::string& config_path, std::uint64_t* seed_override,
                         std::uint32_t* reps_override, const std::string& out_dir,
                         const std::string& format, std::ostream& out) {
  SweepSpec spec = load_sweep_spec(config_path);
  if (seed_override) spec.seed_base = *seed_override;
  if (reps_override) spec.replications = *reps_override;
  spec.validate();
  const SweepResult result = run_sweep(spec);
  const std::vector<std::string> echo = describe_sweep(spec);

  std::filesystem::path dir(out_dir.empty() ? "." : out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "'");
  const std::string stem = std::filesystem::path(config_path).stem().string();

  if (format == "csv" || format == "both") {
    const std::string path = (dir / (stem + ".csv")).string();
    emit_csv(result, path, echo);
    out << "wrote " << path << "\n";
  }
  if (format == "plot" || format == "both") {
    const std::string path = (dir / (stem + ".svg")).string();
    emit_plot(result, path, echo);
    out << "wrote " << path << "\n";
  }
  return 0;
}

inline int replay_command(const std::string& scenario_path, const std::string& config_path,
                          bool use_policy, std::ostream& out) {
  std::ifstream in(scenario_path);
  if (!in) throw ScenarioError("cannot open scenario file '" + scenario_path + "'");
  const Scenario scenario = parse_scenario(in);
  const WorldConfig config = load_world_config(config_path);
  const ReplayResult result = replay_scenario(config, scenario, use_policy);
  for (const PeriodReport& report : result.trace) out << format_report(report) << "\n";
  return 0;
}

inline int selftest_command(std::ostream& out) {
  const validation::SelftestReport report = validation::run_selftest();
  for (const auto& line : report.lines)
    out << (line.ok ? "[PASS] " : "[FAIL] ") << line.text << "\n";
  out << (report.ok() ? "selftest: all checks passed" : "selftest: FAILURES") << "\n";
  return report.ok() ? 0 : 3;
}

/// Entry point behind main(); also driven in-process by the tests.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"energy-harvesting small-cell caching and push simulator"};
  app.require_subcommand(1);

  std::string config_path, scenario_path;
  std::string out_dir = ".";
  std::string format = "both";
  std::uint64_t seed = 0;
  std::uint32_t reps = 0;
  bool use_policy = false;

  CLI::App* cmd_run = app.add_subcommand("run", "single run, metrics to stdout");
  cmd_run->add_option("--config", config_path, "world config (JSON)")->required();
  CLI::Option* run_seed = cmd_run->add_option("--seed", seed, "override the seed");

  CLI::App* cmd_sweep = app.add_subcommand("sweep", "parameter sweep to CSV/plot");
  cmd_sweep->add_option("--config", config_path, "sweep config (JSON)")->required();
  CLI::Option* sweep_seed = cmd_sweep->add_option("--seed", seed, "override seed_base");
  CLI::Option* sweep_reps =
      cmd_sweep->add_option("--reps", reps, "override replications");
  cmd_sweep->add_option("--out", out_dir, "output directory (default .)");
  cmd_sweep->add_option("--format", format, "csv|plot|both (default both)")
      ->check(CLI::IsMember({"csv", "plot", "both"}));

  CLI::App* cmd_replay = app.add_subcommand("replay", "replay a scenario script");
  cmd_replay->add_option("scenario", scenario_path, "scenario file")->required();
  cmd_replay->add_option("--config", config_path, "world config (JSON)")->required();
  cmd_replay->add_flag("--use-policy", use_policy,
                       "let the configured policy decide (ignore forced actions)");

  app.add_subcommand("selftest", "oracle-vs-engine agreement suite");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 1;
  }

  try {
    if (app.got_subcommand("run"))
      return run_command(config_path, run_seed->count() ? &seed : nullptr, out);
    if (app.got_subcommand("sweep"))
      return sweep_command(config_path, sweep_seed->count() ? &seed : nullptr,
                           sweep_reps->count() ? &reps : nullptr, out_dir, format, out);
    if (app.got_subcommand("replay"))
      return replay_command(scenario_path, config_path, use_policy, out);
    if (app.got_subcommand("selftest")) return selftest_command(out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace cli
}  // namespace ehpush
