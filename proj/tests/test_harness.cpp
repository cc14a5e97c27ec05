#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ehpush/cli.hpp"
#include "ehpush/config_io.hpp"
#include "ehpush/io.hpp"
#include "ehpush/stats.hpp"
#include "ehpush/sweep.hpp"

using namespace ehpush;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SweepSpec small_sweep() {
  SweepSpec spec;
  spec.base.birth_rate = 0.0;
  spec.base.death_rate = 0.0;
  spec.base.initial_contents = 5;
  spec.base.horizon = 4000;
  spec.base.warmup = 400;
  spec.axis = SweepAxis::kRequestProbability;
  spec.values = {0.2, 0.5, 0.8};
  spec.policies = {PolicyKind::kBaseline, PolicyKind::kPushOnly};
  spec.replications = 4;
  spec.seed_base = 11;
  return spec;
}

}  // namespace

TEST_CASE("statistics utilities") {
  REQUIRE(stats::t_quantile_975(19) == Catch::Approx(2.093));
  REQUIRE(stats::t_quantile_975(1) == Catch::Approx(12.706));
  REQUIRE(stats::t_quantile_975(500) == Catch::Approx(1.98));
  REQUIRE(stats::ci95_halfwidth({1.0}) == 0.0);
  // hand-checked: sd of {1,2,3} is 1, CI = 4.303 / sqrt(3)
  REQUIRE(stats::ci95_halfwidth({1.0, 2.0, 3.0}) ==
          Catch::Approx(4.303 / std::sqrt(3.0)).epsilon(1e-9));
  REQUIRE(stats::spearman_rho({1, 2, 3, 4}, {10, 20, 30, 40}) == Catch::Approx(1.0));
  REQUIRE(stats::spearman_rho({1, 2, 3, 4}, {9, 7, 5, 3}) == Catch::Approx(-1.0));
  // one adjacent swap in nine points stays close to one
  REQUIRE(stats::spearman_rho({1, 2, 3, 4, 5, 6, 7, 8, 9},
                              {1, 2, 4, 3, 5, 6, 7, 8, 9}) ==
          Catch::Approx(0.9833333).epsilon(1e-4));
  REQUIRE_THROWS_AS(stats::spearman_rho({1, 1}, {2, 3}), PreconditionError);
}

TEST_CASE("single-cell sweep wraps one run") {
  SweepSpec spec = small_sweep();
  spec.values = {0.5};
  spec.policies = {PolicyKind::kBaseline};
  spec.replications = 1;
  const SweepResult result = run_sweep(spec);
  REQUIRE(result.cells.size() == 1);
  const Metrics solo = run(spec.cell_config(0.5, PolicyKind::kBaseline, 0));
  REQUIRE(result.cells[0].eta_mean == solo.eta());
  REQUIRE(result.cells[0].eta_ci95 == 0.0);
  REQUIRE(result.cells[0].mean_macro == static_cast<double>(solo.served_by_macro));
}

TEST_CASE("sweeps are deterministic and ordered") {
  const SweepSpec spec = small_sweep();
  const SweepResult a = run_sweep(spec);
  const SweepResult b = run_sweep(spec);
  REQUIRE(a.cells.size() == 6);
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    REQUIRE(a.cells[i].value == b.cells[i].value);
    REQUIRE(a.cells[i].policy == b.cells[i].policy);
    REQUIRE(a.cells[i].eta_samples == b.cells[i].eta_samples);
  }
  // cells ordered by (value, policy)
  REQUIRE(a.cells[0].value == 0.2);
  REQUIRE(a.cells[0].policy == PolicyKind::kBaseline);
  REQUIRE(a.cells[1].policy == PolicyKind::kPushOnly);
  REQUIRE(a.cells[4].value == 0.8);
}

TEST_CASE("sweep validation names the offending cell") {
  SweepSpec spec = small_sweep();
  spec.base.policy = PolicyKind::kThreshold;
  spec.policies = {PolicyKind::kThreshold};
  spec.axis = SweepAxis::kPushThreshold;
  spec.values = {1};  // below the transmit cost of 2
  try {
    spec.validate();
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    REQUIRE(what.find("push_threshold=1") != std::string::npos);
    REQUIRE(what.find("policy=threshold") != std::string::npos);
  }
  SweepSpec fractional = small_sweep();
  fractional.axis = SweepAxis::kBatteryCapacity;
  fractional.values = {2.5};
  REQUIRE_THROWS_AS(fractional.validate(), ConfigError);
}

TEST_CASE("csv emission and round trip") {
  const SweepResult result = run_sweep(small_sweep());
  const auto path = temp_file("ehpush_sweep_test.csv");
  emit_csv(result, path.string(), {"alpha = 1", "beta = two"});
  const std::string text = slurp(path);
  // non-comment lines: header + one per cell
  std::istringstream in(text);
  std::string line;
  std::size_t comments = 0, data_lines = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '#')
      ++comments;
    else
      ++data_lines;
  }
  REQUIRE(comments == 2);
  REQUIRE(data_lines == 1 + result.cells.size());

  const CsvTable table = read_csv(path.string());
  REQUIRE(table.header.size() == 13);
  REQUIRE(table.header[0] == "axis");
  REQUIRE(table.rows.size() == result.cells.size());
  for (std::size_t i = 0; i < result.cells.size(); ++i) {
    REQUIRE(table.rows[i][0] == "request_prob");
    REQUIRE(parse_double(table.rows[i][1]) == result.cells[i].value);
    REQUIRE(table.rows[i][2] == policy_name(result.cells[i].policy));
    REQUIRE(parse_double(table.rows[i][3]) == result.cells[i].eta_mean);
    REQUIRE(parse_double(table.rows[i][4]) == result.cells[i].eta_ci95);
    REQUIRE(parse_double(table.rows[i][7]) == result.cells[i].mean_macro);
  }
  std::filesystem::remove(path);
}

TEST_CASE("svg plot structure") {
  const SweepResult result = run_sweep(small_sweep());
  const auto path = temp_file("ehpush_plot_test.svg");
  emit_plot(result, path.string(), {"config echo"});
  const std::string svg = slurp(path);
  std::size_t polylines = 0, pos = 0;
  while ((pos = svg.find("<polyline", pos)) != std::string::npos) {
    ++polylines;
    pos += 9;
  }
  REQUIRE(polylines == 2);  // one per policy
  // each polyline holds one vertex per axis value
  pos = svg.find("points=\"");
  const std::string points = svg.substr(pos + 8, svg.find('"', pos + 8) - pos - 8);
  REQUIRE(std::count(points.begin(), points.end(), ',') == 3);
  REQUIRE(svg.find("<!-- config echo -->") != std::string::npos);
  REQUIRE(svg.find("request_prob") != std::string::npos);
  std::filesystem::remove(path);

  SECTION("single point degenerates to markers") {
    SweepSpec spec = small_sweep();
    spec.values = {0.5};
    const SweepResult one = run_sweep(spec);
    emit_plot(one, path.string());
    const std::string single = slurp(path);
    REQUIRE(single.find("<polyline") == std::string::npos);
    REQUIRE(single.find("<circle") != std::string::npos);
    std::filesystem::remove(path);
  }
  SECTION("unsorted axis values are rejected") {
    SweepResult shuffled = result;
    std::swap(shuffled.cells[0].value, shuffled.cells[4].value);
    REQUIRE_THROWS_AS(emit_plot(shuffled, path.string()), PreconditionError);
  }
}

TEST_CASE("config files parse strictly") {
  const nlohmann::json good = {
      {"harvest_prob", 0.5}, {"harvest_amount", 3},   {"transmit_cost", 2},
      {"battery_capacity", 10}, {"birth_rate", 0.0},  {"death_rate", 0.0},
      {"initial_contents", 4},  {"request_prob", 0.75}, {"policy", "push"},
      {"horizon", 1000},        {"warmup", 100},        {"seed", 9}};
  const WorldConfig config = parse_world_config(good);
  REQUIRE(config.policy == PolicyKind::kPushOnly);
  REQUIRE(config.capacity == 10);
  REQUIRE(config.resolved_warmup() == 100);
  REQUIRE(config.seed == 9);

  nlohmann::json typo = good;
  typo["capcity"] = 4;
  REQUIRE_THROWS_AS(parse_world_config(typo), ConfigError);
  nlohmann::json bad_policy = good;
  bad_policy["policy"] = "psuh";
  REQUIRE_THROWS_AS(parse_world_config(bad_policy), ConfigError);
  nlohmann::json bad_type = good;
  bad_type["horizon"] = "many";
  REQUIRE_THROWS_AS(parse_world_config(bad_type), ConfigError);

  nlohmann::json sweep = good;
  sweep["axis"] = "request_prob";
  sweep["values"] = {0.1, 0.5};
  sweep["policies"] = {"baseline", "push"};
  sweep["replications"] = 3;
  sweep["seed_base"] = 77;
  const SweepSpec spec = parse_sweep_spec(sweep);
  REQUIRE(spec.axis == SweepAxis::kRequestProbability);
  REQUIRE(spec.values.size() == 2);
  REQUIRE(spec.policies[1] == PolicyKind::kPushOnly);
  REQUIRE(spec.replications == 3);
  // sweep keys are rejected in a plain world config
  REQUIRE_THROWS_AS(parse_world_config(sweep), ConfigError);
}

TEST_CASE("cli drives run, sweep and replay") {
  const auto config_path = temp_file("ehpush_cli_world.json");
  {
    std::ofstream out(config_path);
    out << R"({"harvest_prob": 0.5, "harvest_amount": 3, "transmit_cost": 2,
               "battery_capacity": 6, "birth_rate": 0, "death_rate": 0,
               "initial_contents": 3, "request_prob": 0.6, "policy": "push",
               "horizon": 5000, "warmup": 500, "seed": 3})";
  }
  SECTION("run prints metrics and echoes the config") {
    std::ostringstream out;
    REQUIRE(cli::run_cli({"run", "--config", config_path.string()}, out) == 0);
    const auto j = nlohmann::json::parse(out.str());
    REQUIRE(j["metrics"]["total_requests"].get<std::uint64_t>() > 0);
    REQUIRE(j["config"]["policy"] == "push");
    // seed override changes the outcome deterministically
    std::ostringstream out2, out3;
    REQUIRE(cli::run_cli({"run", "--config", config_path.string(), "--seed", "8"},
                         out2) == 0);
    REQUIRE(cli::run_cli({"run", "--config", config_path.string(), "--seed", "8"},
                         out3) == 0);
    REQUIRE(out2.str() == out3.str());
    REQUIRE(out.str() != out2.str());
  }
  SECTION("sweep writes byte-identical artifacts on reruns") {
    const auto sweep_path = temp_file("ehpush_cli_sweep.json");
    {
      std::ofstream out(sweep_path);
      out << R"({"harvest_prob": 0.5, "harvest_amount": 3, "transmit_cost": 2,
                 "battery_capacity": 6, "birth_rate": 0, "death_rate": 0,
                 "initial_contents": 3, "request_prob": 0.6,
                 "horizon": 3000, "warmup": 300,
                 "axis": "request_prob", "values": [0.2, 0.6],
                 "policies": ["baseline", "push"], "replications": 2,
                 "seed_base": 5})";
    }
    const auto out_dir = temp_file("ehpush_cli_out");
    std::ostringstream sink;
    REQUIRE(cli::run_cli({"sweep", "--config", sweep_path.string(), "--out",
                          out_dir.string(), "--format", "both"},
                         sink) == 0);
    const auto csv_path = out_dir / "ehpush_cli_sweep.csv";
    const auto svg_path = out_dir / "ehpush_cli_sweep.svg";
    const std::string first_csv = slurp(csv_path);
    const std::string first_svg = slurp(svg_path);
    REQUIRE(cli::run_cli({"sweep", "--config", sweep_path.string(), "--out",
                          out_dir.string(), "--format", "both"},
                         sink) == 0);
    REQUIRE(slurp(csv_path) == first_csv);
    REQUIRE(slurp(svg_path) == first_svg);
    // the resolved configuration is embedded
    REQUIRE(first_csv.find("# axis = request_prob") != std::string::npos);
    REQUIRE(first_csv.find("# base.seed") != std::string::npos);
    std::filesystem::remove_all(out_dir);
    std::filesystem::remove(sweep_path);
  }
  SECTION("replay dumps the scripted trace") {
    const auto scn_path = temp_file("ehpush_cli_scn.txt");
    {
      std::ofstream out(scn_path);
      out << "# tiny script\n1 3 -\n2 0 1\n";
    }
    std::ostringstream out;
    REQUIRE(cli::run_cli({"replay", scn_path.string(), "--config",
                          config_path.string(), "--use-policy"},
                         out) == 0);
    // two periods, second one served over the air or locally
    const std::string text = out.str();
    REQUIRE(std::count(text.begin(), text.end(), '\n') == 2);
    REQUIRE(text.find("1 3 0 -") == 0);
    std::filesystem::remove(scn_path);
  }
  SECTION("errors map to exit codes") {
    std::ostringstream out, err;
    REQUIRE(cli::run_cli({"run", "--config", "/nonexistent.json"}, out, err) == 1);
    REQUIRE(cli::run_cli({"run", "--config", config_path.string(), "--bogus"}, out,
                         err) == 1);
    REQUIRE(cli::run_cli({"frobnicate"}, out, err) == 1);
    REQUIRE(cli::run_cli({"replay", "/nonexistent.scn", "--config",
                          config_path.string()},
                         out, err) == 2);
    std::ostringstream help;
    REQUIRE(cli::run_cli({"--help"}, help) == 0);
    REQUIRE(help.str().find("sweep") != std::string::npos);
  }
  std::filesystem::remove(config_path);
}

TEST_CASE("describe_config is complete and stable") {
  WorldConfig c;
  c.policy = PolicyKind::kThreshold;
  const auto lines = describe_config(c);
  bool saw_thresholds = false, saw_seed = false;
  for (const std::string& line : lines) {
    if (line.find("fetch_threshold") != std::string::npos) saw_thresholds = true;
    if (line.find("seed = ") != std::string::npos) saw_seed = true;
  }
  REQUIRE(saw_thresholds);
  REQUIRE(saw_seed);
}
