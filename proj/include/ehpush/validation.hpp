#pragma once

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "ehpush/engine.hpp"
#include "ehpush/io.hpp"
#include "ehpush/oracle.hpp"
#include "ehpush/rng.hpp"
#include "ehpush/stats.hpp"
#include "ehpush/sweep.hpp"

namespace ehpush {
namespace validation {

/// World that realizes a ChainSpec exactly: frozen single-content catalog,
/// nothing pushed, reactive baseline, so every request needs a unicast and
/// the battery is the only state.
inline WorldConfig world_from_chain(const oracle::ChainSpec& spec, std::uint64_t horizon,
                                    std::uint64_t warmup, std::uint64_t seed) {
  WorldConfig config;
  config.energy = {spec.arrival_probability, spec.arrival_amount};
  config.costs = {1, spec.service_cost};
  config.capacity = spec.capacity;
  config.initial_level = 0;
  config.birth_rate = 0.0;
  config.death_rate = 0.0;
  config.zipf_exponent = 1.0;
  config.request_probability = spec.request_probability;
  config.policy = PolicyKind::kBaseline;
  config.horizon = horizon;
  config.warmup = warmup;
  config.initial_contents = 1;
  config.seed = seed;
  return config;
}

/// Deterministic battery of randomized chain specs.
inline std::vector<oracle::ChainSpec> make_chain_specs(std::size_t count,
                                                       std::uint64_t seed) {
  std::vector<oracle::ChainSpec> specs;
  RngStream rng(seed);
  while (specs.size() < count) {
    oracle::ChainSpec spec;
    spec.service_cost = 1 + static_cast<Energy>(rng.uniform_below(4));
    spec.capacity = spec.service_cost + static_cast<Energy>(rng.uniform_below(17));
    spec.arrival_amount = 1 + static_cast<Energy>(rng.uniform_below(8));
    spec.arrival_probability = 0.05 + 0.9 * rng.uniform();
    spec.request_probability = 0.05 + 0.95 * rng.uniform();
    specs.push_back(spec);
  }
  return specs;
}

struct AgreementLine {
  bool ok = false;
  std::string text;
};

/// Monte Carlo eta under the baseline vs the exact stationary value.
///
/// Request outcomes within one run sample an autocorrelated battery
/// chain, so the binomial standard error understates single-run noise
/// (measured inflation around 2x on slow-mixing chains). The estimate is
/// therefore the mean over independent seeded replications, tested at
/// three standard errors of that mean, with the pooled binomial SE kept
/// as a floor and a 3/N cushion so near-zero exact values admit the odd
/// single macro event.
inline AgreementLine check_chain_agreement(const oracle::ChainSpec& spec,
                                           std::uint64_t periods, std::uint64_t warmup,
                                           std::uint64_t seed,
                                           std::uint32_t replications = 10) {
  const double exact = oracle::exact_eta_baseline(spec);
  std::vector<double> etas(replications);
  std::vector<std::uint64_t> requests(replications);
  detail::parallel_for(replications, [&](std::size_t r) {
    const Metrics m =
        run(world_from_chain(spec, periods + warmup, warmup, seed + r));
    etas[r] = m.eta();
    requests[r] = m.total_requests;
  });
  double n = 0.0;
  bool defined = true;
  for (std::size_t r = 0; r < replications; ++r) {
    n += static_cast<double>(requests[r]);
    defined = defined && requests[r] > 0;
  }
  const double mc = stats::mean(etas);
  const double se_mean = replications > 1
                             ? std::sqrt(stats::sample_variance(etas) /
                                         static_cast<double>(replications))
                             : 0.0;
  const double tol = 3.0 * std::max(se_mean, stats::binomial_se(exact, n)) +
                     3.0 / std::max(1.0, n);
  AgreementLine line;
  line.ok = defined && std::fabs(mc - exact) <= tol;
  std::ostringstream os;
  os << "chain Emax=" << spec.capacity << " Ep=" << spec.service_cost
     << " Eh=" << spec.arrival_amount << " p=" << format_double(spec.arrival_probability)
     << " pr=" << format_double(spec.request_probability) << ": exact="
     << format_double(exact) << " mc=" << format_double(mc)
     << " |diff|=" << format_double(std::fabs(mc - exact)) << " tol=" << format_double(tol);
  line.text = os.str();
  return line;
}

/// Tiny frozen worlds with every policy flavor; the exhaustive oracle can
/// enumerate each of these exactly.
inline std::vector<WorldConfig> tiny_configs() {
  std::vector<WorldConfig> configs;
  {
    // single content, saturated requests, fair-coin energy
    WorldConfig c;
    c.energy = {0.5, 2};
    c.costs = {1, 2};
    c.capacity = 2;
    c.initial_level = 0;
    c.birth_rate = c.death_rate = 0.0;
    c.zipf_exponent = 1.0;
    c.request_probability = 1.0;
    c.policy = PolicyKind::kBaseline;
    c.horizon = 2;
    c.warmup = 0;
    c.initial_contents = 1;
    configs.push_back(c);
  }
  {
    // push-only with certain energy income
    WorldConfig c;
    c.energy = {1.0, 2};
    c.costs = {1, 2};
    c.capacity = 4;
    c.initial_level = 0;
    c.birth_rate = c.death_rate = 0.0;
    c.zipf_exponent = 1.0;
    c.request_probability = 1.0;
    c.policy = PolicyKind::kPushOnly;
    c.horizon = 3;
    c.warmup = 0;
    c.initial_contents = 1;
    configs.push_back(c);
  }
  {
    // three contents, skewed popularity, push-only
    WorldConfig c;
    c.energy = {0.4, 3};
    c.costs = {1, 2};
    c.capacity = 6;
    c.initial_level = 2;
    c.birth_rate = c.death_rate = 0.0;
    c.zipf_exponent = 1.7;
    c.request_probability = 0.6;
    c.policy = PolicyKind::kPushOnly;
    c.horizon = 8;
    c.warmup = 2;
    c.initial_contents = 3;
    configs.push_back(c);
  }
  {
    // threshold fetch-and-push from an empty cache
    WorldConfig c;
    c.energy = {0.5, 3};
    c.costs = {1, 2};
    c.capacity = 6;
    c.initial_level = 1;
    c.birth_rate = c.death_rate = 0.0;
    c.zipf_exponent = 1.0;
    c.request_probability = 0.5;
    c.policy = PolicyKind::kThreshold;
    c.thresholds = {2, 2, 2};
    c.horizon = 10;
    c.warmup = 0;
    c.initial_contents = 3;
    configs.push_back(c);
  }
  {
    // fetch-only comparison policy
    WorldConfig c;
    c.energy = {0.6, 2};
    c.costs = {1, 2};
    c.capacity = 5;
    c.initial_level = 0;
    c.birth_rate = c.death_rate = 0.0;
    c.zipf_exponent = 0.0;
    c.request_probability = 0.8;
    c.policy = PolicyKind::kNoPush;
    c.thresholds = {1, 2, 2};
    c.horizon = 9;
    c.warmup = 1;
    c.initial_contents = 2;
    configs.push_back(c);
  }
  return configs;
}

/// Replicated engine runs vs exact expectations, counter by counter.
/// Tolerance per counter: three standard errors from the across-replication
/// sample variance, plus a small cushion for branches too rare to appear
/// in the sample at all.
inline AgreementLine check_transient_agreement(const WorldConfig& config,
                                               std::uint32_t replications,
                                               std::uint64_t seed_base) {
  const oracle::ExactExpectations exact = oracle::exhaustive_eta(config);
  struct Counter {
    const char* name;
    double exact_value;
    std::vector<double> samples;
  };
  std::vector<Counter> counters = {
      {"requests", exact.total_requests, {}}, {"local", exact.served_locally, {}},
      {"unicast", exact.served_by_unicast, {}}, {"macro", exact.served_by_macro, {}},
      {"pushes", exact.pushes, {}},           {"fetched", exact.fetched_contents, {}},
      {"arrived", exact.energy_arrived, {}},  {"spent", exact.energy_spent, {}},
      {"wasted", exact.energy_wasted, {}},
  };
  for (std::uint32_t r = 0; r < replications; ++r) {
    WorldConfig c = config;
    c.seed = seed_base + r;
    const Metrics m = run(c);
    const double values[] = {
        static_cast<double>(m.total_requests),   static_cast<double>(m.served_locally),
        static_cast<double>(m.served_by_unicast), static_cast<double>(m.served_by_macro),
        static_cast<double>(m.pushes),           static_cast<double>(m.fetched_contents),
        static_cast<double>(m.energy_arrived),   static_cast<double>(m.energy_spent),
        static_cast<double>(m.energy_wasted)};
    for (std::size_t i = 0; i < counters.size(); ++i)
      counters[i].samples.push_back(values[i]);
  }
  AgreementLine line;
  line.ok = true;
  std::ostringstream os;
  os << "transient " << policy_name(config.policy) << " h=" << config.horizon
     << " m=" << config.resolved_initial_contents() << ":";
  for (Counter& c : counters) {
    const double mean = stats::mean(c.samples);
    const double se = std::sqrt(stats::sample_variance(c.samples) /
                                static_cast<double>(c.samples.size()));
    const double tol = 3.0 * se + 1e-3;
    const bool ok = std::fabs(mean - c.exact_value) <= tol;
    line.ok = line.ok && ok;
    if (!ok)
      os << " [" << c.name << " mean=" << format_double(mean)
         << " exact=" << format_double(c.exact_value) << " tol=" << format_double(tol)
         << "]";
  }
  if (line.ok) os << " all counters within 3 SE";
  line.text = os.str();
  return line;
}

/// Randomized-but-valid world for the invariant fuzz suites.
inline WorldConfig fuzz_config(RngStream& rng, std::uint64_t horizon_cap = 2000) {
  WorldConfig c;
  c.costs.transmit_cost = 1 + static_cast<Energy>(rng.uniform_below(3));
  c.costs.fetch_cost = static_cast<Energy>(rng.uniform_below(3));
  c.capacity = static_cast<Energy>(rng.uniform_below(13));
  c.initial_level = static_cast<Energy>(rng.uniform_below(
      static_cast<std::uint64_t>(c.capacity) + 1));
  c.energy.arrival_amount = static_cast<Energy>(rng.uniform_below(7));
  c.energy.arrival_probability = rng.uniform();
  const double death_grid[] = {0.0, 1e-3, 1e-2, 0.1, 0.5, 1.0};
  c.death_rate = death_grid[rng.uniform_below(6)];
  c.birth_rate = 2.0 * rng.uniform();
  c.zipf_exponent = 2.5 * rng.uniform();
  c.request_probability = rng.uniform();
  const PolicyKind kinds[] = {PolicyKind::kBaseline, PolicyKind::kPushOnly,
                              PolicyKind::kThreshold, PolicyKind::kNoPush};
  c.policy = kinds[rng.uniform_below(4)];
  c.thresholds.fetch_threshold =
      c.costs.fetch_cost + static_cast<Energy>(rng.uniform_below(4));
  c.thresholds.push_threshold =
      c.costs.transmit_cost + static_cast<Energy>(rng.uniform_below(4));
  c.thresholds.max_fetch = 1 + rng.uniform_below(4);
  c.horizon = 200 + rng.uniform_below(horizon_cap - 200);
  c.warmup = rng.uniform_below(c.horizon / 4 + 1);
  c.initial_contents = rng.uniform_below(9);
  c.seed = rng.next_u64();
  return c;
}

/// Runs one config with paranoid checks on and verifies the conservation
/// and ledger identities on the observed window.
inline AgreementLine check_run_identities(const WorldConfig& config) {
  Engine engine(config);
  engine.set_paranoid(true);
  const Metrics m = engine.run();
  AgreementLine line;
  const bool conserve = m.total_requests ==
                        m.served_locally + m.served_by_unicast + m.served_by_macro;
  const bool ledger = m.start_level + m.energy_arrived ==
                      m.final_level + m.energy_spent + m.energy_wasted;
  const bool windows = m.periods_observed == config.horizon - config.resolved_warmup();
  line.ok = conserve && ledger && windows;
  if (!line.ok) {
    std::ostringstream os;
    os << "identities violated (conservation=" << conserve << " ledger=" << ledger
       << " window=" << windows << ") seed=" << config.seed;
    line.text = os.str();
  } else {
    line.text = "identities hold";
  }
  return line;
}

/// Byte-level determinism: same config, two engines, identical metrics and
/// identical per-period traces.
inline bool check_determinism(const WorldConfig& config) {
  Engine a(config), b(config);
  std::uint64_t ha = 0xcbf29ce484222325ull, hb = ha;
  for (std::uint64_t t = 0; t < config.horizon; ++t) {
    ha = detail::fnv1a(format_report(a.step()), ha);
    hb = detail::fnv1a(format_report(b.step()), hb);
  }
  return ha == hb && a.metrics() == b.metrics();
}

struct SelftestReport {
  std::vector<AgreementLine> lines;
  bool ok() const {
    for (const AgreementLine& line : lines)
      if (!line.ok) return false;
    return true;
  }
};

/// The oracle-vs-engine agreement suite behind `selftest`: a reduced
/// version of the full acceptance checks, sized to run in seconds.
inline SelftestReport run_selftest() {
  SelftestReport report;
  const auto specs = make_chain_specs(8, 20240901);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    AgreementLine line = check_chain_agreement(specs[i], 400000, 40000, 7000 + i);
    line.text = "stationary oracle: " + line.text;
    report.lines.push_back(line);
  }
  const auto tinies = tiny_configs();
  for (std::size_t i = 0; i < tinies.size(); ++i) {
    AgreementLine line = check_transient_agreement(tinies[i], 20000, 9000 + 100 * i);
    line.text = "transient oracle: " + line.text;
    report.lines.push_back(line);
  }
  RngStream rng(0x5e1f7e57);
  bool fuzz_ok = true;
  for (int i = 0; i < 50 && fuzz_ok; ++i)
    fuzz_ok = check_run_identities(fuzz_config(rng, 1200)).ok;
  report.lines.push_back({fuzz_ok, "invariant fuzz: 50 randomized configs"});
  WorldConfig det;
  det.horizon = 20000;
  det.warmup = 1000;
  det.policy = PolicyKind::kPushOnly;
  det.birth_rate = 1.0;
  det.death_rate = 1e-3;
  det.initial_contents = 500;
  det.seed = 99;
  report.lines.push_back(
      {check_determinism(det), "determinism: fixed seed, byte-identical traces"});
  return report;
}

}  // namespace validation
}  // namespace ehpush
