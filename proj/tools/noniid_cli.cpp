// noniid: command-line driver for the simulation library.
//
// Exit codes: 0 success, 1 runtime error, 2 configuration error,
// 3 state-space or search-space overflow.
#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "noniid/convexity.hpp"
#include "noniid/io.hpp"
#include "noniid/scenario.hpp"
#include "noniid/selftest.hpp"
#include "noniid/triangle.hpp"

namespace {

using namespace noniid;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;
constexpr int kExitOverflow = 3;

struct Globals {
  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::string out;
};

std::vector<int> parse_int_list(const std::string& text, const std::string& flag) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw ConfigError({"`" + flag + "`: expected a comma-separated list of integers"});
    }
  }
  return out;
}

std::array<int, 3> parse_triple(const std::string& text, const std::string& flag) {
  const auto v = parse_int_list(text, flag);
  if (v.size() != 3) throw ConfigError({"`" + flag + "`: expected three integers"});
  return {v[0], v[1], v[2]};
}

ScenarioConfig config_with_overrides(const std::string& path, const Globals& g) {
  ScenarioConfig cfg = load_config(path);
  if (g.seed) cfg.seed = *g.seed;
  if (g.threads > 1) cfg.threads = g.threads;
  return cfg;
}

int cmd_simulate(const Globals& g, const std::string& config, std::optional<long> trials, const std::string& trace) {
  ScenarioConfig cfg = config_with_overrides(config, g);
  if (trials) {
    if (*trials < 1) throw ConfigError({"`trials`: must be >= 1"});
    cfg.trials = *trials;
  }
  if (!trace.empty()) cfg.output.trace = trace;
  const SimulationResult result = run_simulation(cfg);
  write_json(simulation_json(cfg, result.report), g.out.empty() ? cfg.output.report : g.out);
  if (!cfg.output.trace.empty()) write_trace_csv(result.trace, std::filesystem::path(cfg.output.trace));
  return kExitOk;
}

int cmd_exact(const Globals& g, const std::string& config, bool rational) {
  const ScenarioConfig cfg = config_with_overrides(config, g);
  const HypothesisTest test = build_test(cfg);
  const NRoundBehavior<double> behavior = scenario_behavior(cfg, test);
  Json j;
  j["test"] = test.descriptor;
  j["n"] = cfg.n;
  j["scenario"] = to_string(cfg.scenario);
  j["device"] = behavior.descriptor;
  if (rational && cfg.test == TestKind::DecisionTable) {
    // Exact arithmetic needs every ingredient in rational form.
    RationalHypothesisTest exact;
    exact.alphabet = test.alphabet;
    exact.max_rounds = test.max_rounds;
    exact.input_policy = [&test](int k, History s) { return test.input_policy(k, s).cast<Rational>().eval(); };
    exact.decision = [&test](History s) { return Rational(test.decision(s)); };
    NRoundBehavior<Rational> rb;
    rb.alphabet = behavior.alphabet;
    rb.rounds = behavior.rounds;
    rb.marginal = [&behavior](int k, int x, History s) { return behavior.marginal(k, x, s).cast<Rational>().eval(); };
    const Rational p = exact_acceptance(exact, rb);
    j["acceptance"] = p.convert_to<double>();
    j["acceptance_exact"] = p.str();
  } else {
    j["acceptance"] = exact_acceptance(test, behavior);
  }
  write_json(j, g.out);
  return kExitOk;
}

template <typename Scalar>
MembershipResult<Scalar> run_membership(const std::string& target, const std::vector<std::string>& files) {
  std::vector<BasicBehavior<Scalar>> candidates;
  for (const auto& file : files) {
    if constexpr (is_exact_v<Scalar>) {
      for (auto& b : read_rational_behavior_set(file)) candidates.push_back(std::move(b));
    } else {
      for (auto& b : read_behavior_set(file)) candidates.push_back(std::move(b));
    }
  }
  if constexpr (is_exact_v<Scalar>) {
    const RationalBehavior t =
        is_behavior_preset(target) ? behavior_preset(target).cast<Rational>() : read_rational_behavior(target);
    return membership<Rational>(t, candidates);
  } else {
    return membership<double>(load_behavior(target), candidates);
  }
}

int cmd_membership(const Globals& g, const std::string& target, const std::vector<std::string>& set, bool rational,
                   bool separate_only) {
  Json j = rational ? to_json(run_membership<Rational>(target, set)) : to_json(run_membership<double>(target, set));
  write_json(j, g.out);
  if (separate_only && j["type"] == "decomposition") {
    std::cerr << "error: target lies in the convex hull; no separating functional exists\n";
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_witness(const Globals& g, int dim, const std::string& rho_file, int samples) {
  const std::uint64_t seed = g.seed.value_or(0);
  std::optional<DensityMatrix> rho;
  if (!rho_file.empty()) {
    rho.emplace(read_matrix(std::filesystem::path(rho_file)));
  } else {
    Rng rng = make_rng(seed, ~std::uint64_t{0});
    rho.emplace(random_density(dim, rng));
  }
  const ExposednessReport report = exposedness_scan(*rho, samples, seed);
  Json j;
  j["dim"] = rho->dim();
  j["seed"] = seed;
  j["purity"] = rho->purity();
  j["scan"] = to_json(report);
  write_json(j, g.out);
  return kExitOk;
}

int cmd_enumerate(const Globals& g, const std::string& config, const std::string& parties) {
  const ScenarioConfig cfg = config_with_overrides(config, g);
  const HypothesisTest test = build_test(cfg);
  const DeterministicMax result = enumerate_deterministic_max(test, cfg.n, parse_int_list(parties, "party-outputs"));
  Json j;
  j["test"] = test.descriptor;
  j["n"] = cfg.n;
  j.update(to_json(result));
  write_json(j, g.out);
  return kExitOk;
}

int cmd_attack_demo(const Globals& g, int n, long trials, double k, int restarts) {
  DemoOptions opts;
  opts.n = n;
  opts.trials = trials;
  opts.k_sigma = k;
  opts.threads = g.threads;
  if (g.seed) opts.seed = *g.seed;
  opts.approx.restarts = restarts;
  opts.approx.seed = opts.seed;
  if (n < 1 || trials < 1) throw ConfigError({"`n` and `trials` must be >= 1"});
  const HypothesisTest test = pc_ksigma_test(n, k, opts.seed);
  write_json(to_json(attack_demo(test, opts)), g.out);
  return kExitOk;
}

int cmd_approx(const Globals& g, const std::string& target, int restarts, const std::string& supports,
               const std::string& objective, int max_sweeps) {
  ApproxOptions opts;
  opts.restarts = restarts;
  opts.max_sweeps = max_sweeps;
  opts.supports = parse_triple(supports, "supports");
  opts.seed = g.seed.value_or(0);
  ApproxObjective obj = DistanceObjective{};
  if (objective == "agreement") obj = WitnessObjective{agreement_witness(0.0)};
  else if (objective != "distance") throw ConfigError({"`objective`: expected distance or agreement"});
  const ApproxResult result = best_local_approx(load_behavior(target), obj, opts);
  Json j;
  j["target"] = target;
  j["objective"] = objective;
  j["seed"] = opts.seed;
  j.update(to_json(result));
  write_json(j, g.out);
  return kExitOk;
}

int cmd_validate(const std::string& config) {
  const auto problems = validate_config(config);
  if (problems.empty()) {
    std::cout << "ok\n";
    return kExitOk;
  }
  for (const auto& p : problems) std::cerr << "error: " << p << '\n';
  return kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulate certification experiments with non-iid devices"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--seed", g.seed, "Master seed (overrides the config file)");
  app.add_option("--threads", g.threads, "Worker threads for Monte Carlo trials")->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "Output file for the JSON result (stdout when omitted)");

  std::vector<std::string> set;
  std::string config, trace, target, rho_file, parties = "2,2,2", supports = "4,4,4", objective = "distance";
  std::optional<long> trials;
  bool rational = false;
  int dim = 2, samples = 10000, demo_n = 1000, restarts = 50, max_sweeps = 500;
  long demo_trials = 1000;
  double k_sigma = 3.0;

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo acceptance rate of a scenario config");
  simulate->add_option("--config", config, "Scenario TOML file")->required();
  simulate->add_option("--trials", trials, "Number of trials (overrides the config)");
  simulate->add_option("--trace", trace, "Per-round trace CSV (trial, round, x, a, statistic, pvalue)");

  auto* exact = app.add_subcommand("exact", "Exact acceptance probability by transcript enumeration");
  exact->add_option("--config", config, "Scenario TOML file")->required();
  exact->add_flag("--rational", rational, "Rational arithmetic (decision_table tests)");

  auto* member = app.add_subcommand("membership", "Decide whether a behavior lies in the convex hull of a set");
  auto* separate = app.add_subcommand("separate", "Max-margin functional separating a behavior from a hull");
  for (auto* sub : {member, separate}) {
    sub->add_option("--target", target, "Behavior file or preset (pc, p0, p1)")->required();
    sub->add_option("--set", set, "Behavior files or [[behavior]] set files forming the candidate set")->required();
    sub->add_flag("--rational", rational, "Exact rational LP");
  }

  auto* witness = app.add_subcommand("witness", "Exposedness scan of the two-copy witness W_rho");
  witness->add_option("--dim", dim, "Dimension D of a random rho")->check(CLI::Range(2, 16));
  witness->add_option("--rho", rho_file, "Density matrix file (dimension, then row-major re im pairs)");
  witness->add_option("--samples", samples, "Random states in the scan")->check(CLI::PositiveNumber);

  auto* enumerate = app.add_subcommand("enumerate", "Best deterministic strategies against a scenario's test");
  enumerate->add_option("--config", config, "Scenario TOML file")->required();
  enumerate->add_option("--party-outputs", parties, "Output alphabet size per party");

  auto* demo = app.add_subcommand("attack-demo", "Memory attacks against the iid K-sigma test for P_c");
  demo->add_option("--n", demo_n, "Rounds per trial");
  demo->add_option("--trials", demo_trials, "Trials per device");
  demo->add_option("--k", k_sigma, "K in the K-sigma rule");
  demo->add_option("--restarts", restarts, "Restarts of the best local approximation");

  auto* approx = app.add_subcommand("approx", "Heuristic best triangle-local approximation");
  approx->add_option("--target", target, "Behavior file or preset (pc, p0, p1)")->required();
  approx->add_option("--restarts", restarts, "Random restarts")->check(CLI::PositiveNumber);
  approx->add_option("--supports", supports, "Source alphabet sizes, e.g. 4,4,4");
  approx->add_option("--objective", objective, "distance (l1 to target) or agreement (max P(000)+P(111))");
  approx->add_option("--max-sweeps", max_sweeps, "Sweep cap per restart")->check(CLI::PositiveNumber);

  auto* validate = app.add_subcommand("validate", "Check a scenario config without running it");
  validate->add_option("--config", config, "Scenario TOML file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*simulate) return cmd_simulate(g, config, trials, trace);
    if (*exact) return cmd_exact(g, config, rational);
    if (*member) return cmd_membership(g, target, set, rational, false);
    if (*separate) return cmd_membership(g, target, set, rational, true);
    if (*witness) return cmd_witness(g, dim, rho_file, samples);
    if (*enumerate) return cmd_enumerate(g, config, parties);
    if (*demo) return cmd_attack_demo(g, demo_n, demo_trials, k_sigma, restarts);
    if (*approx) return cmd_approx(g, target, restarts, supports, objective, max_sweeps);
    if (*validate) return cmd_validate(config);
  } catch (const ConfigError& e) {
    for (const auto& p : e.problems()) std::cerr << "error: " << p << '\n';
    return kExitConfig;
  } catch (const ResourceOverflow& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitOverflow;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitRuntime;
}
