#include "noniid/scenario.hpp"

#include <cmath>

#include "noniid/triangle.hpp"

namespace noniid {

std::string to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::Iid: return "iid";
    case ScenarioKind::Clock: return "clock";
    case ScenarioKind::SharedSequence: return "shared_sequence";
    case ScenarioKind::Meta: return "meta";
    case ScenarioKind::TriangleLocal: return "triangle_local";
    case ScenarioKind::Custom: return "custom";
  }
  return "unknown";
}

std::string to_string(TestKind kind) {
  switch (kind) {
    case TestKind::KSigma: return "ksigma";
    case TestKind::Martingale: return "martingale";
    case TestKind::DecisionTable: return "decision_table";
  }
  return "unknown";
}

namespace {

std::filesystem::path resolve(const ScenarioConfig& cfg, const std::string& file) {
  const std::filesystem::path p(file);
  return p.is_absolute() ? p : cfg.base_dir / p;
}

Behavior iid_source(const ScenarioConfig& cfg) {
  const auto& b = cfg.device.behavior;
  return is_behavior_preset(b) ? behavior_preset(b) : read_behavior(resolve(cfg, b));
}

DeterministicStrategy custom_strategy(const ScenarioConfig& cfg) {
  if (!cfg.device.strategy.empty()) return read_strategy(resolve(cfg, cfg.device.strategy));
  DeterministicStrategy s;
  s.party_outputs.assign(cfg.device.outputs.size(), 2);
  for (const auto& row : cfg.device.outputs) {
    std::vector<int> symbols;
    for (char c : row) symbols.push_back(c - '0');
    s.outputs.push_back(std::move(symbols));
  }
  s.validate();
  return s;
}

TriangleLocalModel triangle_model(const ScenarioConfig& cfg) {
  if (!cfg.device.model.empty()) return read_triangle_model(resolve(cfg, cfg.device.model));
  ApproxOptions opts;
  opts.supports = cfg.device.supports;
  opts.restarts = cfg.device.restarts;
  opts.seed = cfg.seed;
  return best_local_approx(p_c(), DistanceObjective{}, opts).model;
}

Mat<double> coefficient_table(const std::vector<double>& flat, Alphabet alphabet) {
  Mat<double> m(alphabet.output_size, alphabet.input_size);
  for (int x = 0; x < alphabet.input_size; ++x)
    for (int a = 0; a < alphabet.output_size; ++a) m(a, x) = flat[static_cast<std::size_t>(x * alphabet.output_size + a)];
  return m;
}

LinearWitness config_witness(const ScenarioConfig& cfg, Alphabet alphabet) {
  Mat<double> coeffs = coefficient_table(cfg.parameters.coeffs, alphabet);
  if (cfg.parameters.weights.empty()) return LinearWitness::make(std::move(coeffs), cfg.parameters.alpha);
  Vec<double> w = Eigen::Map<const Vec<double>>(cfg.parameters.weights.data(),
                                                static_cast<Eigen::Index>(cfg.parameters.weights.size()));
  return LinearWitness::make(std::move(coeffs), std::move(w), cfg.parameters.alpha);
}

Vec<double> input_distribution(const ScenarioConfig& cfg, Alphabet alphabet) {
  if (cfg.parameters.input_dist.empty())
    return Vec<double>::Constant(alphabet.input_size, 1.0 / static_cast<double>(alphabet.input_size));
  return Eigen::Map<const Vec<double>>(cfg.parameters.input_dist.data(),
                                       static_cast<Eigen::Index>(cfg.parameters.input_dist.size()));
}

}  // namespace

Alphabet scenario_alphabet(const ScenarioConfig& config) {
  switch (config.scenario) {
    case ScenarioKind::Iid:
      return iid_source(config).alphabet();
    case ScenarioKind::Custom: {
      int joint = 1;
      for (int a : custom_strategy(config).party_outputs) joint *= a;
      return {1, joint};
    }
    default:
      return triangle_alphabet();
  }
}

HypothesisTest build_test(const ScenarioConfig& config) {
  const Alphabet alphabet = scenario_alphabet(config);
  const Vec<double> inputs = input_distribution(config, alphabet);
  const auto& p = config.parameters;
  switch (config.test) {
    case TestKind::KSigma: {
      KSigmaOptions opts;
      opts.bootstrap_resamples = p.bootstrap_resamples;
      opts.bootstrap_seed = p.bootstrap_seed;
      BehaviorFunctional functional;
      if (p.functional == "entropy") {
        functional = triangle_entropy_witness;
      } else {
        functional = [w = config_witness(config, alphabet)](const Behavior& b) { return evaluate_witness(w, b); };
      }
      auto test = ksigma_frequency_test(std::move(functional), p.alpha, p.k_sigma, inputs, config.n, alphabet, opts);
      test.descriptor = "ksigma_" + p.functional;
      return test;
    }
    case TestKind::Martingale:
      return martingale_witness_test(config_witness(config, alphabet), p.epsilon, inputs, config.n);
    case TestKind::DecisionTable: {
      HypothesisTest test;
      test.alphabet = alphabet;
      test.max_rounds = config.n;
      test.input_policy = fixed_input_policy(inputs);
      const int cells = alphabet.cells();
      test.decision = [table = p.table, cells, alphabet](History s) {
        std::size_t index = 0;
        for (const Round& r : s) index = index * static_cast<std::size_t>(cells) +
                                         static_cast<std::size_t>(r.x * alphabet.output_size + r.a);
        return table[index];
      };
      test.descriptor = "decision_table";
      return test;
    }
  }
  throw Error("unknown test kind");
}

ScenarioDevice build_device(const ScenarioConfig& config, const HypothesisTest& test) {
  auto constant = [](DevicePtr d) {
    std::string name = d->descriptor();
    return ScenarioDevice{[d](Rng&) { return d; }, std::move(name)};
  };
  switch (config.scenario) {
    case ScenarioKind::Iid:
      return constant(iid_device(iid_source(config)));
    case ScenarioKind::Clock:
      return constant(clock_device(config.device.offsets));
    case ScenarioKind::SharedSequence: {
      if (!config.device.sequence.empty()) return constant(shared_sequence_device(config.device.sequence));
      const int n = config.n;
      return {[n](Rng& rng) {
                std::vector<int> q(static_cast<std::size_t>(n));
                for (auto& bit : q) bit = static_cast<int>(rng() >> 63);
                return shared_sequence_device(std::move(q));
              },
              "shared_sequence_uniform"};
    }
    case ScenarioKind::Meta:
      return constant(strategy_device(meta_strategy(test, config.n)));
    case ScenarioKind::TriangleLocal:
      return constant(triangle_device(triangle_model(config)));
    case ScenarioKind::Custom:
      return constant(strategy_device(custom_strategy(config)));
  }
  throw Error("unknown scenario kind");
}

NRoundBehavior<double> scenario_behavior(const ScenarioConfig& config, const HypothesisTest& test) {
  const int n = config.n;
  switch (config.scenario) {
    case ScenarioKind::Iid:
      return iid_behavior(iid_source(config), n);
    case ScenarioKind::Clock:
      return strategy_behavior<double>(clock_strategy(config.device.offsets, n));
    case ScenarioKind::SharedSequence: {
      if (config.device.sequence.empty()) return iid_behavior(p_c(), n);
      DeterministicStrategy s;
      s.party_outputs = {2, 2, 2};
      s.outputs.assign(3, config.device.sequence);
      return strategy_behavior<double>(s);
    }
    case ScenarioKind::Meta:
      return strategy_behavior<double>(meta_strategy(test, n));
    case ScenarioKind::TriangleLocal:
      return iid_behavior(triangle_exact_distribution(triangle_model(config)), n);
    case ScenarioKind::Custom:
      return strategy_behavior<double>(custom_strategy(config), test.alphabet.input_size);
  }
  throw Error("unknown scenario kind");
}

SimulationResult run_simulation(const ScenarioConfig& config) {
  const HypothesisTest test = build_test(config);
  const ScenarioDevice device = build_device(config, test);
  SimulationResult out;
  MonteCarloOptions opts;
  opts.threads = config.threads;
  if (!config.output.trace.empty()) {
    opts.trace_trials = config.output.trace_trials;
    opts.trace = &out.trace;
  }
  out.report = monte_carlo_acceptance(test, device.factory, config.n, config.trials, config.seed, opts, device.descriptor);
  return out;
}

Json simulation_json(const ScenarioConfig& config, const TestReport& report) {
  Json j = to_json(report);
  j["scenario"] = to_string(config.scenario);
  if (!config.regime.empty()) j["regime"] = config.regime;
  return j;
}

}  // namespace noniid
