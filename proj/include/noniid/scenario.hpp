// Scenario configs: a device, a test and run settings read from TOML.
//
//   scenario = "clock"        # iid | clock | shared_sequence | meta | triangle_local | custom
//   test = "ksigma"           # ksigma | martingale | decision_table
//   n = 1000
//   trials = 1000             # default 1000
//   seed = 0                  # default 0
//   threads = 1
//   regime = "unlimited"      # optional label: unlimited | bounded | banned
//
//   [device]                  # keys depend on the scenario, see README
//   [parameters]              # test parameters
//   [output]                  # report, trace, trace_trials
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "noniid/hypothesis.hpp"
#include "noniid/io.hpp"

namespace noniid {

enum class ScenarioKind { Iid, Clock, SharedSequence, Meta, TriangleLocal, Custom };
enum class TestKind { KSigma, Martingale, DecisionTable };

std::string to_string(ScenarioKind kind);
std::string to_string(TestKind kind);

struct DeviceParameters {
  std::string behavior = "pc";           // iid: preset name or behavior file
  std::array<int, 3> offsets{0, 0, 0};   // clock
  std::vector<int> sequence;             // shared_sequence; empty = fresh uniform bits per trial
  std::string model;                     // triangle_local: model file; empty = best local fit to P_c
  int restarts = 50;                     // triangle_local fit
  std::array<int, 3> supports{4, 4, 4};  // triangle_local fit
  std::string strategy;                  // custom: strategy file
  std::vector<std::string> outputs;      // custom: inline strategy
};

struct TestParameters {
  std::string functional = "entropy";    // ksigma: entropy | linear
  std::vector<double> coeffs;            // x-major, length A * X
  std::vector<double> weights;           // input weights of the witness
  double alpha = 0.0;
  double k_sigma = 3.0;
  double epsilon = 0.05;
  std::vector<double> input_dist;        // default uniform
  int bootstrap_resamples = 200;
  std::uint64_t bootstrap_seed = 0;
  std::vector<double> table;             // decision_table: Q_f(1 | s) by packed transcript
};

struct OutputPaths {
  std::string report;
  std::string trace;
  long trace_trials = 1;
};

struct ScenarioConfig {
  ScenarioKind scenario = ScenarioKind::Iid;
  TestKind test = TestKind::KSigma;
  int n = 0;
  long trials = 1000;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string regime;
  DeviceParameters device;
  TestParameters parameters;
  OutputPaths output;
  std::filesystem::path base_dir;  // relative file references resolve here
};

/// Full schema check without execution. An empty list means the file is valid.
std::vector<std::string> validate_config(const std::filesystem::path& path);

/// Throws ConfigError listing every problem.
ScenarioConfig load_config(const std::filesystem::path& path);
ScenarioConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = ".");

/// Alphabet shared by the device and the test.
Alphabet scenario_alphabet(const ScenarioConfig& config);

HypothesisTest build_test(const ScenarioConfig& config);

/// Per-trial device source for Monte Carlo runs.
struct ScenarioDevice {
  DeviceFactory factory;
  std::string descriptor;
};
ScenarioDevice build_device(const ScenarioConfig& config, const HypothesisTest& test);

/// Exact n-round behavior of the scenario's device (a uniformly random shared
/// sequence averages to iid P_c).
NRoundBehavior<double> scenario_behavior(const ScenarioConfig& config, const HypothesisTest& test);

struct SimulationResult {
  TestReport report;
  std::vector<TraceRow> trace;
};

SimulationResult run_simulation(const ScenarioConfig& config);

/// Report JSON of a simulation: test, n, trials, accept_rate, ci95, seed,
/// wall_time_s, then the remaining fields.
Json simulation_json(const ScenarioConfig& config, const TestReport& report);

}  // namespace noniid
