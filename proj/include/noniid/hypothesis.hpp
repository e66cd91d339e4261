// Binary hypothesis tests: exact acceptance, Monte Carlo estimation, the
// iid K-sigma frequency test and a history-robust martingale test.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "noniid/correlations.hpp"
#include "noniid/devices.hpp"

namespace noniid {

/// Per-round value emitted into traces.
struct TraceStep {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// An N-round binary test: input policies Q_k(x | s_{k-1}) and a final
/// decision Q_f(1 | s_N). Output 1 rejects the null hypothesis.
///
/// Variable-length protocols set `stop_rule`: once it returns true for the
/// history so far, every remaining round is recorded as
/// (kNullSymbol, kNullSymbol) without querying the device, and the decision
/// only sees the measured prefix plus null padding.
template <typename Scalar>
struct BasicHypothesisTest {
  Alphabet alphabet;
  int max_rounds = 0;
  std::function<Vec<Scalar>(int k, History history)> input_policy;
  std::function<Scalar(History history)> decision;
  std::function<bool(History history)> stop_rule;
  /// Optional running statistic, evaluated on every prefix when tracing.
  std::function<TraceStep(History history)> tracer;
  std::string descriptor;
};

using HypothesisTest = BasicHypothesisTest<double>;
using RationalHypothesisTest = BasicHypothesisTest<Rational>;

/// Policy drawing every input from the same distribution.
template <typename Scalar>
std::function<Vec<Scalar>(int, History)> fixed_input_policy(Vec<Scalar> dist) {
  return [dist = std::move(dist)](int, History) { return dist; };
}

/// Same test with Q_f replaced by 1 - Q_f.
template <typename Scalar>
BasicHypothesisTest<Scalar> complement(BasicHypothesisTest<Scalar> test) {
  test.decision = [inner = test.decision](History s) -> Scalar { return Scalar(1) - inner(s); };
  test.descriptor = "not(" + test.descriptor + ")";
  test.tracer = nullptr;
  return test;
}

inline constexpr double kMaxExactStates = 1e7;

/// P_T(1 | P^(n)): the sum over every transcript s_N of
/// P^(n)(s_N) * Q_1(x_1) ... Q_N(x_N | s_{N-1}) * Q_f(1 | s_N).
///
/// Throws StateSpaceTooLarge when (A*X)^N exceeds 1e7.
template <typename Scalar>
Scalar exact_acceptance(const BasicHypothesisTest<Scalar>& test, const NRoundBehavior<Scalar>& behavior) {
  const Alphabet alphabet = test.alphabet;
  if (!(behavior.alphabet == alphabet)) throw AlphabetMismatch("exact_acceptance");
  const int rounds = test.max_rounds;
  if (behavior.rounds < rounds)
    throw Error("behavior covers " + std::to_string(behavior.rounds) + " rounds, test needs " +
                std::to_string(rounds));
  if (std::pow(static_cast<double>(alphabet.cells()), rounds) > kMaxExactStates)
    throw StateSpaceTooLarge("(A*X)^n = " + std::to_string(alphabet.cells()) + "^" + std::to_string(rounds) +
                             " exceeds 1e7");

  Transcript history;
  history.reserve(static_cast<std::size_t>(rounds));
  const Scalar zero(0);

  // Depth-first over transcript prefixes; `weight` carries the product of
  // policy and behavior marginals along the current branch.
  std::function<Scalar(const Scalar&)> expand = [&](const Scalar& weight) -> Scalar {
    const int k = static_cast<int>(history.size());
    if (k == rounds) return weight * test.decision(history);
    if (test.stop_rule && ((k > 0 && history.back().x == kNullSymbol) || test.stop_rule(history))) {
      history.push_back({kNullSymbol, kNullSymbol});
      Scalar v = expand(weight);
      history.pop_back();
      return v;
    }
    Scalar total(0);
    const Vec<Scalar> inputs = test.input_policy(k, history);
    for (int x = 0; x < alphabet.input_size; ++x) {
      if (inputs[x] == zero) continue;
      const Vec<Scalar> outputs = behavior.marginal(k, x, history);
      for (int a = 0; a < alphabet.output_size; ++a) {
        if (outputs[a] == zero) continue;
        history.push_back({x, a});
        total += expand(Scalar(weight * inputs[x] * outputs[a]));
        history.pop_back();
      }
    }
    return total;
  };
  return expand(Scalar(1));
}

// ---------------------------------------------------------------------------
// Monte Carlo.

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Wilson score interval for a binomial proportion (z = 1.96 for 95%).
Interval wilson_interval(long successes, long trials, double z = 1.959963984540054);

struct TraceRow {
  long trial;
  int round;  // one-based
  int x;
  int a;
  double statistic;
  double p_value;
};

struct TestReport {
  std::string test;
  std::string device;
  int n = 0;
  long trials = 0;
  long accepted = 0;
  double accept_rate = 0.0;
  Interval ci95;
  std::uint64_t seed = 0;
  double wall_time_s = 0.0;
  /// Frequency table of trial 0, for side-by-side comparisons.
  std::optional<FrequencyTable> first_trial_frequencies;
};

struct MonteCarloOptions {
  int threads = 1;
  /// Trials whose full per-round statistic trajectory is recorded.
  long trace_trials = 0;
  std::vector<TraceRow>* trace = nullptr;
};

/// Transcript of one simulated run with per-trial stream `rng`.
Transcript simulate_transcript(const HypothesisTest& test, const DeviceModel& device, int n, Rng& rng);

/// Estimate P_T(1 | device). Trial t uses the stream derive_seed(seed, t), so
/// results are identical for any thread count.
TestReport monte_carlo_acceptance(const HypothesisTest& test, const DeviceModel& device, int n, long trials,
                                  std::uint64_t seed, const MonteCarloOptions& options = {});

/// Builds the device for one trial from that trial's stream (before any round
/// is played), e.g. to draw a fresh shared sequence per trial.
using DeviceFactory = std::function<DevicePtr(Rng&)>;

TestReport monte_carlo_acceptance(const HypothesisTest& test, const DeviceFactory& factory, int n, long trials,
                                  std::uint64_t seed, const MonteCarloOptions& options = {},
                                  std::string device_descriptor = "per_trial_device");

// ---------------------------------------------------------------------------
// Frequency-based iid test.

using BehaviorFunctional = std::function<double(const Behavior&)>;

struct KSigmaOptions {
  int bootstrap_resamples = 200;
  std::uint64_t bootstrap_seed = 0;
  /// Inputs the functional reads; empty means every input with positive
  /// probability under the input distribution.
  std::vector<int> required_inputs;
};

/// Bootstrap standard deviation of F(P~) obtained by resampling transcript
/// rows; drawn as a multinomial over the (a, x) count cells, which has the
/// same law as resampling rows with replacement.
double bootstrap_sigma(const BehaviorFunctional& functional, const FrequencyTable& table, int resamples,
                       std::uint64_t seed);

/// Rejects (outputs 1) iff F(P~) > alpha + K * sigma, with P~ the observed
/// frequencies and sigma a bootstrap estimate seeded from the transcript
/// counts, which keeps the decision a deterministic function of s_n.
HypothesisTest ksigma_frequency_test(BehaviorFunctional functional, double alpha, double k_sigma,
                                     Vec<double> input_dist, int n, Alphabet alphabet,
                                     KSigmaOptions options = {});

// ---------------------------------------------------------------------------
// Martingale witness test.

/// Azuma-Hoeffding rejection threshold (M - m) sqrt(n ln(1/eps) / 2).
double martingale_threshold(int n, double score_width, double epsilon);
/// min(1, exp(-2 max(S, 0)^2 / (n (M - m)^2))).
double martingale_p_value(double statistic, int n, double score_width);

/// Per-round centered scores f(a, x) w(x) / q(x) - alpha, with q the input
/// distribution. Throws UnboundedScore if a score leaves [score_min, score_max].
Mat<double> martingale_scores(const LinearWitness& witness, const Vec<double>& input_dist);

/// S_n = sum over measured rounds of the centered score.
double martingale_statistic(const Mat<double>& centered_scores, History transcript);

/// Rejects iff S_n >= threshold. Under any history-dependent null behavior
/// whose round marginals satisfy F <= alpha, the rejection probability is at
/// most epsilon.
HypothesisTest martingale_witness_test(const LinearWitness& witness, double epsilon, Vec<double> input_dist, int n);

// ---------------------------------------------------------------------------
// Deterministic strategies.

template <typename Scalar>
struct BasicDeterministicMax {
  Scalar max_prob{};
  std::vector<DeterministicStrategy> argmax;  // lexicographic order
  long evaluated = 0;
};

using DeterministicMax = BasicDeterministicMax<double>;

inline constexpr double kTieTolerance = 1e-9;

/// Strategy number `index` in lexicographic order of the key
/// (party 1 symbols, party 2 symbols, ...), each party's symbols in round order.
DeterministicStrategy strategy_from_index(long index, int rounds, const std::vector<int>& party_outputs);

/// Exact acceptance of one deterministic strategy.
template <typename Scalar>
Scalar strategy_acceptance(const BasicHypothesisTest<Scalar>& test, const DeterministicStrategy& strategy) {
  if (test.alphabet.input_size == 1 && !test.stop_rule) {
    // Single-input policies are deterministic, so only one transcript has
    // positive probability.
    Transcript s;
    s.reserve(static_cast<std::size_t>(test.max_rounds));
    for (int k = 0; k < test.max_rounds; ++k) s.push_back({0, strategy.joint_output(k)});
    return test.decision(s);
  }
  return exact_acceptance(test, strategy_behavior<Scalar>(strategy, test.alphabet.input_size));
}

/// Exhaustive max of P_T over every deterministic n-round strategy of the
/// given parties. Ties use 1e-9 in floating point and exact equality for
/// rationals.
template <typename Scalar>
BasicDeterministicMax<Scalar> enumerate_deterministic_max(const BasicHypothesisTest<Scalar>& test, int n,
                                                          const std::vector<int>& party_outputs) {
  int joint = 1;
  double space = 1.0;
  for (int a : party_outputs) {
    joint *= a;
    space *= std::pow(static_cast<double>(a), n);
  }
  if (joint != test.alphabet.output_size) throw AlphabetMismatch("party structure vs test outputs");
  if (n != test.max_rounds) throw Error("enumerate_deterministic_max: n differs from the test length");
  if (space > kMaxExactStates) throw SearchSpaceTooLarge("prod_i A_i^n exceeds 1e7");

  const Scalar tol = scalar_tolerance<Scalar>(kTieTolerance);
  BasicDeterministicMax<Scalar> out;
  std::vector<std::pair<long, Scalar>> values;
  const long total = static_cast<long>(std::llround(space));
  values.reserve(static_cast<std::size_t>(total));
  for (long index = 0; index < total; ++index) {
    Scalar v = strategy_acceptance(test, strategy_from_index(index, n, party_outputs));
    if (index == 0 || v > out.max_prob) out.max_prob = v;
    values.emplace_back(index, std::move(v));
  }
  out.evaluated = total;
  for (const auto& [index, v] : values)
    if (v >= out.max_prob - tol) out.argmax.push_back(strategy_from_index(index, n, party_outputs));
  return out;
}

// ---------------------------------------------------------------------------
// Test families.

struct FamilyPoint {
  int n = 0;
  double epsilon_hat = 0.0;  // max acceptance over the supplied null devices
  std::string worst_null;
  double detection = 0.0;    // acceptance of the target device
  std::vector<TestReport> null_reports;
  TestReport target_report;
};

/// Empirical p-value and detection curves of a family (T^n)_n. The null
/// maximum only ranges over the supplied devices.
std::vector<FamilyPoint> verify_test_family(const std::vector<HypothesisTest>& tests,
                                            const std::vector<DevicePtr>& null_devices, const DeviceModel& target,
                                            long trials, std::uint64_t seed, const MonteCarloOptions& options = {});

}  // namespace noniid
