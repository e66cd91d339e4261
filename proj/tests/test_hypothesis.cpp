#include <gtest/gtest.h>

#include <cmath>

#include "noniid/devices.hpp"
#include "noniid/hypothesis.hpp"
#include "noniid/triangle.hpp"
#include "test_support.hpp"

using namespace noniid;
using noniid::testing::brute_force_acceptance;
using noniid::testing::random_grid_behavior;
using noniid::testing::random_table_test;

namespace {

HypothesisTest constant_test(Alphabet alphabet, int n, double value) {
  HypothesisTest t;
  t.alphabet = alphabet;
  t.max_rounds = n;
  t.input_policy = fixed_input_policy<double>(Vec<double>::Constant(alphabet.input_size, 1.0 / alphabet.input_size));
  t.decision = [value](History) { return value; };
  t.descriptor = "constant";
  return t;
}

/// Accept iff the observed frequencies equal P_c exactly.
HypothesisTest pc_frequency_test(int n) {
  HypothesisTest t = constant_test(triangle_alphabet(), n, 0.0);
  t.decision = [](History s) {
    const FrequencyTable f = frequency_estimate(s, triangle_alphabet());
    return f.exact_estimate().probs() == p_c().cast<Rational>().probs() ? 1.0 : 0.0;
  };
  return t;
}

/// Accept iff every round has all parties agreeing and 000 and 111 occur
/// equally often.
HypothesisTest balanced_agreement_test(int n) {
  HypothesisTest t = constant_test(triangle_alphabet(), n, 0.0);
  t.decision = [](History s) {
    int zeros = 0, ones = 0;
    for (const Round& r : s) {
      if (r.a == 0) ++zeros;
      else if (r.a == 7) ++ones;
      else return 0.0;
    }
    return zeros == ones ? 1.0 : 0.0;
  };
  return t;
}

Behavior binary(double p0) {
  Mat<double> t(2, 1);
  t << p0, 1 - p0;
  return {Alphabet(1, 2), t};
}

}  // namespace

TEST(ExactAcceptance, ConstantOneIsOne) {
  Rng rng = make_rng(1, 0);
  const auto p = random_grid_behavior<double>(Alphabet(2, 3), rng);
  EXPECT_NEAR(exact_acceptance(constant_test(Alphabet(2, 3), 3, 1.0), iid_behavior(p, 3)), 1.0, 1e-14);
}

TEST(ExactAcceptance, SingleRoundFirstOutputZero) {
  HypothesisTest t = constant_test(Alphabet(1, 2), 1, 0.0);
  t.decision = [](History s) { return s[0].a == 0 ? 1.0 : 0.0; };
  EXPECT_DOUBLE_EQ(exact_acceptance(t, iid_behavior(binary(0.7), 1)), 0.7);
}

TEST(ExactAcceptance, PcFrequencyTestSeparatesClockFromPointMass) {
  const HypothesisTest t = pc_frequency_test(2);
  EXPECT_DOUBLE_EQ(exact_acceptance(t, strategy_behavior<double>(clock_strategy({0, 0, 0}, 2))), 1.0);
  EXPECT_DOUBLE_EQ(exact_acceptance(t, iid_behavior(triangle_point(0), 2)), 0.0);
}

TEST(ExactAcceptance, MatchesBruteForceOnAdaptiveTests) {
  for (int i = 0; i < 30; ++i) {
    Rng rng = make_rng(2, static_cast<std::uint64_t>(i));
    const Alphabet alph(1 + i % 3, 2 + i % 2);
    const int n = 1 + i % 3;
    const auto test = random_table_test<double>(alph, n, rng);
    std::vector<Behavior> rounds;
    for (int k = 0; k < n; ++k) rounds.push_back(random_grid_behavior<double>(alph, rng));
    const auto behavior = product_behavior(rounds);
    EXPECT_NEAR(exact_acceptance(test, behavior), brute_force_acceptance(test, behavior), 1e-13);
  }
}

TEST(ExactAcceptance, RationalModeIsExact) {
  Rng rng = make_rng(3, 0);
  const Alphabet alph(2, 2);
  const auto test = random_table_test<Rational>(alph, 3, rng);
  const auto p = random_grid_behavior<Rational>(alph, rng);
  EXPECT_EQ(exact_acceptance(test, iid_behavior(p, 3)), brute_force_acceptance(test, iid_behavior(p, 3)));
}

TEST(ExactAcceptance, ComplementSumsToOne) {
  for (int i = 0; i < 10; ++i) {
    Rng rng = make_rng(4, static_cast<std::uint64_t>(i));
    const Alphabet alph(2, 2);
    const auto test = random_table_test<double>(alph, 3, rng);
    const auto b = iid_behavior(random_grid_behavior<double>(alph, rng), 3);
    EXPECT_NEAR(exact_acceptance(test, b) + exact_acceptance(complement(test), b), 1.0, 1e-12);
  }
}

TEST(ExactAcceptance, StateSpaceGuard) {
  const HypothesisTest t = constant_test(triangle_alphabet(), 8, 1.0);
  EXPECT_THROW(exact_acceptance(t, iid_behavior(p_c(), 8)), StateSpaceTooLarge);
}

TEST(ExactAcceptance, VariableLengthStopsAtFirstZero) {
  // Stop as soon as a 0 is seen; accept iff the protocol stopped early.
  HypothesisTest t = constant_test(Alphabet(1, 2), 3, 0.0);
  t.stop_rule = [](History s) { return !s.empty() && s.back().a == 0; };
  t.decision = [](History s) {
    for (const Round& r : s)
      if (r.x == kNullSymbol) return 1.0;
    return 0.0;
  };
  const double p = 0.3;
  // Stopped early iff a zero occurs in one of the first two rounds.
  EXPECT_NEAR(exact_acceptance(t, iid_behavior(binary(p), 3)), 1 - (1 - p) * (1 - p), 1e-15);
  // The device is never queried after the stop.
  Rng rng = make_rng(0, 0);
  const Transcript s = simulate_transcript(t, *iid_device(binary(1.0)), 3, rng);
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[0].a, 0);
  EXPECT_EQ(s[1].x, kNullSymbol);
  EXPECT_EQ(s[2].a, kNullSymbol);
}

TEST(ExactAcceptance, LinearityUnderConvexDecomposition) {
  // P = sum_i lambda_i P_i  =>  P_T(P^n) = sum over tuples of product weights.
  for (int i = 0; i < 10; ++i) {
    Rng rng = make_rng(5, static_cast<std::uint64_t>(i));
    const Alphabet alph(2, 2);
    const int n = 1 + i % 4;
    const auto test = random_table_test<Rational>(alph, n, rng);
    const std::vector<RationalBehavior> parts{random_grid_behavior<Rational>(alph, rng),
                                              random_grid_behavior<Rational>(alph, rng),
                                              random_grid_behavior<Rational>(alph, rng)};
    const std::vector<Rational> weights{Rational(1, 2), Rational(1, 3), Rational(1, 6)};
    const Rational direct = exact_acceptance(test, iid_behavior(mix<Rational>(parts, weights), n));
    Rational sum(0), worst(0);
    const long tuples = static_cast<long>(std::pow(3, n));
    for (long t = 0; t < tuples; ++t) {
      std::vector<RationalBehavior> rounds;
      Rational w(1);
      long rest = t;
      for (int k = 0; k < n; ++k) {
        rounds.push_back(parts[static_cast<std::size_t>(rest % 3)]);
        w *= weights[static_cast<std::size_t>(rest % 3)];
        rest /= 3;
      }
      const Rational v = exact_acceptance(test, product_behavior(rounds));
      sum += w * v;
      worst = std::max(worst, v);
    }
    EXPECT_EQ(direct, sum);
    EXPECT_LE(direct, worst);
  }
}

TEST(MonteCarlo, ConstantZeroNeverAccepts) {
  const auto r = monte_carlo_acceptance(constant_test(Alphabet(1, 2), 5, 0.0), *iid_device(binary(0.5)), 5, 200, 1);
  EXPECT_EQ(r.accept_rate, 0.0);
  EXPECT_LE(r.ci95.lo, r.accept_rate);
  EXPECT_GE(r.ci95.hi, r.accept_rate);
}

TEST(MonteCarlo, WilsonIntervalCoversExactValue) {
  Rng rng = make_rng(6, 0);
  const Alphabet alph(2, 2);
  const auto test = random_table_test<double>(alph, 3, rng);
  const Behavior p = random_grid_behavior<double>(alph, rng);
  const double exact = exact_acceptance(test, iid_behavior(p, 3));
  const auto device = iid_device(p);
  int covered = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const auto r = monte_carlo_acceptance(test, *device, 3, 400, derive_seed(77, static_cast<std::uint64_t>(rep)));
    covered += r.ci95.lo <= exact && exact <= r.ci95.hi;
  }
  EXPECT_GE(covered, 95);
}

TEST(MonteCarlo, ThreadCountDoesNotChangeResults) {
  const HypothesisTest t = pc_ksigma_test(200);
  const auto device = iid_device(Behavior::uniform(triangle_alphabet()));
  MonteCarloOptions one, three;
  three.threads = 3;
  const auto a = monte_carlo_acceptance(t, *device, 200, 60, 5, one);
  const auto b = monte_carlo_acceptance(t, *device, 200, 60, 5, three);
  EXPECT_EQ(a.accepted, b.accepted);
}

TEST(MonteCarlo, TraceRowsCoverEveryRound) {
  const LinearWitness w = agreement_witness(0.25);
  const HypothesisTest t = martingale_witness_test(w, 0.05, Vec<double>::Ones(1), 20);
  std::vector<TraceRow> trace;
  MonteCarloOptions opts;
  opts.trace_trials = 2;
  opts.trace = &trace;
  monte_carlo_acceptance(t, *clock_device({0, 0, 0}), 20, 5, 9, opts);
  ASSERT_EQ(trace.size(), 40u);
  EXPECT_EQ(trace[0].trial, 0);
  EXPECT_EQ(trace[39].round, 20);
  // Each clock round scores 1 - 0.25.
  EXPECT_NEAR(trace[19].statistic, 20 * 0.75, 1e-12);
}

TEST(KSigma, ClockAlwaysRejectsNull) {
  const HypothesisTest t = pc_ksigma_test(1000);
  const auto r = monte_carlo_acceptance(t, *clock_device({0, 0, 0}), 1000, 200, 3);
  EXPECT_GE(r.accept_rate, 0.99);
}

TEST(KSigma, LinearFunctionalFarBelowThreshold) {
  // F(P) = P(0); sigma of the frequency is sqrt(p(1-p)/n).
  const int n = 1000;
  const double p = 0.5;
  const double sigma = std::sqrt(p * (1 - p) / n);
  const LinearWitness w = LinearWitness::make((Mat<double>(2, 1) << 1.0, 0.0).finished(), 0.0);
  const HypothesisTest t = ksigma_frequency_test([w](const Behavior& b) { return evaluate_witness(w, b); },
                                                 p + 10 * sigma, 3.0, Vec<double>::Ones(1), n, Alphabet(1, 2));
  EXPECT_LE(monte_carlo_acceptance(t, *iid_device(binary(p)), n, 1000, 4).accept_rate, 0.01);
}

TEST(KSigma, AgreementWitnessClockAndUniform) {
  const LinearWitness w = agreement_witness(0.0);
  const BehaviorFunctional f = [w](const Behavior& b) { return evaluate_witness(w, b); };
  const HypothesisTest t = ksigma_frequency_test(f, 0.9, 3.0, Vec<double>::Ones(1), 1000, triangle_alphabet());
  Rng rng = make_rng(0, 0);
  EXPECT_EQ(t.decision(simulate_transcript(t, *clock_device({0, 0, 0}), 1000, rng)), 1.0);
  const auto r = monte_carlo_acceptance(t, *iid_device(Behavior::uniform(triangle_alphabet())), 1000, 300, 5);
  EXPECT_LE(r.accept_rate, 0.01);
}

TEST(KSigma, UndefinedFrequencyWhenRequiredInputUnseen) {
  KSigmaOptions opts;
  opts.required_inputs = {1};
  const HypothesisTest t = ksigma_frequency_test([](const Behavior& b) { return b(0, 1); }, 0.0, 3.0,
                                                 (Vec<double>(2) << 1.0, 0.0).finished(), 10, Alphabet(2, 2), opts);
  Rng rng = make_rng(0, 0);
  const Transcript s = simulate_transcript(t, *iid_device(Behavior::uniform(Alphabet(2, 2))), 10, rng);
  EXPECT_THROW(t.decision(s), UndefinedFrequency);
}

TEST(KSigma, DecisionIsAFunctionOfTheTranscript) {
  const HypothesisTest t = pc_ksigma_test(300);
  Rng rng = make_rng(1, 1);
  const Transcript s = simulate_transcript(t, *iid_device(p_c()), 300, rng);
  EXPECT_EQ(t.decision(s), t.decision(s));
}

TEST(Martingale, ThresholdFormula) {
  // sqrt(1000 ln 20 / 2) = 38.7023...
  EXPECT_NEAR(martingale_threshold(1000, 1.0, 0.05), 38.7023, 1e-4);
  EXPECT_NEAR(martingale_threshold(1000, 2.0, 0.05), 2 * std::sqrt(500 * std::log(20.0)), 1e-12);
}

TEST(Martingale, PValueFormula) {
  EXPECT_EQ(martingale_p_value(-3.0, 100, 1.0), 1.0);
  EXPECT_NEAR(martingale_p_value(10.0, 100, 1.0), std::exp(-2.0), 1e-15);
  // At the threshold the p-value is exactly epsilon.
  EXPECT_NEAR(martingale_p_value(martingale_threshold(1000, 1.0, 0.05), 1000, 1.0), 0.05, 1e-12);
}

TEST(Martingale, ScoresOutsideTheRangeAreRejected) {
  LinearWitness w = agreement_witness(0.5);
  w.score_max = 0.5;
  EXPECT_THROW(martingale_witness_test(w, 0.05, Vec<double>::Ones(1), 10), UnboundedScore);
}

TEST(Martingale, NullAtBoundRarelyRejects) {
  // E[f] = alpha exactly: F = P(0), P(0) = 0.4, alpha = 0.4.
  const LinearWitness w = LinearWitness::make((Mat<double>(2, 1) << 1.0, 0.0).finished(), 0.4);
  const HypothesisTest t = martingale_witness_test(w, 0.05, Vec<double>::Ones(1), 1000);
  const auto r = monte_carlo_acceptance(t, *iid_device(binary(0.4)), 1000, 10000, 6);
  EXPECT_LE(r.accept_rate, 0.05 + 3 * std::sqrt(0.05 * 0.95 / 10000));
}

TEST(Martingale, DetectsDriftOfOneFifthWidth) {
  const LinearWitness w = LinearWitness::make((Mat<double>(2, 1) << 1.0, 0.0).finished(), 0.4);
  const HypothesisTest t = martingale_witness_test(w, 0.05, Vec<double>::Ones(1), 1000);
  const auto r = monte_carlo_acceptance(t, *iid_device(binary(0.6)), 1000, 1000, 7);
  EXPECT_GE(r.accept_rate, 0.99);
}

TEST(Martingale, NullHoldsAgainstHistoryDependentDevice) {
  // Memory device: every round's marginal keeps F <= alpha, but the choice
  // between two such behaviors depends on the history.
  class Adaptive final : public DeviceModel {
   public:
    int respond(int, History h, Rng& rng) const override {
      const double p0 = (!h.empty() && h.back().a == 0) ? 0.4 : 0.1;
      return uniform01(rng) < p0 ? 0 : 1;
    }
    Alphabet alphabet() const override { return {1, 2}; }
    std::string descriptor() const override { return "adaptive"; }
  };
  const LinearWitness w = LinearWitness::make((Mat<double>(2, 1) << 1.0, 0.0).finished(), 0.4);
  const HypothesisTest t = martingale_witness_test(w, 0.05, Vec<double>::Ones(1), 500);
  EXPECT_LE(monte_carlo_acceptance(t, Adaptive{}, 500, 2000, 8).accept_rate, 0.05);
}

TEST(Enumerate, ConstantDecisionMakesEveryStrategyOptimal) {
  const auto r = enumerate_deterministic_max(constant_test(triangle_alphabet(), 2, 0.3), 2, {2, 2, 2});
  EXPECT_DOUBLE_EQ(r.max_prob, 0.3);
  EXPECT_EQ(r.argmax.size(), 64u);
  EXPECT_EQ(r.evaluated, 64);
}

TEST(Enumerate, BalancedAgreementHasTwoMaximizers) {
  const auto r = enumerate_deterministic_max(balanced_agreement_test(2), 2, {2, 2, 2});
  EXPECT_DOUBLE_EQ(r.max_prob, 1.0);
  ASSERT_EQ(r.argmax.size(), 2u);
  EXPECT_EQ(r.argmax[0].outputs, (std::vector<std::vector<int>>(3, {0, 1})));
  EXPECT_EQ(r.argmax[1].outputs, (std::vector<std::vector<int>>(3, {1, 0})));
}

TEST(Enumerate, SearchSpaceGuard) {
  EXPECT_THROW(enumerate_deterministic_max(constant_test(triangle_alphabet(), 8, 1.0), 8, {2, 2, 2}),
               SearchSpaceTooLarge);
}

TEST(Enumerate, DominatesTriangleLocalBehaviors) {
  Rng rng = make_rng(9, 0);
  for (int i = 0; i < 5; ++i) {
    const int n = 1 + i % 2;
    const auto test = random_table_test<double>(triangle_alphabet(), n, rng);
    const auto best = enumerate_deterministic_max(test, n, {2, 2, 2});
    for (int j = 0; j < 100; ++j) {
      std::vector<Behavior> rounds;
      for (int k = 0; k < n; ++k)
        rounds.push_back(triangle_exact_distribution(TriangleLocalModel::random({2, 2, 2}, rng)));
      EXPECT_LE(exact_acceptance(test, product_behavior(rounds)), best.max_prob + 1e-9);
    }
  }
}

TEST(Enumerate, StrategyIndexOrderIsLexicographic) {
  const auto first = strategy_from_index(0, 2, {2, 2, 2});
  const auto second = strategy_from_index(1, 2, {2, 2, 2});
  const auto high = strategy_from_index(32, 2, {2, 2, 2});
  EXPECT_EQ(first.outputs, (std::vector<std::vector<int>>(3, {0, 0})));
  EXPECT_EQ(second.outputs[2], (std::vector<int>{0, 1}));  // last party's last round moves fastest
  EXPECT_EQ(high.outputs[0], (std::vector<int>{1, 0}));    // party 1, round 1 is most significant
}

TEST(TestFamily, ZeroDecisionFamily) {
  std::vector<HypothesisTest> family;
  for (int n : {10, 100}) family.push_back(constant_test(triangle_alphabet(), n, 0.0));
  const auto points = verify_test_family(family, {iid_device(p_c()), clock_device({0, 0, 0})}, *iid_device(p_c()), 50, 1);
  ASSERT_EQ(points.size(), 2u);
  for (const auto& p : points) {
    EXPECT_EQ(p.epsilon_hat, 0.0);
    EXPECT_EQ(p.detection, 0.0);
  }
}

TEST(TestFamily, MartingaleFamilyIsSoundAndDetects) {
  const LinearWitness w = LinearWitness::make((Mat<double>(2, 1) << 1.0, 0.0).finished(), 0.4);
  std::vector<HypothesisTest> family;
  for (int n : {100, 1000}) family.push_back(martingale_witness_test(w, 0.05, Vec<double>::Ones(1), n));
  const auto points =
      verify_test_family(family, {iid_device(binary(0.4)), iid_device(binary(0.2))}, *iid_device(binary(0.7)), 1000, 2);
  for (const auto& p : points) EXPECT_LE(p.epsilon_hat, 0.05 + 3 * std::sqrt(0.05 * 0.95 / 1000));
  EXPECT_GE(points.back().detection, 0.99);
}

TEST(TestFamily, KSigmaNullCurvePinnedByClock) {
  std::vector<HypothesisTest> family{pc_ksigma_test(100), pc_ksigma_test(1000)};
  const auto points = verify_test_family(family, {clock_device({0, 0, 0})}, *iid_device(p_c()), 100, 3);
  for (const auto& p : points) EXPECT_GE(p.epsilon_hat, 0.99);
}

TEST(Wilson, IntervalBracketsRate) {
  const Interval i = wilson_interval(30, 100);
  EXPECT_LT(i.lo, 0.3);
  EXPECT_GT(i.hi, 0.3);
  EXPECT_NEAR(i.lo, 0.2189, 1e-3);
  EXPECT_NEAR(i.hi, 0.3958, 1e-3);
}
