#include <gtest/gtest.h>

#include <cmath>

#include "noniid/devices.hpp"
#include "noniid/triangle.hpp"

using namespace noniid;

namespace {

HypothesisTest triangle_test(int n, std::function<double(History)> decision) {
  HypothesisTest t;
  t.alphabet = triangle_alphabet();
  t.max_rounds = n;
  t.input_policy = fixed_input_policy<double>(Vec<double>::Ones(1));
  t.decision = std::move(decision);
  t.descriptor = "custom";
  return t;
}

/// Product of independent party marginals given as P(a_i = 0).
Behavior independent_product(double p1, double p2, double p3) {
  Mat<double> t(8, 1);
  for (int a = 0; a < 8; ++a) {
    const int a1 = a >> 2, a2 = (a >> 1) & 1, a3 = a & 1;
    t(a, 0) = (a1 ? 1 - p1 : p1) * (a2 ? 1 - p2 : p2) * (a3 ? 1 - p3 : p3);
  }
  return {triangle_alphabet(), t};
}

/// Plain-loop entropies in bits of a flattened three-bit distribution.
double entropy_witness_oracle(const Behavior& p) {
  auto h = [](const std::vector<double>& q) {
    double s = 0;
    for (double v : q)
      if (v > 0) s -= v * std::log2(v);
    return s;
  };
  std::vector<double> m1(2, 0), m2(2, 0), m3(2, 0), m12(4, 0), m13(4, 0);
  for (int a = 0; a < 8; ++a) {
    const int a1 = a >> 2, a2 = (a >> 1) & 1, a3 = a & 1;
    m1[a1] += p(a, 0);
    m2[a2] += p(a, 0);
    m3[a3] += p(a, 0);
    m12[a1 * 2 + a2] += p(a, 0);
    m13[a1 * 2 + a3] += p(a, 0);
  }
  return h(m1) + h(m2) + h(m3) - h(m12) - h(m13);
}

}  // namespace

TEST(Pc, ShapeAndMarginals) {
  const Behavior p = p_c();
  EXPECT_EQ(p.alphabet(), triangle_alphabet());
  EXPECT_EQ(p(0, 0), 0.5);
  EXPECT_EQ(p(7, 0), 0.5);
  EXPECT_EQ(p.probs().sum(), 1.0);
  for (int party = 0; party < 3; ++party) {
    const Vec<double> m = party_marginal(p, party);
    EXPECT_EQ(m[0], 0.5);
    EXPECT_EQ(m[1], 0.5);
  }
}

TEST(EntropyWitness, PcAndOracle) {
  EXPECT_NEAR(triangle_entropy_witness(p_c()), 1.0, 1e-15);
  EXPECT_NEAR(triangle_entropy_witness(triangle_point(0)), 0.0, 1e-15);
  Rng rng = make_rng(1, 0);
  for (int i = 0; i < 50; ++i) {
    const Behavior p = triangle_exact_distribution(TriangleLocalModel::random({3, 3, 3}, rng));
    EXPECT_NEAR(triangle_entropy_witness(p), entropy_witness_oracle(p), 1e-12);
  }
}

TEST(EntropyWitness, NonPositiveOnLocalModels) {
  Rng rng = make_rng(2, 0);
  for (int i = 0; i < 300; ++i) {
    const Behavior p = triangle_exact_distribution(TriangleLocalModel::random({1 + i % 4, 2 + i % 3, 1 + i % 5}, rng));
    EXPECT_LE(triangle_entropy_witness(p), 1e-12);
  }
}

TEST(AgreementWitness, Values) {
  const LinearWitness w = agreement_witness(0.0);
  EXPECT_DOUBLE_EQ(evaluate_witness(w, p_c()), 1.0);
  EXPECT_NEAR(evaluate_witness(w, Behavior::uniform(triangle_alphabet())), 0.25, 1e-15);
}

TEST(BestLocalApprox, RecoversALocalTarget) {
  Rng rng = make_rng(3, 0);
  const Behavior target = triangle_exact_distribution(TriangleLocalModel::random({2, 2, 2}, rng));
  ApproxOptions opts;
  opts.seed = 11;
  const ApproxResult r = best_local_approx(target, DistanceObjective{}, opts);
  EXPECT_LE(r.value, 0.02);
  EXPECT_NEAR(l1_distance(r.distribution, target), r.value, 1e-9);
  EXPECT_EQ(r.restart_values.size(), 50u);
}

TEST(BestLocalApprox, IndependentUniformBitsAreExact) {
  const ApproxResult r = best_local_approx(independent_product(0.5, 0.5, 0.5), DistanceObjective{});
  EXPECT_LE(r.value, 1e-6);
}

TEST(BestLocalApprox, BiasedIndependentProductIsExact) {
  const ApproxResult r = best_local_approx(independent_product(0.3, 0.6, 0.85), DistanceObjective{});
  EXPECT_LE(r.value, 1e-6);
}

TEST(BestLocalApprox, PcDistanceRegression) {
  ApproxOptions opts;
  opts.seed = 7;
  const ApproxResult r = best_local_approx(p_c(), DistanceObjective{}, opts);
  EXPECT_LE(r.value, 0.8284697194370797 + 1e-6);
  EXPECT_GT(r.value, 0.5);
  EXPECT_EQ(r.label, "heuristic");
  // The value is the distance of the returned model's exact distribution.
  EXPECT_NEAR(l1_distance(triangle_exact_distribution(r.model), p_c()), r.value, 1e-9);
}

TEST(BestLocalApprox, SameSeedSameResult) {
  ApproxOptions opts;
  opts.restarts = 5;
  opts.seed = 4;
  const auto a = best_local_approx(p_c(), DistanceObjective{}, opts);
  const auto b = best_local_approx(p_c(), DistanceObjective{}, opts);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.best_restart, b.best_restart);
}

TEST(BestLocalApprox, AgreementWitnessReachesOne) {
  // Deterministic all-zero outputs agree every time.
  ApproxOptions opts;
  opts.restarts = 5;
  const auto r = best_local_approx(p_c(), WitnessObjective{agreement_witness(0.0)}, opts);
  EXPECT_NEAR(r.value, 1.0, 1e-9);
}

TEST(MetaStrategy, BalancedAgreement) {
  const HypothesisTest t = triangle_test(2, [](History s) {
    int zeros = 0, ones = 0;
    for (const Round& r : s) {
      if (r.a == 0) ++zeros;
      else if (r.a == 7) ++ones;
      else return 0.0;
    }
    return zeros == ones ? 1.0 : 0.0;
  });
  const DeterministicStrategy s = meta_strategy(t, 2);
  EXPECT_EQ(s.outputs, (std::vector<std::vector<int>>(3, {0, 1})));
}

TEST(MetaStrategy, ConstantDecisionPicksAllZeros) {
  const DeterministicStrategy s = meta_strategy(triangle_test(3, [](History) { return 1.0; }), 3);
  EXPECT_EQ(s.outputs, (std::vector<std::vector<int>>(3, {0, 0, 0})));
}

TEST(MetaStrategy, ValueEqualsEnumeratedMaximum) {
  // Accept iff round 2 disagrees with round 1 for party 1 only.
  const HypothesisTest t = triangle_test(2, [](History s) {
    return ((s[0].a >> 2) != (s[1].a >> 2) && (s[0].a & 3) == (s[1].a & 3)) ? 1.0 : 0.0;
  });
  const auto best = enumerate_deterministic_max(t, 2, {2, 2, 2});
  const DeterministicStrategy s = meta_strategy(t, 2);
  EXPECT_DOUBLE_EQ(exact_acceptance(t, strategy_behavior<double>(s)), best.max_prob);
  EXPECT_EQ(s.outputs, best.argmax.front().outputs);
}

TEST(AttackDemo, DeviceOrderingAndFrequencies) {
  DemoOptions opts;
  opts.n = 1000;
  opts.trials = 200;
  opts.approx.restarts = 10;
  const DemoReport r = attack_demo(pc_ksigma_test(opts.n), opts);
  std::vector<std::string> names;
  for (const auto& e : r.entries) names.push_back(e.device);
  ASSERT_EQ(names.size(), 6u);
  EXPECT_EQ(names[0], "iid_pc");
  EXPECT_EQ(names[1], "clock");
  EXPECT_EQ(names[2], "clock_desync");

  auto rate = [&](std::size_t i) { return r.entries[i].report->accept_rate; };
  EXPECT_GE(rate(1), 0.99);
  EXPECT_NEAR(rate(3), rate(0), 0.02);  // shared sequence looks like iid P_c
  EXPECT_FALSE(r.entries[4].report.has_value());  // meta strategy skipped at n = 1000
  EXPECT_FALSE(r.entries[4].note.empty());
  EXPECT_LE(rate(5), 0.05);
  EXPECT_GT(r.best_local_distance, 0.5);

  const auto& desync = *r.entries[2].report->first_trial_frequencies;
  EXPECT_EQ(desync.counts(4, 0), 500);
  EXPECT_EQ(desync.counts(3, 0), 500);
}
