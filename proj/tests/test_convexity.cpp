#include <gtest/gtest.h>

#include "noniid/convexity.hpp"
#include "noniid/devices.hpp"
#include "noniid/lp.hpp"
#include "noniid/triangle.hpp"
#include "test_support.hpp"

using namespace noniid;

namespace {

Behavior vec2(double a, double b) { return {Alphabet(1, 2), (Mat<double>(2, 1) << a, b).finished()}; }

template <typename Scalar>
const BasicConvexDecomposition<Scalar>& decomposition(const MembershipResult<Scalar>& r) {
  return std::get<BasicConvexDecomposition<Scalar>>(r);
}

template <typename Scalar>
const BasicSeparatingFunctional<Scalar>& separator(const MembershipResult<Scalar>& r) {
  return std::get<BasicSeparatingFunctional<Scalar>>(r);
}

/// Best margin c(P) - max_Q c(Q) over a grid on the boundary of the unit
/// l-infinity ball, for two-entry behaviors.
double grid_margin(const Behavior& p, const std::vector<Behavior>& set) {
  double best = -1e9;
  constexpr int kSteps = 2000;
  for (int side = 0; side < 4; ++side)
    for (int i = 0; i <= kSteps; ++i) {
      const double t = -1.0 + 2.0 * i / kSteps;
      const double c0 = side == 0 ? 1.0 : side == 1 ? -1.0 : t;
      const double c1 = side == 2 ? 1.0 : side == 3 ? -1.0 : t;
      double alpha = -1e9;
      for (const auto& q : set) alpha = std::max(alpha, c0 * q(0, 0) + c1 * q(1, 0));
      best = std::max(best, c0 * p(0, 0) + c1 * p(1, 0) - alpha);
    }
  return best;
}

}  // namespace

// ---------------------------------------------------------------------------
// Simplex solver.

TEST(Simplex, TextbookMaximum) {
  // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18: optimum 36 at (2, 6).
  lp::Problem<double> p;
  p.A = (Mat<double>(3, 2) << 1, 0, 0, 2, 3, 2).finished();
  p.b = (Vec<double>(3) << 4, 12, 18).finished();
  p.c = (Vec<double>(2) << 3, 5).finished();
  p.senses.assign(3, lp::Sense::LessEqual);
  const auto s = lp::solve(p);
  ASSERT_EQ(s.status, lp::Status::Optimal);
  EXPECT_NEAR(s.objective, 36.0, 1e-12);
  EXPECT_NEAR(s.x[0], 2.0, 1e-12);
  EXPECT_NEAR(s.x[1], 6.0, 1e-12);
  // Strong duality.
  EXPECT_NEAR(p.b.dot(s.duals), 36.0, 1e-12);
}

TEST(Simplex, RationalDualsCertifyOptimum) {
  lp::Problem<Rational> p;
  p.A = (Mat<Rational>(2, 2) << 1, 1, 1, 3).finished();
  p.b = (Vec<Rational>(2) << 4, 6).finished();
  p.c = (Vec<Rational>(2) << 2, 3).finished();
  p.senses = {lp::Sense::LessEqual, lp::Sense::LessEqual};
  const auto s = lp::solve(p);
  ASSERT_EQ(s.status, lp::Status::Optimal);
  EXPECT_EQ(s.objective, Rational(9));
  EXPECT_EQ(p.b.dot(s.duals), s.objective);
  // Dual feasibility: A'y >= c.
  const Vec<Rational> reduced = p.A.transpose() * s.duals - p.c;
  for (Eigen::Index i = 0; i < reduced.size(); ++i) EXPECT_GE(reduced[i], Rational(0));
}

TEST(Simplex, DetectsInfeasibleAndUnbounded) {
  lp::Problem<double> infeasible;
  infeasible.A = (Mat<double>(2, 1) << 1, 1).finished();
  infeasible.b = (Vec<double>(2) << 1, 2).finished();
  infeasible.c = Vec<double>::Ones(1);
  infeasible.senses = {lp::Sense::LessEqual, lp::Sense::GreaterEqual};
  const auto a = lp::solve(infeasible);
  EXPECT_EQ(a.status, lp::Status::Infeasible);
  EXPECT_NEAR(a.infeasibility, 1.0, 1e-12);

  lp::Problem<double> unbounded;
  unbounded.A = (Mat<double>(1, 2) << 1, -1).finished();
  unbounded.b = Vec<double>::Ones(1);
  unbounded.c = (Vec<double>(2) << 1, 1).finished();
  unbounded.senses = {lp::Sense::LessEqual};
  EXPECT_EQ(lp::solve(unbounded).status, lp::Status::Unbounded);
}

TEST(Simplex, BlandRuleTerminatesOnBealesCyclingExample) {
  // Beale's example cycles under Dantzig's rule; optimum 1/20.
  lp::Problem<Rational> p;
  p.A = (Mat<Rational>(3, 4) << Rational(1, 4), -60, Rational(-1, 25), 9,  //
         Rational(1, 2), -90, Rational(-1, 50), 3,                          //
         0, 0, 1, 0)
            .finished();
  p.b = (Vec<Rational>(3) << 0, 0, 1).finished();
  p.c = (Vec<Rational>(4) << Rational(3, 4), -150, Rational(1, 50), -6).finished();
  p.senses.assign(3, lp::Sense::LessEqual);
  const auto s = lp::solve(p);
  ASSERT_EQ(s.status, lp::Status::Optimal);
  EXPECT_EQ(s.objective, Rational(1, 20));
}

TEST(Simplex, EqualityAndNegativeRightHandSides) {
  // x + y = 1, x - y >= -0.5 (so y <= x + 0.5), maximize y: y = 0.75.
  lp::Problem<double> p;
  p.A = (Mat<double>(2, 2) << 1, 1, 1, -1).finished();
  p.b = (Vec<double>(2) << 1, -0.5).finished();
  p.c = (Vec<double>(2) << 0, 1).finished();
  p.senses = {lp::Sense::Equal, lp::Sense::GreaterEqual};
  const auto s = lp::solve(p);
  ASSERT_EQ(s.status, lp::Status::Optimal);
  EXPECT_NEAR(s.objective, 0.75, 1e-12);
}

// ---------------------------------------------------------------------------
// Membership.

TEST(Membership, MidpointOfTwoVertices) {
  const std::vector<Behavior> set{vec2(1, 0), vec2(0, 1)};
  const auto r = membership<double>(vec2(0.5, 0.5), set);
  const auto& d = decomposition(r);
  ASSERT_EQ(d.weights.size(), 2u);
  EXPECT_NEAR(d.weights[0], 0.5, 1e-12);
  EXPECT_NEAR(d.weights[1], 0.5, 1e-12);
  EXPECT_LE(d.residual, 1e-15);
}

TEST(Membership, PcIsTheClockMixture) {
  const std::vector<RationalBehavior> set{triangle_point(0).cast<Rational>(), triangle_point(1).cast<Rational>()};
  const auto r = membership<Rational>(p_c().cast<Rational>(), set);
  const auto& d = decomposition(r);
  ASSERT_EQ(d.weights.size(), 2u);
  EXPECT_EQ(d.weights[0], Rational(1, 2));
  EXPECT_EQ(d.weights[1], Rational(1, 2));
  EXPECT_EQ(d.residual, 0.0);
}

TEST(Membership, NonMemberGetsMaxMarginFunctional) {
  const std::vector<Behavior> set{vec2(0, 1), vec2(0.5, 0.5)};
  const auto r = membership<double>(vec2(1, 0), set);
  const auto& s = separator(r);
  EXPECT_NEAR(s.coeffs(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(s.coeffs(1, 0), -1.0, 1e-12);
  EXPECT_NEAR(s.alpha, 0.0, 1e-12);
  EXPECT_NEAR(s.margin, grid_margin(vec2(1, 0), set), 1e-9);
  EXPECT_NEAR(s.margin, 1.0, 1e-12);
}

TEST(Separation, OnePointClosedForm) {
  const std::vector<Behavior> set{vec2(0, 1)};
  const auto s = separating_functional<double>(vec2(1, 0), set);
  EXPECT_NEAR(s.coeffs(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(s.coeffs(1, 0), -1.0, 1e-12);
  EXPECT_NEAR(s.margin, 2.0, 1e-12);
}

TEST(Separation, VertexFromOtherVertices) {
  const Alphabet alph(1, 5);
  std::vector<Behavior> others;
  for (int a = 1; a < 5; ++a) others.push_back(Behavior::point_mass(alph, a));
  const auto s = separating_functional<double>(Behavior::point_mass(alph, 0), others);
  EXPECT_GT(s.margin, 0.0);
}

TEST(Separation, MidpointIsNotSeparable) {
  const std::vector<Behavior> set{vec2(1, 0), vec2(0, 1)};
  EXPECT_THROW(separating_functional<double>(vec2(0.5, 0.5), set), NotSeparable);
}

TEST(Separation, RejectsMixedAlphabets) {
  const std::vector<Behavior> set{p_c()};
  EXPECT_THROW(membership<double>(vec2(1, 0), set), AlphabetMismatch);
}

TEST(Extremality, Examples) {
  const std::vector<Behavior> pts{triangle_point(0), triangle_point(1), p_c()};
  EXPECT_TRUE(is_extreme<double>(triangle_point(0), pts).extreme);
  const auto pc = is_extreme<double>(p_c(), pts);
  EXPECT_FALSE(pc.extreme);
  const auto& d = decomposition(*pc.certificate);
  EXPECT_NEAR(d.weights[0], 0.5, 1e-12);
  EXPECT_NEAR(d.weights[1], 0.5, 1e-12);

  const Alphabet alph(2, 3);
  std::vector<Behavior> with_uniform{Behavior::uniform(alph)};
  for (int a0 = 0; a0 < 3; ++a0)
    for (int a1 = 0; a1 < 3; ++a1) {
      Mat<double> t = Mat<double>::Zero(3, 2);
      t(a0, 0) = 1;
      t(a1, 1) = 1;
      with_uniform.emplace_back(alph, t);
    }
  EXPECT_FALSE(is_extreme<double>(Behavior::uniform(alph), with_uniform).extreme);
}

TEST(Extremality, DeterministicBehaviorsAreVertices) {
  for (int X = 1; X <= 4; ++X)
    for (int A = 2; A <= 8; ++A) {
      const Alphabet alph(X, A);
      // Deterministic behaviors with a single output per input; sample a few.
      Rng rng = make_rng(static_cast<std::uint64_t>(X * 10 + A), 0);
      std::vector<Behavior> vertices;
      for (int v = 0; v < 6; ++v) {
        Mat<double> t = Mat<double>::Zero(A, X);
        for (int x = 0; x < X; ++x) t(static_cast<int>(rng() % A), x) = 1;
        vertices.emplace_back(alph, t);
      }
      for (const auto& v : vertices) EXPECT_TRUE(is_extreme<double>(v, vertices).extreme) << X << "x" << A;
    }
}

TEST(Membership, RandomInstancesReturnExactlyOneCertificate) {
  int members = 0;
  for (int i = 0; i < 100; ++i) {
    Rng rng = make_rng(21, static_cast<std::uint64_t>(i));
    const Alphabet alph(1 + i % 4, 2 + (i / 4) % 3);
    std::vector<Behavior> set;
    const int k = 2 + static_cast<int>(rng() % 6);
    for (int j = 0; j < k; ++j) set.push_back(noniid::testing::random_grid_behavior<double>(alph, rng, 6));
    Behavior target;
    if (i % 2 == 0) {
      std::vector<double> w(static_cast<std::size_t>(k));
      const Vec<double> simplex = random_simplex_point(k, rng);
      for (int j = 0; j < k; ++j) w[static_cast<std::size_t>(j)] = simplex[j];
      target = mix<double>(set, w);
    } else {
      target = noniid::testing::random_grid_behavior<double>(alph, rng, 5);
    }
    const auto r = membership<double>(target, set);
    if (const auto* d = std::get_if<ConvexDecomposition>(&r)) {
      ++members;
      EXPECT_LE(d->residual, 1e-9);
      EXPECT_LE(static_cast<int>(d->weights.size()), target.support_size() + 1);
      double total = 0;
      for (double w : d->weights) {
        EXPECT_GE(w, 0.0);
        total += w;
      }
      EXPECT_NEAR(total, 1.0, 1e-12);
    } else {
      const auto& s = separator(r);
      EXPECT_GT(s.margin, 0.0);
      EXPECT_NEAR(s.coeffs.cwiseAbs().maxCoeff(), 1.0, 1e-12);
      for (const auto& q : set) EXPECT_LE(apply(s.coeffs, q), s.alpha + 1e-9);
    }
  }
  EXPECT_GE(members, 50);
}

TEST(Caratheodory, ReducesToSupportPlusOne) {
  // Eight points all mixing to the same interior point of a 3-simplex.
  const Alphabet alph(1, 3);
  Rng rng = make_rng(22, 0);
  std::vector<RationalBehavior> set;
  for (int j = 0; j < 8; ++j) set.push_back(noniid::testing::random_grid_behavior<Rational>(alph, rng, 4));
  BasicConvexDecomposition<Rational> dec;
  for (int j = 0; j < 8; ++j) {
    dec.indices.push_back(j);
    dec.weights.push_back(Rational(1, 8));
  }
  const RationalBehavior target = mix<Rational>(set, dec.weights);
  const auto reduced = caratheodory_reduce<Rational>(target, set, dec);
  EXPECT_LE(static_cast<int>(reduced.weights.size()), target.support_size() + 1);
  EXPECT_EQ(reduced.residual, 0.0);
}

// ---------------------------------------------------------------------------
// Linearity identity.

TEST(MixtureBound, KSigmaPcClockComponents) {
  const std::vector<Behavior> parts{triangle_point(0), triangle_point(1)};
  const std::vector<double> weights{0.5, 0.5};
  // With two rounds the bootstrap spread is about 1/2, so K is kept small.
  const std::vector<HypothesisTest> family{pc_ksigma_test(2, 0.5)};
  const auto rows = mixture_bound_demo<double>(family, parts, weights);
  ASSERT_EQ(rows.size(), 1u);
  const auto& c = rows[0].check;
  EXPECT_TRUE(rows[0].bound_holds);
  EXPECT_LE(rows[0].linearity_error, 1e-12);
  EXPECT_DOUBLE_EQ(c.max_tuple, 1.0);
  // P_0 x P_1 or P_1 x P_0: a mixed tuple.
  EXPECT_NE(c.argmax_tuple[0], c.argmax_tuple[1]);
  EXPECT_DOUBLE_EQ(c.direct, 0.5);
}

TEST(MixtureBound, ConstantDecision) {
  HypothesisTest t;
  t.alphabet = triangle_alphabet();
  t.max_rounds = 3;
  t.input_policy = fixed_input_policy<double>(Vec<double>::Ones(1));
  t.decision = [](History) { return 0.05; };
  const std::vector<Behavior> parts{triangle_point(0), triangle_point(1)};
  const std::vector<double> weights{0.25, 0.75};
  const auto rows = mixture_bound_demo<double>({t}, parts, weights);
  EXPECT_NEAR(rows[0].check.direct, 0.05, 1e-15);
  EXPECT_NEAR(rows[0].check.mixture_sum, 0.05, 1e-15);
}

TEST(MixtureBound, MartingaleWithValidNull) {
  const LinearWitness w = LinearWitness::make((Mat<double>(2, 1) << 1.0, 0.0).finished(), 0.5);
  std::vector<HypothesisTest> family;
  for (int n = 1; n <= 3; ++n) family.push_back(martingale_witness_test(w, 0.05, Vec<double>::Ones(1), n));
  const std::vector<Behavior> parts{vec2(0.5, 0.5), vec2(0.3, 0.7)};
  const std::vector<double> weights{0.5, 0.5};
  for (const auto& row : mixture_bound_demo<double>(family, parts, weights)) {
    EXPECT_LE(row.check.direct, 0.05);
    EXPECT_LE(row.check.max_tuple, 0.05);
    EXPECT_TRUE(row.bound_holds);
  }
}
