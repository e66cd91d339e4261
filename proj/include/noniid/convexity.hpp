// Convex-hull membership with Caratheodory decompositions, separating
// functionals and the linearity identity behind the no-go for non-convex sets.
#pragma once

#include <algorithm>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "noniid/correlations.hpp"
#include "noniid/hypothesis.hpp"
#include "noniid/lp.hpp"

namespace noniid {

template <typename Scalar>
struct BasicConvexDecomposition {
  std::vector<int> indices;  // into the candidate set
  std::vector<Scalar> weights;
  std::vector<BasicBehavior<Scalar>> components;
  double residual = 0.0;  // ||sum_i w_i P_i - P||_inf
};

/// c(a, x) with ||c||_inf = 1, threshold alpha = max_Q c(Q) and
/// margin = c(P) - alpha > 0.
template <typename Scalar>
struct BasicSeparatingFunctional {
  Mat<Scalar> coeffs;
  Scalar alpha{};
  Scalar margin{};
};

template <typename Scalar>
using MembershipResult = std::variant<BasicConvexDecomposition<Scalar>, BasicSeparatingFunctional<Scalar>>;

using ConvexDecomposition = BasicConvexDecomposition<double>;
using SeparatingFunctional = BasicSeparatingFunctional<double>;

template <typename Scalar>
Scalar apply(const Mat<Scalar>& coeffs, const BasicBehavior<Scalar>& p) {
  return coeffs.cwiseProduct(p.probs()).sum();
}

namespace detail {

/// A nonzero kernel vector of M, if any (Gauss-Jordan elimination).
template <typename Scalar>
std::optional<Vec<Scalar>> null_vector(Mat<Scalar> M) {
  const Eigen::Index rows = M.rows();
  const Eigen::Index cols = M.cols();
  const Scalar tol = scalar_tolerance<Scalar>(1e-12);
  std::vector<Eigen::Index> pivot_col_of_row;
  std::vector<bool> is_pivot(static_cast<std::size_t>(cols), false);
  Eigen::Index r = 0;
  for (Eigen::Index c = 0; c < cols && r < rows; ++c) {
    Eigen::Index best = -1;
    Scalar best_abs(0);
    for (Eigen::Index i = r; i < rows; ++i) {
      Scalar v = M(i, c) < Scalar(0) ? Scalar(-M(i, c)) : Scalar(M(i, c));
      if (v > tol && (best < 0 || v > best_abs)) {
        best = i;
        best_abs = v;
      }
    }
    if (best < 0) continue;
    M.row(r).swap(M.row(best));
    M.row(r) /= Scalar(M(r, c));
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (i == r || M(i, c) == Scalar(0)) continue;
      M.row(i) -= Scalar(M(i, c)) * M.row(r);
    }
    is_pivot[static_cast<std::size_t>(c)] = true;
    pivot_col_of_row.push_back(c);
    ++r;
  }
  for (Eigen::Index free = 0; free < cols; ++free) {
    if (is_pivot[static_cast<std::size_t>(free)]) continue;
    Vec<Scalar> v = Vec<Scalar>::Zero(cols);
    v[free] = Scalar(1);
    for (std::size_t i = 0; i < pivot_col_of_row.size(); ++i)
      v[pivot_col_of_row[i]] = -M(static_cast<Eigen::Index>(i), free);
    return v;
  }
  return std::nullopt;
}

template <typename Scalar>
bool is_zero_entry(const Scalar& v) {
  if constexpr (is_exact_v<Scalar>) {
    return v == Scalar(0);
  } else {
    return v <= 1e-12;
  }
}

template <typename Scalar>
double residual_inf(const BasicBehavior<Scalar>& target, std::span<const BasicBehavior<Scalar>> set,
                    const std::vector<int>& indices, const std::vector<Scalar>& weights) {
  Mat<Scalar> sum = -target.probs();
  for (std::size_t i = 0; i < indices.size(); ++i) sum += weights[i] * set[indices[i]].probs();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < sum.size(); ++i) worst = std::max(worst, std::abs(to_double(Scalar(sum.data()[i]))));
  return worst;
}

}  // namespace detail

/// Shrink a convex decomposition of `target` until its components are
/// affinely independent on the support of `target`, leaving at most
/// ||target||_0 + 1 of them. Weights stay nonnegative and the mixture is
/// unchanged (exactly, for rationals).
template <typename Scalar>
BasicConvexDecomposition<Scalar> caratheodory_reduce(const BasicBehavior<Scalar>& target,
                                                     std::span<const BasicBehavior<Scalar>> set,
                                                     BasicConvexDecomposition<Scalar> decomposition) {
  const Mat<Scalar>& p = target.probs();
  std::vector<Eigen::Index> support;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (!detail::is_zero_entry(p.data()[i])) support.push_back(i);

  auto& idx = decomposition.indices;
  auto& w = decomposition.weights;
  for (;;) {
    // Drop zero weights.
    std::vector<int> keep_idx;
    std::vector<Scalar> keep_w;
    for (std::size_t j = 0; j < idx.size(); ++j) {
      if (w[j] > scalar_tolerance<Scalar>(1e-15)) {
        keep_idx.push_back(idx[j]);
        keep_w.push_back(w[j]);
      }
    }
    idx = std::move(keep_idx);
    w = std::move(keep_w);
    const auto k = static_cast<Eigen::Index>(idx.size());
    if (k <= 1) break;
    Mat<Scalar> M(static_cast<Eigen::Index>(support.size()) + 1, k);
    for (Eigen::Index j = 0; j < k; ++j) {
      const Mat<Scalar>& q = set[idx[j]].probs();
      for (std::size_t r = 0; r < support.size(); ++r) M(static_cast<Eigen::Index>(r), j) = q.data()[support[r]];
      M(M.rows() - 1, j) = Scalar(1);
    }
    auto mu = detail::null_vector<Scalar>(M);
    if (!mu) break;
    bool any_positive = false;
    for (Eigen::Index j = 0; j < k; ++j) any_positive = any_positive || (*mu)[j] > Scalar(0);
    if (!any_positive) *mu = -*mu;
    // Largest step keeping all weights nonnegative; it zeroes at least one.
    Eigen::Index arg = -1;
    Scalar step(0);
    for (Eigen::Index j = 0; j < k; ++j) {
      if (!((*mu)[j] > Scalar(0))) continue;
      Scalar t = w[j] / (*mu)[j];
      if (arg < 0 || t < step) {
        arg = j;
        step = t;
      }
    }
    for (Eigen::Index j = 0; j < k; ++j) w[j] -= step * (*mu)[j];
    w[arg] = Scalar(0);
    for (auto& v : w)
      if (v < Scalar(0)) v = Scalar(0);
  }
  if constexpr (!is_exact_v<Scalar>) {
    Scalar total(0);
    for (const auto& v : w) total += v;
    for (auto& v : w) v /= total;
  }
  decomposition.components.clear();
  for (int i : idx) decomposition.components.push_back(set[i]);
  decomposition.residual = detail::residual_inf(target, set, idx, w);
  return decomposition;
}

/// Decide P in conv(set).
///
/// Solves the covering LP
///   min 2 sum_j z_j  s.t.  sum_i mu_i Q_i + z >= P,  sum_i mu_i <= 1,  mu, z >= 0,
/// whose optimum is zero exactly when P is a convex mixture of the set. Its LP
/// dual is the max-margin separation problem over c = u - 1 with u in [0, 2],
/// so the same solve yields either the mixture (primal) or the separating
/// functional (dual), never both.
template <typename Scalar>
MembershipResult<Scalar> membership(const BasicBehavior<Scalar>& target, std::span<const BasicBehavior<Scalar>> set) {
  if (set.empty()) throw Error("membership: candidate set is empty");
  for (const auto& q : set)
    if (!(q.alphabet() == target.alphabet())) throw AlphabetMismatch("membership");
  const auto d = target.probs().size();
  const auto k = static_cast<Eigen::Index>(set.size());

  lp::Problem<Scalar> cover;
  cover.A = Mat<Scalar>::Zero(d + 1, k + d);
  cover.b = Vec<Scalar>::Zero(d + 1);
  cover.c = Vec<Scalar>::Zero(k + d);
  for (Eigen::Index i = 0; i < k; ++i) {
    const Mat<Scalar>& q = set[static_cast<std::size_t>(i)].probs();
    for (Eigen::Index j = 0; j < d; ++j) cover.A(j, i) = q.data()[j];
    cover.A(d, i) = Scalar(1);
  }
  for (Eigen::Index j = 0; j < d; ++j) {
    cover.A(j, k + j) = Scalar(1);
    cover.b[j] = target.probs().data()[j];
    cover.c[k + j] = Scalar(-2);
    cover.senses.push_back(lp::Sense::GreaterEqual);
  }
  cover.b[d] = Scalar(1);
  cover.senses.push_back(lp::Sense::LessEqual);

  const auto sol = lp::solve(cover);
  if (sol.status != lp::Status::Optimal) throw Error("membership: covering LP " + lp::to_string(sol.status));
  const Scalar gap = -sol.objective;

  if (gap > scalar_tolerance<Scalar>(lp::kFeasibilityTol)) {
    BasicSeparatingFunctional<Scalar> sep;
    sep.coeffs.resize(target.probs().rows(), target.probs().cols());
    for (Eigen::Index j = 0; j < d; ++j) sep.coeffs.data()[j] = -sol.duals[j] - Scalar(1);
    Scalar scale(0);
    for (Eigen::Index j = 0; j < d; ++j) {
      Scalar v = sep.coeffs.data()[j];
      if (v < Scalar(0)) v = -v;
      if (v > scale) scale = v;
    }
    if (scale > Scalar(0)) sep.coeffs /= scale;
    sep.alpha = apply(sep.coeffs, set[0]);
    for (const auto& q : set) sep.alpha = std::max<Scalar>(sep.alpha, apply(sep.coeffs, q));
    sep.margin = apply(sep.coeffs, target) - sep.alpha;
    return sep;
  }

  // Components with visible mass outside supp(P) only carry rounding-level
  // weight; dropping them keeps the support argument of the reduction exact.
  auto off_support = [&](Eigen::Index i) {
    if constexpr (is_exact_v<Scalar>) {
      return false;
    } else {
      const Mat<Scalar>& q = set[static_cast<std::size_t>(i)].probs();
      for (Eigen::Index j = 0; j < d; ++j)
        if (detail::is_zero_entry(target.probs().data()[j]) && q.data()[j] > 1e-7) return true;
      return false;
    }
  };
  BasicConvexDecomposition<Scalar> dec;
  Scalar total(0);
  for (Eigen::Index i = 0; i < k; ++i) {
    if (sol.x[i] > Scalar(0) && !off_support(i)) {
      dec.indices.push_back(static_cast<int>(i));
      dec.weights.push_back(sol.x[i]);
      total += sol.x[i];
    }
  }
  if (dec.indices.empty()) throw Error("membership: degenerate mixture");
  for (auto& w : dec.weights) w /= total;
  return caratheodory_reduce(target, set, std::move(dec));
}

/// Max-margin functional separating P from conv(set); throws NotSeparable
/// when P is a member.
template <typename Scalar>
BasicSeparatingFunctional<Scalar> separating_functional(const BasicBehavior<Scalar>& target,
                                                        std::span<const BasicBehavior<Scalar>> set) {
  auto result = membership(target, set);
  if (auto* sep = std::get_if<BasicSeparatingFunctional<Scalar>>(&result)) return std::move(*sep);
  throw NotSeparable("target lies in the convex hull (residual " +
                     std::to_string(std::get<BasicConvexDecomposition<Scalar>>(result).residual) + ")");
}

template <typename Scalar>
struct BasicExtremality {
  bool extreme = false;
  /// Decomposition over the other points, or the functional isolating P
  /// (absent when P is the only point).
  std::optional<MembershipResult<Scalar>> certificate;
};

/// P is extreme in conv(set) iff it is not a mixture of the other points.
template <typename Scalar>
BasicExtremality<Scalar> is_extreme(const BasicBehavior<Scalar>& target, std::span<const BasicBehavior<Scalar>> set) {
  std::vector<BasicBehavior<Scalar>> others;
  for (const auto& q : set) {
    const bool same = [&] {
      if constexpr (is_exact_v<Scalar>) {
        return q.probs() == target.probs();
      } else {
        return (q.probs() - target.probs()).cwiseAbs().maxCoeff() <= 1e-12;
      }
    }();
    if (!same) others.push_back(q);
  }
  BasicExtremality<Scalar> out;
  if (others.empty()) {
    out.extreme = true;
    return out;
  }
  auto result = membership<Scalar>(target, others);
  out.extreme = std::holds_alternative<BasicSeparatingFunctional<Scalar>>(result);
  out.certificate = std::move(result);
  return out;
}

// ---------------------------------------------------------------------------
// Linearity of P_T in the n-round behavior.

template <typename Scalar>
struct BasicLinearityCheck {
  int n = 0;
  Scalar direct{};        // P_T(1 | P^{\otimes n}) with P = sum_i w_i P_i
  Scalar mixture_sum{};   // sum over tuples of w_{i1}..w_{in} P_T(1 | P_{i1} x .. x P_{in})
  Scalar max_tuple{};
  Scalar min_tuple{};
  std::vector<int> argmax_tuple;
  long tuples = 0;
};

using LinearityCheck = BasicLinearityCheck<double>;

/// Evaluate both sides of the multilinear expansion for the test's length n.
template <typename Scalar>
BasicLinearityCheck<Scalar> linearity_check(const BasicHypothesisTest<Scalar>& test,
                                            std::span<const BasicBehavior<Scalar>> components,
                                            std::span<const Scalar> weights) {
  if (components.empty() || components.size() != weights.size())
    throw Error("linearity_check: need one weight per component");
  const int n = test.max_rounds;
  const auto k = static_cast<long>(components.size());
  const BasicBehavior<Scalar> mixed = mix(components, weights);

  BasicLinearityCheck<Scalar> out;
  out.n = n;
  out.direct = exact_acceptance(test, iid_behavior(mixed, n));
  long tuples = 1;
  for (int r = 0; r < n; ++r) tuples *= k;
  out.tuples = tuples;
  out.mixture_sum = Scalar(0);
  std::vector<int> tuple(static_cast<std::size_t>(n), 0);
  for (long t = 0; t < tuples; ++t) {
    long rest = t;
    Scalar lambda(1);
    std::vector<BasicBehavior<Scalar>> rounds;
    for (int r = n - 1; r >= 0; --r) {
      tuple[static_cast<std::size_t>(r)] = static_cast<int>(rest % k);
      rest /= k;
    }
    for (int r = 0; r < n; ++r) {
      lambda *= weights[static_cast<std::size_t>(tuple[static_cast<std::size_t>(r)])];
      rounds.push_back(components[static_cast<std::size_t>(tuple[static_cast<std::size_t>(r)])]);
    }
    const Scalar value = exact_acceptance(test, product_behavior(std::move(rounds)));
    out.mixture_sum += lambda * value;
    if (t == 0 || value > out.max_tuple) {
      out.max_tuple = value;
      out.argmax_tuple = tuple;
    }
    if (t == 0 || value < out.min_tuple) out.min_tuple = value;
  }
  return out;
}

/// One row per test length: P_T(1 | P^{\otimes n}) against the component
/// products. `bound_holds` records direct <= max_tuple.
template <typename Scalar>
struct BasicMixtureBoundRow {
  BasicLinearityCheck<Scalar> check;
  bool bound_holds = false;
  double linearity_error = 0.0;
};

template <typename Scalar>
std::vector<BasicMixtureBoundRow<Scalar>> mixture_bound_demo(const std::vector<BasicHypothesisTest<Scalar>>& family,
                                              std::span<const BasicBehavior<Scalar>> components,
                                              std::span<const Scalar> weights) {
  std::vector<BasicMixtureBoundRow<Scalar>> rows;
  for (const auto& test : family) {
    BasicMixtureBoundRow<Scalar> row;
    row.check = linearity_check(test, components, weights);
    const Scalar slack = scalar_tolerance<Scalar>(1e-12);
    row.bound_holds = row.check.direct <= row.check.max_tuple + slack;
    row.linearity_error = std::abs(to_double(Scalar(row.check.direct - row.check.mixture_sum)));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace noniid
