// Dense two-phase primal simplex with Bland's rule, templated on the scalar.
//
// With Scalar = Rational every pivot is exact and the returned primal/dual
// pair is an exact certificate; with double, comparisons use a fixed
// feasibility tolerance.
#pragma once

#include <string>
#include <vector>

#include "noniid/core.hpp"

namespace noniid::lp {

enum class Sense { LessEqual, Equal, GreaterEqual };
enum class Status { Optimal, Infeasible, Unbounded };

std::string to_string(Status status);

/// maximize c'x subject to A x (sense) b, x >= 0.
template <typename Scalar>
struct Problem {
  Mat<Scalar> A;
  Vec<Scalar> b;
  Vec<Scalar> c;
  std::vector<Sense> senses;
};

template <typename Scalar>
struct Solution {
  Status status = Status::Infeasible;
  Vec<Scalar> x;
  /// Row multipliers y with b'y = c'x at optimum (y >= 0 on <= rows,
  /// y <= 0 on >= rows).
  Vec<Scalar> duals;
  Scalar objective{};
  /// Phase-one optimum: the least total constraint violation (0 iff feasible).
  Scalar infeasibility{};
  int pivots = 0;
};

inline constexpr double kFeasibilityTol = 1e-9;
inline constexpr double kPivotTol = 1e-11;

namespace detail {

template <typename Scalar>
class Tableau {
 public:
  // Column layout: [structural | slack/surplus | artificial | rhs].
  explicit Tableau(const Problem<Scalar>& p) : m_(static_cast<int>(p.A.rows())), n_(static_cast<int>(p.A.cols())) {
    if (p.b.size() != m_ || p.c.size() != n_ || static_cast<int>(p.senses.size()) != m_)
      throw Error("lp: inconsistent problem dimensions");
    row_sign_.assign(m_, 1);
    identity_col_.assign(m_, -1);
    int slacks = 0;
    int artificials = 0;
    for (int i = 0; i < m_; ++i) {
      Sense s = p.senses[i];
      if (p.b[i] < Scalar(0)) {
        row_sign_[i] = -1;
        if (s == Sense::LessEqual) s = Sense::GreaterEqual;
        else if (s == Sense::GreaterEqual) s = Sense::LessEqual;
      }
      senses_.push_back(s);
      if (s != Sense::Equal) ++slacks;
      if (s != Sense::LessEqual) ++artificials;
    }
    art_begin_ = n_ + slacks;
    cols_ = art_begin_ + artificials;
    T_ = Mat<Scalar>::Zero(m_ + 1, cols_ + 1);
    basis_.assign(m_, -1);
    int next_slack = n_;
    int next_art = art_begin_;
    for (int i = 0; i < m_; ++i) {
      const Scalar sign(row_sign_[i]);
      T_.row(i).head(n_) = sign * p.A.row(i);
      T_(i, cols_) = sign * p.b[i];
      if (senses_[i] == Sense::LessEqual) {
        T_(i, next_slack) = Scalar(1);
        identity_col_[i] = next_slack;
        basis_[i] = next_slack++;
      } else {
        if (senses_[i] == Sense::GreaterEqual) {
          T_(i, next_slack) = Scalar(-1);
          ++next_slack;
        }
        T_(i, next_art) = Scalar(1);
        identity_col_[i] = next_art;
        basis_[i] = next_art++;
      }
    }
    c_ = Vec<Scalar>::Zero(cols_);
    c_.head(n_) = p.c;
  }

  Solution<Scalar> solve() {
    Solution<Scalar> out;
    // Phase one: maximize -(sum of artificials).
    Vec<Scalar> phase1 = Vec<Scalar>::Zero(cols_);
    for (int j = art_begin_; j < cols_; ++j) phase1[j] = Scalar(-1);
    load_objective(phase1);
    run(cols_, out.pivots);  // phase one is bounded
    out.infeasibility = -T_(m_, cols_);
    if (out.infeasibility > tol()) {
      out.status = Status::Infeasible;
      return out;
    }
    drive_out_artificials(out.pivots);
    // Phase two: artificials may no longer enter.
    load_objective(c_);
    if (!run(art_begin_, out.pivots)) {
      out.status = Status::Unbounded;
      return out;
    }
    out.status = Status::Optimal;
    out.x = Vec<Scalar>::Zero(n_);
    for (int i = 0; i < m_; ++i)
      if (basis_[i] >= 0 && basis_[i] < n_) out.x[basis_[i]] = T_(i, cols_);
    out.objective = T_(m_, cols_);
    // Reduced cost of row i's initial identity column equals its multiplier
    // (in the sign-normalized row); undo the normalization.
    out.duals = Vec<Scalar>::Zero(m_);
    for (int i = 0; i < m_; ++i)
      out.duals[i] = Scalar(row_sign_[i]) * T_(m_, identity_col_[i]);
    return out;
  }

 private:
  static Scalar tol() { return scalar_tolerance<Scalar>(kFeasibilityTol); }
  static Scalar pivot_tol() { return scalar_tolerance<Scalar>(kPivotTol); }

  // Objective row holds reduced costs r_j = c_B B^-1 A_j - c_j and, in the
  // rhs column, the current objective value.
  void load_objective(const Vec<Scalar>& costs) {
    T_.row(m_).setZero();
    T_.row(m_).head(cols_) = -costs.transpose();
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] < 0) continue;
      const Scalar cb = costs[basis_[i]];
      if (cb != Scalar(0)) T_.row(m_) += cb * T_.row(i);
    }
  }

  void pivot(int row, int col) {
    const Scalar inv = Scalar(1) / T_(row, col);
    T_.row(row) *= inv;
    T_(row, col) = Scalar(1);
    for (int i = 0; i <= m_; ++i) {
      if (i == row) continue;
      const Scalar f = T_(i, col);
      if (f == Scalar(0)) continue;
      T_.row(i) -= f * T_.row(row);
      T_(i, col) = Scalar(0);
    }
    basis_[row] = col;
  }

  // Bland's rule: lowest-index improving column, lowest-index leaving variable
  // among ratio ties. Returns false when unbounded.
  bool run(int allowed_cols, int& pivots) {
    for (;;) {
      int enter = -1;
      for (int j = 0; j < allowed_cols; ++j) {
        if (T_(m_, j) < -tol()) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return true;
      int leave = -1;
      Scalar best_ratio{};
      for (int i = 0; i < m_; ++i) {
        if (basis_[i] < 0 || !(T_(i, enter) > pivot_tol())) continue;
        Scalar ratio = T_(i, cols_) / T_(i, enter);
        if (leave < 0 || ratio < best_ratio - tol()) {
          leave = i;
          best_ratio = ratio;
        } else if (!(ratio > best_ratio + tol()) && basis_[i] < basis_[leave]) {
          leave = i;
          if (ratio < best_ratio) best_ratio = ratio;
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
      ++pivots;
    }
  }

  void drive_out_artificials(int& pivots) {
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] < art_begin_) continue;
      int col = -1;
      Scalar best{};
      for (int j = 0; j < art_begin_; ++j) {
        const Scalar v = T_(i, j) < Scalar(0) ? Scalar(-T_(i, j)) : Scalar(T_(i, j));
        if (v > pivot_tol() && (col < 0 || v > best)) {
          col = j;
          best = v;
        }
      }
      if (col >= 0) {
        pivot(i, col);
        ++pivots;
      }
      // Otherwise the row is redundant; its artificial stays basic at zero
      // and phase two never lets artificials re-enter.
    }
  }

  int m_;
  int n_;
  int cols_ = 0;
  int art_begin_ = 0;
  Mat<Scalar> T_;
  Vec<Scalar> c_;
  std::vector<int> basis_;
  std::vector<int> row_sign_;
  std::vector<int> identity_col_;
  std::vector<Sense> senses_;
};

}  // namespace detail

template <typename Scalar>
Solution<Scalar> solve(const Problem<Scalar>& problem) {
  return detail::Tableau<Scalar>(problem).solve();
}

inline std::string to_string(Status status) {
  switch (status) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
  }
  return "unknown";
}

}  // namespace noniid::lp
