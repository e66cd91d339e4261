// Behaviors P(a|x), transcripts, frequency estimates and linear witnesses.
#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "noniid/core.hpp"

namespace noniid {

/// Input/output alphabet sizes of a single device use.
///
/// Composite outputs such as triples (a1, a2, a3) are flattened row-major:
/// index = a1 * (A2 * A3) + a2 * A3 + a3. Scenarios without inputs use X = 1.
struct Alphabet {
  int input_size = 1;
  int output_size = 2;

  Alphabet() = default;
  Alphabet(int inputs, int outputs) : input_size(inputs), output_size(outputs) {
    if (inputs < 1) throw Error("alphabet needs at least one input symbol");
    if (outputs < 2) throw Error("alphabet needs at least two output symbols");
  }

  int cells() const { return input_size * output_size; }
  friend bool operator==(const Alphabet&, const Alphabet&) = default;
};

std::string to_string(const Alphabet& alphabet);

/// Flatten composite symbol digits row-major.
int pack_symbols(std::span<const int> digits, std::span<const int> sizes);
std::vector<int> unpack_symbols(int index, std::span<const int> sizes);

/// Single-round conditional distribution P(a|x), stored as an A x X matrix
/// (rows are outputs, columns are inputs).
template <typename Scalar>
class BasicBehavior {
 public:
  using Table = Mat<Scalar>;

  BasicBehavior() = default;
  BasicBehavior(Alphabet alphabet, Table probs) : alphabet_(alphabet), probs_(std::move(probs)) {
    if (probs_.rows() != alphabet_.output_size || probs_.cols() != alphabet_.input_size) {
      throw AlphabetMismatch("table is " + std::to_string(probs_.rows()) + "x" +
                             std::to_string(probs_.cols()) + ", alphabet " + to_string(alphabet_));
    }
  }

  static BasicBehavior uniform(Alphabet alphabet) {
    return {alphabet, Table::Constant(alphabet.output_size, alphabet.input_size,
                                      Scalar(1) / Scalar(alphabet.output_size))};
  }

  /// Deterministic behavior emitting `output` for every input.
  static BasicBehavior point_mass(Alphabet alphabet, int output) {
    Table t = Table::Zero(alphabet.output_size, alphabet.input_size);
    t.row(output).setConstant(Scalar(1));
    return {alphabet, std::move(t)};
  }

  const Alphabet& alphabet() const { return alphabet_; }
  const Table& probs() const { return probs_; }
  const Scalar& operator()(int a, int x) const { return probs_(a, x); }

  /// Number of nonzero entries, written ||P||_0.
  int support_size() const {
    int count = 0;
    for (Eigen::Index i = 0; i < probs_.size(); ++i) count += probs_.data()[i] != Scalar(0);
    return count;
  }

  template <typename Other>
  BasicBehavior<Other> cast() const {
    Mat<Other> t(probs_.rows(), probs_.cols());
    for (Eigen::Index j = 0; j < t.cols(); ++j)
      for (Eigen::Index i = 0; i < t.rows(); ++i) {
        if constexpr (std::is_same_v<Other, double>) {
          t(i, j) = to_double(probs_(i, j));
        } else {
          t(i, j) = Other(probs_(i, j));
        }
      }
    return {alphabet_, std::move(t)};
  }

  /// Flattened x-major vector (all outputs of input 0, then input 1, ...).
  Vec<Scalar> flat() const { return probs_.reshaped(); }

 private:
  Alphabet alphabet_;
  Table probs_;
};

using Behavior = BasicBehavior<double>;
using RationalBehavior = BasicBehavior<Rational>;

/// Convex mixture sum_i w_i P_i; all behaviors must share one alphabet.
template <typename Scalar>
BasicBehavior<Scalar> mix(std::span<const BasicBehavior<Scalar>> parts, std::span<const Scalar> weights) {
  if (parts.empty() || parts.size() != weights.size()) throw Error("mix: need one weight per behavior");
  Mat<Scalar> t = Mat<Scalar>::Zero(parts[0].probs().rows(), parts[0].probs().cols());
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (!(parts[i].alphabet() == parts[0].alphabet())) throw AlphabetMismatch("mix");
    t += weights[i] * parts[i].probs();
  }
  return {parts[0].alphabet(), std::move(t)};
}

struct Violation {
  enum class Kind { NegativeEntry, NotNormalized };
  Kind kind;
  int a = -1;     // offending output (NegativeEntry only)
  int x = -1;
  double amount;  // the negative value, or (sum - 1) for NotNormalized
};

std::string describe(const Violation& v);

/// Empty result means the behavior is valid.
std::vector<Violation> validate_behavior(const Behavior& behavior, double tol = 1e-12);
void require_valid(const Behavior& behavior, double tol = 1e-12);

// ---------------------------------------------------------------------------
// Transcripts.

/// Marks a round in which the device was not queried (variable-length tests).
inline constexpr int kNullSymbol = -1;

struct Round {
  int x;
  int a;
  friend bool operator==(const Round&, const Round&) = default;
};

using Transcript = std::vector<Round>;
using History = std::span<const Round>;

struct FrequencyTable {
  Alphabet alphabet;
  Eigen::MatrixXi counts;          // A x X
  Behavior estimate;               // undefined columns are left uniform
  std::vector<int> undefined_inputs;

  bool defined(int x) const;
  long total() const { return counts.sum(); }
  /// Exact rational estimate (undefined columns uniform).
  RationalBehavior exact_estimate() const;
};

/// Empirical conditionals; rounds carrying kNullSymbol are skipped.
FrequencyTable frequency_estimate(History transcript, const Alphabet& alphabet);
FrequencyTable frequency_estimate(const Eigen::MatrixXi& counts, const Alphabet& alphabet);

/// Worst-case-input l1 distance: max_x sum_a |P(a|x) - Q(a|x)|.
double l1_distance(const Behavior& p, const Behavior& q);

// ---------------------------------------------------------------------------
// Linear witnesses F(P) = sum_{a,x} f(a,x) w(x) P(a|x).

struct LinearWitness {
  Mat<double> coeffs;        // A x X
  Vec<double> input_weights; // X
  double alpha = 0.0;
  double score_min = 0.0;
  double score_max = 0.0;

  /// Uniform input weights and the tightest score range.
  static LinearWitness make(Mat<double> coeffs, double alpha);
  static LinearWitness make(Mat<double> coeffs, Vec<double> weights, double alpha);

  Alphabet alphabet() const {
    return {static_cast<int>(coeffs.cols()), static_cast<int>(coeffs.rows())};
  }
};

double evaluate_witness(const LinearWitness& witness, const Behavior& behavior);

// ---------------------------------------------------------------------------
// n-round behaviors.

/// The most general n-round behavior: marginals P_k(a | x, s_{k-1}).
/// `marginal(k, x, history)` returns a length-A probability vector; k is
/// zero-based and history holds the k previous rounds.
template <typename Scalar>
struct NRoundBehavior {
  Alphabet alphabet;
  int rounds = 0;
  std::function<Vec<Scalar>(int k, int x, History history)> marginal;
  std::string descriptor;
};

/// Behavior whose round-k marginal is rounds[k] regardless of history.
template <typename Scalar>
NRoundBehavior<Scalar> product_behavior(std::vector<BasicBehavior<Scalar>> rounds) {
  if (rounds.empty()) throw Error("product_behavior: empty list");
  const Alphabet alphabet = rounds.front().alphabet();
  for (const auto& r : rounds)
    if (!(r.alphabet() == alphabet)) throw AlphabetMismatch("product_behavior");
  NRoundBehavior<Scalar> out;
  out.alphabet = alphabet;
  out.rounds = static_cast<int>(rounds.size());
  out.descriptor = "product(" + std::to_string(rounds.size()) + ")";
  out.marginal = [rounds = std::move(rounds)](int k, int x, History) -> Vec<Scalar> {
    return rounds.at(static_cast<std::size_t>(k)).probs().col(x);
  };
  return out;
}

/// P^{\otimes n}.
template <typename Scalar>
NRoundBehavior<Scalar> iid_behavior(const BasicBehavior<Scalar>& p, int n) {
  auto out = product_behavior(std::vector<BasicBehavior<Scalar>>(static_cast<std::size_t>(n), p));
  out.descriptor = "iid";
  return out;
}

}  // namespace noniid
