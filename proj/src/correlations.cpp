#include "noniid/correlations.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace noniid {

std::string to_string(const Alphabet& alphabet) {
  return "(X=" + std::to_string(alphabet.input_size) + ", A=" + std::to_string(alphabet.output_size) + ")";
}

int pack_symbols(std::span<const int> digits, std::span<const int> sizes) {
  if (digits.size() != sizes.size()) throw Error("pack_symbols: arity mismatch");
  int index = 0;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (digits[i] < 0 || digits[i] >= sizes[i]) throw SymbolOutOfRange("pack_symbols: digit out of range");
    index = index * sizes[i] + digits[i];
  }
  return index;
}

std::vector<int> unpack_symbols(int index, std::span<const int> sizes) {
  std::vector<int> digits(sizes.size());
  for (std::size_t i = sizes.size(); i-- > 0;) {
    digits[i] = index % sizes[i];
    index /= sizes[i];
  }
  if (index != 0) throw SymbolOutOfRange("unpack_symbols: index out of range");
  return digits;
}

std::string describe(const Violation& v) {
  std::ostringstream os;
  if (v.kind == Violation::Kind::NegativeEntry) {
    os << "NegativeEntry(a=" << v.a << ", x=" << v.x << ", value=" << v.amount << ")";
  } else {
    os << "NotNormalized(x=" << v.x << ", deficit=" << v.amount << ")";
  }
  return os.str();
}

std::vector<Violation> validate_behavior(const Behavior& behavior, double tol) {
  std::vector<Violation> out;
  const auto& t = behavior.probs();
  for (int x = 0; x < t.cols(); ++x) {
    for (int a = 0; a < t.rows(); ++a) {
      if (!(t(a, x) >= 0.0)) out.push_back({Violation::Kind::NegativeEntry, a, x, t(a, x)});
    }
  }
  // Normalization is only meaningful once signs are fine.
  if (!out.empty()) return out;
  for (int x = 0; x < t.cols(); ++x) {
    const double excess = t.col(x).sum() - 1.0;
    if (!(std::abs(excess) <= tol)) out.push_back({Violation::Kind::NotNormalized, -1, x, excess});
  }
  return out;
}

void require_valid(const Behavior& behavior, double tol) {
  const auto violations = validate_behavior(behavior, tol);
  if (!violations.empty()) throw InvalidBehavior(describe(violations.front()));
}

bool FrequencyTable::defined(int x) const {
  return std::find(undefined_inputs.begin(), undefined_inputs.end(), x) == undefined_inputs.end();
}

RationalBehavior FrequencyTable::exact_estimate() const {
  Mat<Rational> t(alphabet.output_size, alphabet.input_size);
  for (int x = 0; x < alphabet.input_size; ++x) {
    const long total = counts.col(x).sum();
    for (int a = 0; a < alphabet.output_size; ++a) {
      t(a, x) = total > 0 ? Rational(counts(a, x), total) : Rational(1, alphabet.output_size);
    }
  }
  return {alphabet, std::move(t)};
}

FrequencyTable frequency_estimate(const Eigen::MatrixXi& counts, const Alphabet& alphabet) {
  if (counts.rows() != alphabet.output_size || counts.cols() != alphabet.input_size)
    throw AlphabetMismatch("count table shape");
  FrequencyTable table;
  table.alphabet = alphabet;
  table.counts = counts;
  Mat<double> est(alphabet.output_size, alphabet.input_size);
  for (int x = 0; x < alphabet.input_size; ++x) {
    const long total = counts.col(x).sum();
    if (total == 0) {
      table.undefined_inputs.push_back(x);
      est.col(x).setConstant(1.0 / alphabet.output_size);
    } else {
      est.col(x) = counts.col(x).cast<double>() / static_cast<double>(total);
    }
  }
  table.estimate = Behavior(alphabet, std::move(est));
  return table;
}

FrequencyTable frequency_estimate(History transcript, const Alphabet& alphabet) {
  Eigen::MatrixXi counts = Eigen::MatrixXi::Zero(alphabet.output_size, alphabet.input_size);
  for (const Round& r : transcript) {
    if (r.x == kNullSymbol) continue;
    if (r.x < 0 || r.x >= alphabet.input_size || r.a < 0 || r.a >= alphabet.output_size)
      throw SymbolOutOfRange("transcript symbol outside " + to_string(alphabet));
    ++counts(r.a, r.x);
  }
  return frequency_estimate(counts, alphabet);
}

double l1_distance(const Behavior& p, const Behavior& q) {
  if (!(p.alphabet() == q.alphabet())) throw AlphabetMismatch("l1_distance");
  return (p.probs() - q.probs()).cwiseAbs().colwise().sum().maxCoeff();
}

LinearWitness LinearWitness::make(Mat<double> coeffs, double alpha) {
  const auto inputs = coeffs.cols();
  return make(std::move(coeffs), Vec<double>::Constant(inputs, 1.0 / static_cast<double>(inputs)), alpha);
}

LinearWitness LinearWitness::make(Mat<double> coeffs, Vec<double> weights, double alpha) {
  if (weights.size() != coeffs.cols()) throw AlphabetMismatch("witness weights");
  LinearWitness w;
  w.score_min = coeffs.minCoeff();
  w.score_max = coeffs.maxCoeff();
  w.coeffs = std::move(coeffs);
  w.input_weights = std::move(weights);
  w.alpha = alpha;
  return w;
}

double evaluate_witness(const LinearWitness& witness, const Behavior& behavior) {
  if (witness.coeffs.rows() != behavior.probs().rows() || witness.coeffs.cols() != behavior.probs().cols())
    throw AlphabetMismatch("evaluate_witness");
  return (witness.coeffs.cwiseProduct(behavior.probs()).colwise().sum().transpose().array() *
          witness.input_weights.array())
      .sum();
}

}  // namespace noniid
