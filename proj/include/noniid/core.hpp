// Shared scalar types, error classes and seeded random streams.
#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>

#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/eigen.hpp>
#include <Eigen/Dense>

namespace noniid {

using Rational = boost::multiprecision::mpq_rational;

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
inline constexpr bool is_exact_v = std::is_same_v<Scalar, Rational>;

template <typename Scalar>
double to_double(const Scalar& value) {
  if constexpr (is_exact_v<Scalar>) {
    return value.template convert_to<double>();
  } else {
    return static_cast<double>(value);
  }
}

/// Comparison slack for a scalar backend: zero for exact arithmetic.
template <typename Scalar>
Scalar scalar_tolerance(double tol) {
  if constexpr (is_exact_v<Scalar>) {
    return Scalar(0);
  } else {
    return Scalar(tol);
  }
}

// ---------------------------------------------------------------------------
// Errors. Every failure mode named by the public contracts has its own type so
// callers (and the CLI exit-code mapping) can dispatch on it.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class AlphabetMismatch : public Error {
 public:
  explicit AlphabetMismatch(const std::string& what) : Error("alphabet mismatch: " + what) {}
};

class InvalidBehavior : public Error {
 public:
  using Error::Error;
};

class SymbolOutOfRange : public Error {
 public:
  using Error::Error;
};

/// Raised when an exhaustive computation would exceed its size budget.
class ResourceOverflow : public Error {
 public:
  using Error::Error;
};

class StateSpaceTooLarge : public ResourceOverflow {
 public:
  using ResourceOverflow::ResourceOverflow;
};

class SearchSpaceTooLarge : public ResourceOverflow {
 public:
  using ResourceOverflow::ResourceOverflow;
};

class SupportTooLarge : public ResourceOverflow {
 public:
  using ResourceOverflow::ResourceOverflow;
};

class SequenceExhausted : public Error {
 public:
  using Error::Error;
};

class UndefinedFrequency : public Error {
 public:
  UndefinedFrequency(int input)
      : Error("input " + std::to_string(input) + " was never used"), input_(input) {}
  int input() const { return input_; }

 private:
  int input_;
};

class UnboundedScore : public Error {
 public:
  using Error::Error;
};

class NotSeparable : public Error {
 public:
  using Error::Error;
};

class InvalidState : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Random streams.

using Rng = std::mt19937_64;

/// splitmix64 finalizer; used to derive independent per-trial seeds.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return mix64(mix64(master) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

inline Rng make_rng(std::uint64_t master, std::uint64_t index) {
  return Rng(derive_seed(master, index));
}

inline double uniform01(Rng& rng) {
  // 53 random mantissa bits in [0, 1).
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Inverse-CDF draw from a (normalized) probability vector.
inline int sample_categorical(std::span<const double> probs, Rng& rng) {
  double u = uniform01(rng);
  const int last = static_cast<int>(probs.size()) - 1;
  for (int i = 0; i < last; ++i) {
    if (u < probs[i]) return i;
    u -= probs[i];
  }
  // Rounding can leave u slightly above the final mass; the last nonzero
  // entry absorbs it.
  for (int i = last; i > 0; --i) {
    if (probs[i] > 0.0) return i;
  }
  return 0;
}

}  // namespace noniid
