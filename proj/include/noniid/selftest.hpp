// Two-copy witness W_rho = V + tr(rho^2) I - 2 I (x) rho and its
// exposedness scan over density matrices.
#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "noniid/core.hpp"

namespace noniid {

/// Hermitian, positive semidefinite, unit-trace complex matrix.
class DensityMatrix {
 public:
  static constexpr double kTolerance = 1e-10;

  /// Throws InvalidState unless the matrix is a state within `tol`.
  explicit DensityMatrix(Eigen::MatrixXcd matrix, double tol = kTolerance);

  static DensityMatrix maximally_mixed(int dim);
  /// |psi><psi| for a (not necessarily normalized) nonzero vector.
  static DensityMatrix pure(const Eigen::VectorXcd& psi);

  int dim() const { return static_cast<int>(matrix_.rows()); }
  const Eigen::MatrixXcd& matrix() const { return matrix_; }
  double purity() const;

 private:
  Eigen::MatrixXcd matrix_;
};

/// V |j>|k> = |k>|j> in the row-major basis |j>|k> <-> j*D + k.
Eigen::MatrixXcd permutation_operator(int dim);

/// V + tr(rho^2) I_{D^2} - 2 I_D (x) rho.
Eigen::MatrixXcd witness_matrix(const DensityMatrix& rho);

/// tr{W_rho (sigma (x) sigma)}; equals tr{(sigma - rho)^2}.
double witness_value(const DensityMatrix& rho, const DensityMatrix& sigma);

/// Direct tr{(sigma - rho)^2} = ||sigma - rho||_F^2.
double squared_distance(const DensityMatrix& rho, const DensityMatrix& sigma);

/// Hilbert-Schmidt random state G G^dag / tr(G G^dag), G complex Ginibre.
DensityMatrix random_density(int dim, Rng& rng);

struct ExposednessReport {
  int samples = 0;
  double min_value = 0.0;
  Eigen::MatrixXcd argmin;
  double argmin_distance = 0.0;     // Frobenius distance of argmin to rho
  double second_smallest = 0.0;     // smallest value among the random samples
  double identity_max_error = 0.0;  // max |witness - ||sigma - rho||_F^2|
  bool unique_minimum = false;      // only sigma = rho reaches ~0
  /// For each threshold t: samples with distance >= t but value < t^2.
  std::vector<std::pair<double, long>> gap_violations;
};

/// Evaluate the witness at sigma = rho and at `samples` random states (sample
/// i drawn from derive_seed(seed, i)).
ExposednessReport exposedness_scan(const DensityMatrix& rho, int samples, std::uint64_t seed);

}  // namespace noniid
