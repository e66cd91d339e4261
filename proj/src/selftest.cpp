#include "noniid/selftest.hpp"

#include <cmath>
#include <limits>

#include <unsupported/Eigen/KroneckerProduct>

namespace noniid {

DensityMatrix::DensityMatrix(Eigen::MatrixXcd matrix, double tol) : matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols() || matrix_.rows() < 1) throw InvalidState("density matrix must be square");
  if ((matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff() > tol) throw InvalidState("density matrix is not Hermitian");
  if (std::abs(matrix_.trace() - std::complex<double>(1.0, 0.0)) > tol)
    throw InvalidState("density matrix trace is not 1");
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(matrix_, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -tol) throw InvalidState("density matrix has a negative eigenvalue");
}

DensityMatrix DensityMatrix::maximally_mixed(int dim) {
  return DensityMatrix(Eigen::MatrixXcd::Identity(dim, dim) / static_cast<double>(dim));
}

DensityMatrix DensityMatrix::pure(const Eigen::VectorXcd& psi) {
  const Eigen::VectorXcd unit = psi.normalized();
  return DensityMatrix(unit * unit.adjoint());
}

double DensityMatrix::purity() const { return (matrix_ * matrix_).trace().real(); }

Eigen::MatrixXcd permutation_operator(int dim) {
  if (dim < 2) throw DimensionMismatch("permutation operator needs D >= 2");
  Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(dim * dim, dim * dim);
  for (int j = 0; j < dim; ++j)
    for (int k = 0; k < dim; ++k) v(k * dim + j, j * dim + k) = 1.0;
  return v;
}

Eigen::MatrixXcd witness_matrix(const DensityMatrix& rho) {
  const int d = rho.dim();
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(d, d);
  Eigen::MatrixXcd w = permutation_operator(d);
  w += rho.purity() * Eigen::MatrixXcd::Identity(d * d, d * d);
  w -= 2.0 * Eigen::kroneckerProduct(id, rho.matrix()).eval();
  return w;
}

double witness_value(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) throw DimensionMismatch("witness_value: states of different dimension");
  const Eigen::MatrixXcd two_copies = Eigen::kroneckerProduct(sigma.matrix(), sigma.matrix());
  const std::complex<double> value = (witness_matrix(rho) * two_copies).trace();
  if (std::abs(value.imag()) > DensityMatrix::kTolerance)
    throw InvalidState("witness value has imaginary part " + std::to_string(value.imag()));
  return value.real();
}

double squared_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) throw DimensionMismatch("squared_distance: states of different dimension");
  return (sigma.matrix() - rho.matrix()).squaredNorm();
}

DensityMatrix random_density(int dim, Rng& rng) {
  if (dim < 2) throw DimensionMismatch("random_density needs D >= 2");
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXcd g(dim, dim);
  for (int j = 0; j < dim; ++j)
    for (int i = 0; i < dim; ++i) g(i, j) = {gauss(rng), gauss(rng)};
  Eigen::MatrixXcd m = g * g.adjoint();
  m /= m.trace().real();
  // Symmetrize away rounding so the Hermitian check is exact.
  m = (0.5 * (m + m.adjoint())).eval();
  return DensityMatrix(std::move(m));
}

ExposednessReport exposedness_scan(const DensityMatrix& rho, int samples, std::uint64_t seed) {
  if (samples < 1) throw Error("exposedness_scan needs at least one sample");
  ExposednessReport report;
  report.samples = samples;
  report.min_value = witness_value(rho, rho);
  report.argmin = rho.matrix();
  report.argmin_distance = 0.0;
  report.identity_max_error = std::abs(report.min_value);
  report.second_smallest = std::numeric_limits<double>::infinity();

  const std::vector<double> thresholds{1e-3, 1e-2, 1e-1};
  std::vector<long> violations(thresholds.size(), 0);
  constexpr double kZero = 1e-12;
  long near_zero = 0;

  for (int i = 0; i < samples; ++i) {
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(i));
    const DensityMatrix sigma = random_density(rho.dim(), rng);
    const double value = witness_value(rho, sigma);
    const double dist2 = squared_distance(rho, sigma);
    report.identity_max_error = std::max(report.identity_max_error, std::abs(value - dist2));
    report.second_smallest = std::min(report.second_smallest, value);
    if (value < report.min_value) {
      report.min_value = value;
      report.argmin = sigma.matrix();
      report.argmin_distance = std::sqrt(dist2);
    }
    if (value <= kZero) ++near_zero;
    const double dist = std::sqrt(dist2);
    for (std::size_t t = 0; t < thresholds.size(); ++t)
      if (dist >= thresholds[t] && value < thresholds[t] * thresholds[t] - DensityMatrix::kTolerance) ++violations[t];
  }
  report.unique_minimum = near_zero == 0 && std::abs(witness_value(rho, rho)) <= DensityMatrix::kTolerance &&
                          report.argmin_distance == 0.0;
  for (std::size_t t = 0; t < thresholds.size(); ++t) report.gap_violations.emplace_back(thresholds[t], violations[t]);
  return report;
}

}  // namespace noniid
