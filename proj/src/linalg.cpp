#include "qendy/linalg.hpp"

#include "qendy/error.hpp"

#include <cmath>
#include <limits>

namespace qendy {

double default_pinv_cutoff(std::size_t dim) {
  return static_cast<double>(dim) * std::numeric_limits<double>::epsilon() * 64.0;
}

SymmetricPseudoInverse::SymmetricPseudoInverse(const Matrix& symmetric, std::optional<double> rel_cutoff) {
  if (symmetric.rows() != symmetric.cols()) throw InputError("pseudoinverse needs a square matrix");
  if (!symmetric.allFinite()) throw NumericError("pseudoinverse input has non-finite entries");
  const auto n = static_cast<std::size_t>(symmetric.rows());
  const double tau = rel_cutoff.value_or(default_pinv_cutoff(n));
  if (!(tau >= 0.0)) throw InputError("pseudoinverse cutoff must be non-negative");

  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetric);
  if (eig.info() != Eigen::Success) throw NumericError("symmetric eigendecomposition failed");
  eigenvalues_ = eig.eigenvalues();
  eigenvectors_ = eig.eigenvectors();

  const double largest = n == 0 ? 0.0 : eigenvalues_.cwiseAbs().maxCoeff();
  cutoff_ = tau * largest;
  inverse_ = Vector::Zero(eigenvalues_.size());
  for (Eigen::Index i = 0; i < eigenvalues_.size(); ++i) {
    if (largest > 0.0 && std::abs(eigenvalues_[i]) >= cutoff_) {
      inverse_[i] = 1.0 / eigenvalues_[i];
      ++rank_;
    }
  }
}

Vector SymmetricPseudoInverse::solve(const Vector& b) const {
  if (b.size() != eigenvectors_.rows()) throw InputError("pseudoinverse right-hand side dimension mismatch");
  return eigenvectors_ * inverse_.cwiseProduct(eigenvectors_.transpose() * b);
}

Matrix SymmetricPseudoInverse::solve(const Matrix& b) const {
  if (b.rows() != eigenvectors_.rows()) throw InputError("pseudoinverse right-hand side dimension mismatch");
  return eigenvectors_ * (inverse_.asDiagonal() * (eigenvectors_.transpose() * b));
}

Matrix SymmetricPseudoInverse::pseudoinverse() const {
  return eigenvectors_ * inverse_.asDiagonal() * eigenvectors_.transpose();
}

Matrix SymmetricPseudoInverse::null_space() const {
  Matrix basis(eigenvectors_.rows(), eigenvectors_.cols() - static_cast<Eigen::Index>(rank_));
  Eigen::Index col = 0;
  for (Eigen::Index i = 0; i < inverse_.size(); ++i) {
    if (inverse_[i] == 0.0) basis.col(col++) = eigenvectors_.col(i);
  }
  return basis;
}

MinNormLeastSquares::MinNormLeastSquares(const Matrix& k, std::optional<double> rel_cutoff) {
  if (!k.allFinite()) throw NumericError("least-squares matrix has non-finite entries");
  const double tau = rel_cutoff.value_or(default_pinv_cutoff(static_cast<std::size_t>(k.cols())));
  if (!(tau >= 0.0)) throw InputError("pseudoinverse cutoff must be non-negative");
  Eigen::JacobiSVD<Matrix> svd(k, Eigen::ComputeThinU | Eigen::ComputeFullV);
  if (svd.info() != Eigen::Success) throw NumericError("singular value decomposition failed");
  u_ = svd.matrixU();
  v_ = svd.matrixV();
  singular_values_ = svd.singularValues();
  const double largest = singular_values_.size() == 0 ? 0.0 : singular_values_[0];
  cutoff_ = tau * largest;
  for (Eigen::Index i = 0; i < singular_values_.size(); ++i) {
    if (largest > 0.0 && singular_values_[i] >= cutoff_) ++rank_;
  }
}

Matrix MinNormLeastSquares::solve(const Matrix& b) const {
  if (b.rows() != u_.rows()) throw InputError("least-squares right-hand side dimension mismatch");
  const auto r = static_cast<Eigen::Index>(rank_);
  const Matrix coeffs = singular_values_.head(r).cwiseInverse().asDiagonal() * (u_.leftCols(r).transpose() * b);
  return v_.leftCols(r) * coeffs;
}

Vector MinNormLeastSquares::solve(const Vector& b) const { return solve(Matrix(b)).col(0); }

Matrix MinNormLeastSquares::null_space() const {
  const auto r = static_cast<Eigen::Index>(rank_);
  return v_.rightCols(v_.cols() - r);
}

}  // namespace qendy
