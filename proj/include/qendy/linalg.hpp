#pragma once

#include "qendy/types.hpp"

#include <cstddef>
#include <optional>

namespace qendy {

/// Default relative cutoff for a system with `dim` unknowns: dim * machine epsilon * 64.
double default_pinv_cutoff(std::size_t dim);

/// Moore-Penrose pseudoinverse of a symmetric matrix via eigendecomposition.
///
/// Eigenvalues with |lambda_i| < cutoff * max|lambda| are treated as zero. The
/// factorization is computed once and applied to any number of right-hand sides.
class SymmetricPseudoInverse {
 public:
  explicit SymmetricPseudoInverse(const Matrix& symmetric, std::optional<double> rel_cutoff = std::nullopt);

  /// Minimum-norm least-squares solution of M v = b.
  Vector solve(const Vector& b) const;
  Matrix solve(const Matrix& b) const;

  Matrix pseudoinverse() const;

  std::size_t rank() const { return rank_; }
  double cutoff() const { return cutoff_; }
  const Vector& eigenvalues() const { return eigenvalues_; }
  /// Orthonormal basis of the numerical null space (columns).
  Matrix null_space() const;

 private:
  Vector eigenvalues_;
  Matrix eigenvectors_;
  Vector inverse_;  // 1/lambda on the retained spectrum, 0 elsewhere
  std::size_t rank_ = 0;
  double cutoff_ = 0.0;
};

/// Minimum-norm least-squares solver for a general matrix K via its SVD.
///
/// Singular values below cutoff * sigma_max are treated as zero. Solving with K
/// gives the same minimizer as the pseudoinverse of K^T K, with the condition
/// number of K instead of its square.
class MinNormLeastSquares {
 public:
  explicit MinNormLeastSquares(const Matrix& k, std::optional<double> rel_cutoff = std::nullopt);

  /// argmin ||K x - b|| with minimal ||x||; one column per right-hand side.
  Matrix solve(const Matrix& b) const;
  Vector solve(const Vector& b) const;
  std::size_t rank() const { return rank_; }
  double cutoff() const { return cutoff_; }
  const Vector& singular_values() const { return singular_values_; }
  /// Orthonormal basis of the numerical null space of K (and of K^T K).
  Matrix null_space() const;

 private:
  Matrix u_;
  Matrix v_;  // full right singular basis
  Vector singular_values_;
  std::size_t rank_ = 0;
  double cutoff_ = 0.0;
};

}  // namespace qendy
