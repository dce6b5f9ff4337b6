#pragma once

#include "qendy/dictionary.hpp"
#include "qendy/dynamics.hpp"
#include "qendy/quadmodel.hpp"
#include "qendy/types.hpp"

#include <cstddef>
#include <memory>
#include <optional>

namespace qendy {

/// Column k of Z1 is z_k = phi(x_k), of Z2 is z_k (x) z_k, of Zdot is J(x_k) x'_k.
struct DataMatrices {
  Matrix z1;    // N x m
  Matrix z2;    // N^2 x m
  Matrix zdot;  // N x m

  std::size_t samples() const { return static_cast<std::size_t>(z1.cols()); }
  std::size_t embedding_dim() const { return static_cast<std::size_t>(z1.rows()); }
};

DataMatrices build_data_matrices(const Dictionary& d, const TrainingSet& ts);

/// Square-root form of the normal equations: K^T K = R and K^T Y = S.
///
/// K stacks [Z2^T | Z1^T | 1] over the samples, plus sqrt(lambda) [I | 0 | 0]
/// when regularized; Y stacks Zdot^T over zeros.
struct LeastSquaresFactor {
  Matrix k;
  Matrix rhs;
};

/// Normal equations shared by all N row problems.
///
///   R = [ Z2 Z2^T + lambda I | Z2 Z1^T | Z2 1 ]      S column l = [ Z2 Zdot_l^T ]
///       [ Z1 Z2^T            | Z1 Z1^T | Z1 1 ]                    [ Z1 Zdot_l^T ]
///       [ 1^T Z2^T           | 1^T Z1^T|  m   ]                    [ 1^T Zdot_l^T]
///
/// With has_constant == false the last row/column (the C unknown) is absent.
struct GramSystem {
  Matrix r;
  Matrix s;
  double lambda = 0.0;
  std::size_t samples = 0;
  std::size_t embedding_dim = 0;
  bool has_constant = true;
  /// Square root of (R, S) when the system was assembled from samples. Row solves
  /// go through its SVD, which keeps the conditioning of the data rather than of R.
  std::shared_ptr<const LeastSquaresFactor> factor;

  std::size_t unknowns() const { return static_cast<std::size_t>(r.rows()); }
};

GramSystem assemble_gram(const DataMatrices& dm, double lambda = 0.0);

/// Removes the constant unknown (C = 0 constraint).
GramSystem drop_constant(const GramSystem& gs);

/// v_l = R^+ s_l for 0-based row index `ell`; layout [A_l^T; B_l^T; C_l].
Vector solve_row(const GramSystem& gs, std::size_t ell, std::optional<double> pinv_cutoff = std::nullopt);

struct FitOptions {
  double lambda = 0.0;
  bool force_c_zero = false;
  /// Relative singular-value cutoff of the pseudoinverse; default (N^2+N+1) * eps * 64.
  std::optional<double> pinv_cutoff;
};

LeastSquaresFactor data_factor(const DataMatrices& dm, double lambda = 0.0, bool with_constant = true);

/// Minimum-norm solutions v_l = R^+ s_l as the columns of an (unknowns x N) matrix,
/// obtained from one SVD of the data factor rather than from R itself.
Matrix solve_rows(const DataMatrices& dm, const FitOptions& opts = {});

/// Assembles A, B, C from the stacked per-row solutions (layout [A_l^T; B_l^T; C_l]).
QuadraticModel model_from_solution(const Dictionary& d, const Matrix& v, bool has_constant,
                                   const ModelMetadata& meta);

/// Assembles A, B, C by applying the pseudoinverse of R to S (through the factor when present).
QuadraticModel model_from_gram(const Dictionary& d, const GramSystem& gs, std::optional<double> pinv_cutoff,
                               const ModelMetadata& meta);

/// Minimum-norm least-squares quadratic embedding of the training data.
QuadraticModel fit(const Dictionary& d, const TrainingSet& ts, const FitOptions& opts = {});

struct Loss {
  double residual = 0.0;     // ||Zdot - A Z2 - B Z1 - C 1^T||_F^2
  double regularized = 0.0;  // residual + lambda ||A||_F^2
};

Loss loss(const QuadraticModel& model, const DataMatrices& dm, double lambda = 0.0);

/// Gradients of the (regularized) loss with respect to A, B and C.
struct LossGradient {
  Matrix d_a;
  Matrix d_b;
  Vector d_c;

  double max_abs() const;
};

LossGradient loss_gradient(const QuadraticModel& model, const DataMatrices& dm, double lambda = 0.0);

}  // namespace qendy
