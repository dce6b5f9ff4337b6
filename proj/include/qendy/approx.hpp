#pragma once

#include "qendy/dictionary.hpp"
#include "qendy/dynamics.hpp"
#include "qendy/expr.hpp"
#include "qendy/fit.hpp"
#include "qendy/types.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace qendy {

/// One-dimensional rule on [-1, 1].
struct QuadratureRule {
  Vector nodes;
  Vector weights;
};

/// Gauss-Legendre nodes and weights of the given order (exact for degree 2*order - 1).
QuadratureRule gauss_legendre(std::size_t order);

/// Inner product <f, g> = sum_i f(p_i) g(p_i) w_i over a finite point set.
///
/// The discrete kind uses user points and positive weights. The continuous kind
/// is a tensor Gauss-Legendre rule on a box for the uniform measure, either
/// normalized to a probability measure or plain Lebesgue.
class InnerProductSpace {
 public:
  static InnerProductSpace discrete(Matrix points, Vector weights);
  static InnerProductSpace continuous(const Box& box, std::size_t order = 20, bool normalized = true);

  bool is_continuous() const { return continuous_; }
  std::size_t dim() const { return static_cast<std::size_t>(points_.cols()); }
  /// p x n, one node per row.
  const Matrix& points() const { return points_; }
  const Vector& weights() const { return weights_; }
  double inner(const Vector& f_values, const Vector& g_values) const;

 private:
  InnerProductSpace(Matrix points, Vector weights, bool continuous)
      : points_(std::move(points)), weights_(std::move(weights)), continuous_(continuous) {}
  Matrix points_;
  Vector weights_;
  bool continuous_ = false;
};

using ScalarFunction = std::function<double(const Vector&)>;

struct BestApproxProblem {
  std::vector<ScalarFunction> basis;
  ScalarFunction target;

  static BestApproxProblem from_exprs(const std::vector<Expr>& basis, const Expr& target);
};

/// Gram matrix a_ij = <phi_i, phi_j> and b_i = <phi_i, f>.
struct GramPair {
  Matrix a;
  Vector b;
};

GramPair gram(const BestApproxProblem& problem, const InnerProductSpace& space);
/// Same for sampled values: basis_values is N x p, target_values has length p.
GramPair gram_sampled(const Matrix& basis_values, const Vector& target_values, const Vector& weights);

/// alpha = A^+ b (same pseudoinverse policy as the quadratic fit).
Vector solve_min_norm(const Matrix& a, const Vector& b, std::optional<double> pinv_cutoff = std::nullopt);

/// E(alpha) = || f - sum_i alpha_i phi_i ||^2 in the given inner product.
double approximation_error(const BestApproxProblem& problem, const InnerProductSpace& space, const Vector& alpha);

/// Infinite-data limit of the Gram system: inner products of the augmented basis
/// (product block, singletons, constant) and S* column l = <phi_bar, grad(phi_l) . F>.
GramSystem limit_gram(const Dictionary& d, const VectorField& f, const InnerProductSpace& space);

/// Weighted Gram system over arbitrary points: R = Phi_bar W Phi_bar^T, S = Phi_bar W Zdot^T.
GramSystem weighted_gram(const DataMatrices& dm, const Vector& weights);

struct ConvergenceOptions {
  std::vector<std::size_t> m_list{100, 1000, 10000, 100000};
  std::size_t runs = 100;
  std::uint64_t seed = 0;
  std::size_t quadrature_order = 20;
  /// Divide the mean absolute difference by the mean absolute limit entry.
  bool relative = false;
  /// 0 selects thread_limit().
  std::size_t threads = 0;
};

struct ConvergenceRow {
  std::size_t m = 0;
  std::size_t run = 0;
  double e_r = 0.0;
  Vector e_s;  // one entry per dictionary row l
};

struct ConvergenceSummary {
  std::size_t m = 0;
  double e_r_mean = 0.0;
  double e_s_mean = 0.0;  // averaged over runs and rows
};

struct ConvergenceResult {
  std::vector<ConvergenceRow> rows;
  std::vector<ConvergenceSummary> summary;
  std::optional<double> slope_r;
  std::optional<double> slope_s;
};

/// Monte Carlo study of |R/m - R*| and |s_l/m - s_l*| with uniform samples on `box`.
/// Results depend only on the options, not on the thread count.
ConvergenceResult convergence_study(const Dictionary& d, const VectorField& f, const Box& box,
                                    const ConvergenceOptions& opts);

/// Least-squares slope of log(y) against log(x); empty for fewer than two points.
std::optional<double> loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Worker cap: QENDY_NUM_THREADS if set and positive, else hardware concurrency (>= 1).
std::size_t thread_limit();

/// Seed for run `run` at sample size `m` derived from a base seed.
std::uint64_t derive_seed(std::uint64_t base, std::size_t m, std::size_t run);

}  // namespace qendy
