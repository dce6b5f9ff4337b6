#pragma once

#include "qendy/dictionary.hpp"
#include "qendy/dynamics.hpp"
#include "qendy/types.hpp"

#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

namespace qendy {

/// z (x) z with entry N*i + j equal to z_i z_j (0-based, row-major).
Vector kron(const Vector& z);

struct ModelMetadata {
  std::size_t samples = 0;
  double lambda = 0.0;
  Provenance provenance = Provenance::External;
  bool force_c_zero = false;
};

/// Quadratic embedding z' = A (z (x) z) + B z + C with projection x = G z.
class QuadraticModel {
 public:
  QuadraticModel(Dictionary dict, Matrix a, Matrix b, Vector c, Matrix g, ModelMetadata meta = {});

  /// Model with all-zero coefficients for `dict`; G from full_state_matrix.
  static QuadraticModel zero(const Dictionary& dict);

  const Dictionary& dictionary() const { return dict_; }
  const Matrix& a() const { return a_; }
  const Matrix& b() const { return b_; }
  const Vector& c() const { return c_; }
  const Matrix& g() const { return g_; }
  const ModelMetadata& metadata() const { return meta_; }
  std::size_t embedding_dim() const { return static_cast<std::size_t>(b_.rows()); }

  /// z' at z.
  Vector evaluate(const Vector& z) const;
  /// x' = G (A (z (x) z) + B z + C) with z = phi(x).
  Vector extract_rhs(const Vector& x) const;

 private:
  Dictionary dict_;
  Matrix a_;
  Matrix b_;
  Vector c_;
  Matrix g_;
  ModelMetadata meta_;
};

struct SimulateOptions {
  /// Re-embed z <- phi(G z) after every step (diagnostic; off by default).
  bool re_embed = false;
};

struct Simulation {
  Trajectory x;  // G z(t)
  Trajectory z;
  std::optional<std::size_t> failed_step;
};

/// RK4 in embedding space from z0 = phi(x0); never throws on blowup (see failed_step).
Simulation simulate_partial(const QuadraticModel& model, const Vector& x0, double t_end, double dt,
                            const SimulateOptions& opts = {});
/// As simulate_partial but throws BlowupError if the integration produced a non-finite state.
Simulation simulate(const QuadraticModel& model, const Vector& x0, double t_end, double dt,
                    const SimulateOptions& opts = {});

/// Replaces each row of A, reshaped N x N, by its symmetric part.
QuadraticModel symmetrize(const QuadraticModel& model);

struct HurwitzReport {
  bool stable = false;
  double max_real_part = 0.0;
  std::vector<std::complex<double>> eigenvalues;
};

/// Eigenvalues of B; stable iff every real part is strictly negative.
HurwitzReport hurwitz_margin(const QuadraticModel& model);

struct SparsityReport {
  double threshold = 1e-6;
  std::size_t a_nonzeros = 0;
  std::size_t b_nonzeros = 0;
  std::size_t c_nonzeros = 0;
  std::vector<std::size_t> a_row_nonzeros;
  std::vector<std::size_t> b_row_nonzeros;
  double max_abs_c = 0.0;
  double a_frobenius = 0.0;
};

/// Counts entries with |value| > threshold.
SparsityReport sparsity_report(const QuadraticModel& model, double threshold = 1e-6);

}  // namespace qendy
