#pragma once

#include "qendy/error.hpp"
#include "qendy/expr.hpp"
#include "qendy/types.hpp"

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace qendy {

/// Autonomous right-hand side x' = F(x).
struct VectorField {
  std::size_t dim = 0;
  std::function<Vector(const Vector&)> rhs;

  Vector operator()(const Vector& x) const { return rhs(x); }

  /// F_i given by the i-th expression; all expressions over `dim` variables.
  static VectorField from_exprs(std::size_t dim, std::vector<Expr> components);
};

/// Uniformly sampled trajectory. states is m x n (one row per time).
struct Trajectory {
  Vector times;
  Matrix states;

  std::size_t size() const { return static_cast<std::size_t>(states.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(states.cols()); }
};

enum class Provenance { Exact, FiniteDifference, External };

std::string to_string(Provenance p);
Provenance provenance_from_string(const std::string& s);

/// Training pairs (x_k, x'_k); both matrices m x n.
struct TrainingSet {
  Matrix states;
  Matrix derivatives;
  Provenance provenance = Provenance::External;

  std::size_t size() const { return static_cast<std::size_t>(states.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(states.cols()); }
};

/// One classical RK4 step.
template <class Rhs>
Vector rk4_step(const Rhs& f, const Vector& x, double dt) {
  const Vector k1 = f(x);
  const Vector k2 = f(x + 0.5 * dt * k1);
  const Vector k3 = f(x + 0.5 * dt * k2);
  const Vector k4 = f(x + dt * k3);
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Result of an integration that may stop early on a non-finite state.
struct IntegrationResult {
  Trajectory trajectory;               // rows up to the last finite state
  std::optional<std::size_t> failed_step;  // 1-based step index that blew up
};

/// Fixed-step RK4 of `f` on [0, t_end] recording every `record_every` steps.
/// The number of steps is round(t_end / dt). Never throws on blowup.
template <class Rhs>
IntegrationResult rk4_integrate_partial(const Rhs& f, const Vector& x0, double t_end, double dt,
                                        std::size_t record_every = 1) {
  if (!(dt > 0.0)) throw InputError("integration step dt must be positive");
  if (!(t_end >= dt * (1.0 - 1e-12))) throw InputError("t_end must be >= dt");
  if (record_every == 0) throw InputError("record_every must be >= 1");
  const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
  const std::size_t records = steps / record_every + 1;
  IntegrationResult out;
  Trajectory& tr = out.trajectory;
  tr.times.resize(static_cast<Eigen::Index>(records));
  tr.states.resize(static_cast<Eigen::Index>(records), x0.size());
  tr.times[0] = 0.0;
  tr.states.row(0) = x0.transpose();
  Vector x = x0;
  std::size_t row = 1;
  for (std::size_t s = 1; s <= steps; ++s) {
    x = rk4_step(f, x, dt);
    if (!x.allFinite()) {
      out.failed_step = s;
      tr.times.conservativeResize(static_cast<Eigen::Index>(row));
      tr.states.conservativeResize(static_cast<Eigen::Index>(row), Eigen::NoChange);
      return out;
    }
    if (s % record_every == 0 && row < records) {
      tr.times[static_cast<Eigen::Index>(row)] = static_cast<double>(s) * dt;
      tr.states.row(static_cast<Eigen::Index>(row)) = x.transpose();
      ++row;
    }
  }
  return out;
}

/// Fixed-step RK4 including the t = 0 state. Throws BlowupError on a non-finite state.
Trajectory rk4_integrate(const VectorField& f, const Vector& x0, double t_end, double dt);

/// m states at times linspace(0, t_end, m), each interval integrated with `substeps` RK4 steps.
Trajectory sample_trajectory(const VectorField& f, const Vector& x0, double t_end, std::size_t m,
                             std::size_t substeps = 10);

/// m x n matrix of uniform samples in `box`; reproducible for a fixed seed.
Matrix sample_uniform(const Box& box, std::size_t m, std::uint64_t seed);

/// Derivatives F(x_k) evaluated pointwise.
TrainingSet exact_derivatives(const VectorField& f, const Matrix& states);

/// Forward difference at the first sample, backward at the last, central in between.
TrainingSet finite_diff_derivatives(const Trajectory& traj);

}  // namespace qendy
