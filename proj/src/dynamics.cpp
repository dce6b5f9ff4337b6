#include "qendy/dynamics.hpp"

#include <algorithm>
#include <random>

namespace qendy {

VectorField VectorField::from_exprs(std::size_t dim, std::vector<Expr> components) {
  if (components.size() != dim) throw InputError("vector field needs one expression per state coordinate");
  for (const Expr& e : components) {
    if (e.min_state_dim() > dim) throw InputError("vector field expression references x beyond dimension");
  }
  VectorField f;
  f.dim = dim;
  f.rhs = [dim, comps = std::move(components)](const Vector& x) {
    if (static_cast<std::size_t>(x.size()) != dim) throw InputError("vector field state dimension mismatch");
    Vector out(static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim; ++i) out[static_cast<Eigen::Index>(i)] = comps[i].eval(x);
    return out;
  };
  return f;
}

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::Exact:
      return "exact";
    case Provenance::FiniteDifference:
      return "finite-difference";
    case Provenance::External:
      return "external";
  }
  return "external";
}

Provenance provenance_from_string(const std::string& s) {
  if (s == "exact") return Provenance::Exact;
  if (s == "finite-difference") return Provenance::FiniteDifference;
  if (s == "external") return Provenance::External;
  throw InputError("unknown derivative provenance '" + s + "'");
}

Trajectory rk4_integrate(const VectorField& f, const Vector& x0, double t_end, double dt) {
  if (static_cast<std::size_t>(x0.size()) != f.dim) throw InputError("initial state dimension mismatch");
  IntegrationResult r = rk4_integrate_partial(f, x0, t_end, dt);
  if (r.failed_step) {
    throw BlowupError(*r.failed_step,
                      "integration blew up (non-finite state) at step " + std::to_string(*r.failed_step));
  }
  return std::move(r.trajectory);
}

Trajectory sample_trajectory(const VectorField& f, const Vector& x0, double t_end, std::size_t m,
                             std::size_t substeps) {
  if (m < 2) throw InputError("trajectory sampling needs m >= 2");
  if (substeps == 0) throw InputError("substeps must be >= 1");
  const double interval = t_end / static_cast<double>(m - 1);
  const double dt = interval / static_cast<double>(substeps);
  IntegrationResult r = rk4_integrate_partial(f, x0, t_end, dt, substeps);
  if (r.failed_step) {
    throw BlowupError(*r.failed_step,
                      "integration blew up (non-finite state) at step " + std::to_string(*r.failed_step));
  }
  Trajectory tr = std::move(r.trajectory);
  for (Eigen::Index k = 0; k < tr.times.size(); ++k) tr.times[k] = static_cast<double>(k) * interval;
  return tr;
}

Matrix sample_uniform(const Box& box, std::size_t m, std::uint64_t seed) {
  if (m == 0) throw InputError("sample count m must be >= 1");
  if (box.empty()) throw InputError("sampling box is empty");
  for (const Interval& iv : box) {
    if (!(iv.lo < iv.hi)) throw InputError("sampling box needs lo < hi on every axis");
  }
  std::mt19937_64 rng(seed);
  Matrix out(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(box.size()));
  for (Eigen::Index k = 0; k < out.rows(); ++k) {
    for (std::size_t j = 0; j < box.size(); ++j) {
      std::uniform_real_distribution<double> u(box[j].lo, box[j].hi);
      out(k, static_cast<Eigen::Index>(j)) = u(rng);
    }
  }
  return out;
}

TrainingSet exact_derivatives(const VectorField& f, const Matrix& states) {
  if (static_cast<std::size_t>(states.cols()) != f.dim) throw InputError("state dimension mismatch");
  TrainingSet ts;
  ts.states = states;
  ts.derivatives.resize(states.rows(), states.cols());
  for (Eigen::Index k = 0; k < states.rows(); ++k) {
    ts.derivatives.row(k) = f(states.row(k).transpose()).transpose();
  }
  ts.provenance = Provenance::Exact;
  return ts;
}

TrainingSet finite_diff_derivatives(const Trajectory& traj) {
  const Eigen::Index m = traj.states.rows();
  if (m < 3) throw InputError("finite differences need at least 3 samples, got " + std::to_string(m));
  const double dt = traj.times[1] - traj.times[0];
  if (!(dt > 0.0)) throw InputError("trajectory times must be strictly increasing");
  for (Eigen::Index k = 1; k < m; ++k) {
    const double step = traj.times[k] - traj.times[k - 1];
    if (std::abs(step - dt) > 1e-9 * std::max(1.0, std::abs(dt))) {
      throw InputError("trajectory times are not uniformly spaced");
    }
  }
  TrainingSet ts;
  ts.states = traj.states;
  ts.derivatives.resize(m, traj.states.cols());
  ts.derivatives.row(0) = (traj.states.row(1) - traj.states.row(0)) / dt;
  ts.derivatives.row(m - 1) = (traj.states.row(m - 1) - traj.states.row(m - 2)) / dt;
  for (Eigen::Index k = 1; k + 1 < m; ++k) {
    ts.derivatives.row(k) = (traj.states.row(k + 1) - traj.states.row(k - 1)) / (2.0 * dt);
  }
  ts.provenance = Provenance::FiniteDifference;
  return ts;
}

}  // namespace qendy
