#include "qendy/quadmodel.hpp"

#include "qendy/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qendy {

Vector kron(const Vector& z) {
  const Eigen::Index n = z.size();
  Vector out(n * n);
  for (Eigen::Index i = 0; i < n; ++i) out.segment(n * i, n) = z[i] * z;
  return out;
}

QuadraticModel::QuadraticModel(Dictionary dict, Matrix a, Matrix b, Vector c, Matrix g, ModelMetadata meta)
    : dict_(std::move(dict)), a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), g_(std::move(g)), meta_(meta) {
  const auto n = static_cast<Eigen::Index>(dict_.size());
  if (a_.rows() != n || a_.cols() != n * n) throw InputError("A must be N x N^2");
  if (b_.rows() != n || b_.cols() != n) throw InputError("B must be N x N");
  if (c_.size() != n) throw InputError("C must have length N");
  if (g_.rows() != static_cast<Eigen::Index>(dict_.state_dim()) || g_.cols() != n) {
    throw InputError("G must be n x N");
  }
  if (!a_.allFinite() || !b_.allFinite() || !c_.allFinite() || !g_.allFinite()) {
    throw InputError("model coefficients must be finite");
  }
}

QuadraticModel QuadraticModel::zero(const Dictionary& dict) {
  const auto n = static_cast<Eigen::Index>(dict.size());
  return QuadraticModel(dict, Matrix::Zero(n, n * n), Matrix::Zero(n, n), Vector::Zero(n), full_state_matrix(dict));
}

Vector QuadraticModel::evaluate(const Vector& z) const {
  if (z.size() != b_.rows()) throw InputError("embedding state dimension mismatch");
  return a_ * kron(z) + b_ * z + c_;
}

Vector QuadraticModel::extract_rhs(const Vector& x) const { return g_ * evaluate(dict_.feature_map(x)); }

Simulation simulate_partial(const QuadraticModel& model, const Vector& x0, double t_end, double dt,
                            const SimulateOptions& opts) {
  const Dictionary& dict = model.dictionary();
  const Vector z0 = dict.feature_map(x0);
  Simulation sim;
  if (!opts.re_embed) {
    IntegrationResult r =
        rk4_integrate_partial([&model](const Vector& z) { return model.evaluate(z); }, z0, t_end, dt);
    sim.z = std::move(r.trajectory);
    sim.failed_step = r.failed_step;
  } else {
    if (!(dt > 0.0)) throw InputError("integration step dt must be positive");
    const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
    sim.z.times.resize(static_cast<Eigen::Index>(steps + 1));
    sim.z.states.resize(static_cast<Eigen::Index>(steps + 1), z0.size());
    sim.z.times[0] = 0.0;
    sim.z.states.row(0) = z0.transpose();
    Vector z = z0;
    std::size_t rows = 1;
    for (std::size_t s = 1; s <= steps; ++s) {
      z = rk4_step([&model](const Vector& v) { return model.evaluate(v); }, z, dt);
      bool ok = z.allFinite();
      if (ok) {
        try {
          z = dict.feature_map(model.g() * z);
          ok = z.allFinite();
        } catch (const DomainError&) {
          ok = false;
        }
      }
      if (!ok) {
        sim.failed_step = s;
        break;
      }
      sim.z.times[static_cast<Eigen::Index>(rows)] = static_cast<double>(s) * dt;
      sim.z.states.row(static_cast<Eigen::Index>(rows)) = z.transpose();
      ++rows;
    }
    sim.z.times.conservativeResize(static_cast<Eigen::Index>(rows));
    sim.z.states.conservativeResize(static_cast<Eigen::Index>(rows), Eigen::NoChange);
  }
  sim.x.times = sim.z.times;
  sim.x.states = sim.z.states * model.g().transpose();
  return sim;
}

Simulation simulate(const QuadraticModel& model, const Vector& x0, double t_end, double dt,
                    const SimulateOptions& opts) {
  Simulation sim = simulate_partial(model, x0, t_end, dt, opts);
  if (sim.failed_step) {
    throw BlowupError(*sim.failed_step,
                      "model simulation blew up (non-finite state) at step " + std::to_string(*sim.failed_step));
  }
  return sim;
}

QuadraticModel symmetrize(const QuadraticModel& model) {
  const auto n = static_cast<Eigen::Index>(model.embedding_dim());
  Matrix a = model.a();
  for (Eigen::Index row = 0; row < n; ++row) {
    // Row-major reshape: entry N*i + j -> M(i, j).
    Matrix m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) m(i, j) = model.a()(row, n * i + j);
    }
    const Matrix sym = 0.5 * (m + m.transpose());
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) a(row, n * i + j) = sym(i, j);
    }
  }
  return QuadraticModel(model.dictionary(), std::move(a), model.b(), model.c(), model.g(), model.metadata());
}

HurwitzReport hurwitz_margin(const QuadraticModel& model) {
  Eigen::EigenSolver<Matrix> es(model.b(), /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) throw NumericError("eigenvalue computation for B failed");
  HurwitzReport report;
  report.max_real_part = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const std::complex<double> ev = es.eigenvalues()[i];
    report.eigenvalues.push_back(ev);
    report.max_real_part = std::max(report.max_real_part, ev.real());
  }
  std::sort(report.eigenvalues.begin(), report.eigenvalues.end(), [](auto l, auto r) {
    return l.real() != r.real() ? l.real() > r.real() : l.imag() > r.imag();
  });
  report.stable = report.max_real_part < 0.0;
  return report;
}

SparsityReport sparsity_report(const QuadraticModel& model, double threshold) {
  SparsityReport r;
  r.threshold = threshold;
  const auto n = model.b().rows();
  r.a_row_nonzeros.assign(static_cast<std::size_t>(n), 0);
  r.b_row_nonzeros.assign(static_cast<std::size_t>(n), 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto a_count = static_cast<std::size_t>((model.a().row(i).array().abs() > threshold).count());
    const auto b_count = static_cast<std::size_t>((model.b().row(i).array().abs() > threshold).count());
    r.a_row_nonzeros[static_cast<std::size_t>(i)] = a_count;
    r.b_row_nonzeros[static_cast<std::size_t>(i)] = b_count;
    r.a_nonzeros += a_count;
    r.b_nonzeros += b_count;
  }
  r.c_nonzeros = static_cast<std::size_t>((model.c().array().abs() > threshold).count());
  r.max_abs_c = model.c().size() == 0 ? 0.0 : model.c().cwiseAbs().maxCoeff();
  r.a_frobenius = model.a().norm();
  return r;
}

}  // namespace qendy
