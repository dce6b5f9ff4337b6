#include "qendy/fit.hpp"

#include "qendy/error.hpp"
#include "qendy/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace qendy {

DataMatrices build_data_matrices(const Dictionary& d, const TrainingSet& ts) {
  if (ts.dim() != d.state_dim()) {
    throw InputError("training states have dimension " + std::to_string(ts.dim()) + ", dictionary expects " +
                     std::to_string(d.state_dim()));
  }
  if (ts.derivatives.rows() != ts.states.rows() || ts.derivatives.cols() != ts.states.cols()) {
    throw InputError("training states and derivatives differ in shape");
  }
  const auto n = static_cast<Eigen::Index>(d.size());
  const Eigen::Index m = ts.states.rows();
  DataMatrices dm;
  dm.z1.resize(n, m);
  dm.z2.resize(n * n, m);
  dm.zdot.resize(n, m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const Vector x = ts.states.row(k).transpose();
    try {
      const Vector z = d.feature_map(x);
      dm.z1.col(k) = z;
      dm.z2.col(k) = kron(z);
      dm.zdot.col(k) = d.jacobian(x) * ts.derivatives.row(k).transpose();
    } catch (const DomainError& e) {
      throw DomainError("sample " + std::to_string(k) + ": " + e.what());
    }
  }
  if (!dm.z1.allFinite() || !dm.zdot.allFinite()) throw InputError("data matrices contain non-finite entries");
  return dm;
}

GramSystem assemble_gram(const DataMatrices& dm, double lambda) {
  if (!(lambda >= 0.0)) throw InputError("regularization parameter lambda must be >= 0");
  const auto n = static_cast<Eigen::Index>(dm.embedding_dim());
  const Eigen::Index n2 = n * n;
  const Eigen::Index size = n2 + n + 1;
  const Vector z2_sum = dm.z2.rowwise().sum();
  const Vector z1_sum = dm.z1.rowwise().sum();

  GramSystem gs;
  gs.lambda = lambda;
  gs.samples = dm.samples();
  gs.embedding_dim = dm.embedding_dim();
  gs.r.resize(size, size);
  gs.r.topLeftCorner(n2, n2).noalias() = dm.z2 * dm.z2.transpose();
  gs.r.topLeftCorner(n2, n2).diagonal().array() += lambda;
  gs.r.block(0, n2, n2, n).noalias() = dm.z2 * dm.z1.transpose();
  gs.r.block(0, n2 + n, n2, 1) = z2_sum;
  gs.r.block(n2, 0, n, n2) = gs.r.block(0, n2, n2, n).transpose();
  gs.r.block(n2, n2, n, n).noalias() = dm.z1 * dm.z1.transpose();
  gs.r.block(n2, n2 + n, n, 1) = z1_sum;
  gs.r.block(n2 + n, 0, 1, n2) = z2_sum.transpose();
  gs.r.block(n2 + n, n2, 1, n) = z1_sum.transpose();
  gs.r(n2 + n, n2 + n) = static_cast<double>(dm.samples());

  gs.s.resize(size, n);
  gs.s.topRows(n2).noalias() = dm.z2 * dm.zdot.transpose();
  gs.s.middleRows(n2, n).noalias() = dm.z1 * dm.zdot.transpose();
  gs.s.bottomRows(1) = dm.zdot.rowwise().sum().transpose();
  gs.factor = std::make_shared<const LeastSquaresFactor>(data_factor(dm, lambda, true));
  return gs;
}

GramSystem drop_constant(const GramSystem& gs) {
  if (!gs.has_constant) return gs;
  GramSystem out = gs;
  const Eigen::Index k = gs.r.rows() - 1;
  out.r = gs.r.topLeftCorner(k, k);
  out.s = gs.s.topRows(k);
  out.has_constant = false;
  if (gs.factor) {
    out.factor = std::make_shared<const LeastSquaresFactor>(
        LeastSquaresFactor{gs.factor->k.leftCols(k), gs.factor->rhs});
  }
  return out;
}

Vector solve_row(const GramSystem& gs, std::size_t ell, std::optional<double> pinv_cutoff) {
  if (ell >= gs.embedding_dim) throw InputError("row index out of range");
  const auto col = static_cast<Eigen::Index>(ell);
  if (gs.factor) return MinNormLeastSquares(gs.factor->k, pinv_cutoff).solve(Vector(gs.factor->rhs.col(col)));
  const SymmetricPseudoInverse pinv(gs.r, pinv_cutoff);
  return pinv.solve(Vector(gs.s.col(col)));
}

QuadraticModel model_from_solution(const Dictionary& d, const Matrix& v, bool has_constant,
                                   const ModelMetadata& meta) {
  const auto n = static_cast<Eigen::Index>(d.size());
  const Eigen::Index n2 = n * n;
  if (v.cols() != n || v.rows() != n2 + n + (has_constant ? 1 : 0)) {
    throw InputError("row solutions do not match the dictionary size");
  }
  Matrix a = v.topRows(n2).transpose();
  Matrix b = v.middleRows(n2, n).transpose();
  Vector c = has_constant ? Vector(v.row(n2 + n).transpose()) : Vector::Zero(n);
  return QuadraticModel(d, std::move(a), std::move(b), std::move(c), full_state_matrix(d), meta);
}

QuadraticModel model_from_gram(const Dictionary& d, const GramSystem& gs, std::optional<double> pinv_cutoff,
                               const ModelMetadata& meta) {
  if (gs.embedding_dim != d.size()) throw InputError("Gram system does not match dictionary");
  // One factorization, N right-hand sides.
  if (gs.factor) {
    return model_from_solution(d, MinNormLeastSquares(gs.factor->k, pinv_cutoff).solve(gs.factor->rhs),
                               gs.has_constant, meta);
  }
  const SymmetricPseudoInverse pinv(gs.r, pinv_cutoff);
  return model_from_solution(d, pinv.solve(gs.s), gs.has_constant, meta);
}

LeastSquaresFactor data_factor(const DataMatrices& dm, double lambda, bool with_constant) {
  if (!(lambda >= 0.0)) throw InputError("regularization parameter lambda must be >= 0");
  const auto n = static_cast<Eigen::Index>(dm.embedding_dim());
  const Eigen::Index n2 = n * n;
  const auto m = static_cast<Eigen::Index>(dm.samples());
  const Eigen::Index cols = n2 + n + (with_constant ? 1 : 0);
  const Eigen::Index extra = lambda > 0.0 ? n2 : 0;
  LeastSquaresFactor f;
  f.k = Matrix::Zero(m + extra, cols);
  f.k.topLeftCorner(m, n2) = dm.z2.transpose();
  f.k.block(0, n2, m, n) = dm.z1.transpose();
  if (with_constant) f.k.block(0, n2 + n, m, 1).setOnes();
  if (extra > 0) f.k.block(m, 0, n2, n2).diagonal().setConstant(std::sqrt(lambda));
  f.rhs = Matrix::Zero(m + extra, n);
  f.rhs.topRows(m) = dm.zdot.transpose();
  return f;
}

Matrix solve_rows(const DataMatrices& dm, const FitOptions& opts) {
  const LeastSquaresFactor f = data_factor(dm, opts.lambda, !opts.force_c_zero);
  return MinNormLeastSquares(f.k, opts.pinv_cutoff).solve(f.rhs);
}

QuadraticModel fit(const Dictionary& d, const TrainingSet& ts, const FitOptions& opts) {
  if (ts.size() == 0) throw InputError("training set is empty");
  const DataMatrices dm = build_data_matrices(d, ts);
  ModelMetadata meta;
  meta.samples = ts.size();
  meta.lambda = opts.lambda;
  meta.provenance = ts.provenance;
  meta.force_c_zero = opts.force_c_zero;
  return model_from_solution(d, solve_rows(dm, opts), !opts.force_c_zero, meta);
}

namespace {
Matrix residual(const QuadraticModel& model, const DataMatrices& dm) {
  if (dm.zdot.rows() != dm.z1.rows() || static_cast<std::size_t>(model.b().rows()) != dm.embedding_dim() || dm.z2.rows() != model.a().cols() ||
      dm.z1.cols() != dm.zdot.cols() || dm.z2.cols() != dm.z1.cols()) {
    throw InputError("model and data matrices differ in dimension");
  }
  Matrix res = dm.zdot - model.a() * dm.z2 - model.b() * dm.z1;
  res.colwise() -= model.c();
  return res;
}
}  // namespace

Loss loss(const QuadraticModel& model, const DataMatrices& dm, double lambda) {
  Loss l;
  l.residual = residual(model, dm).squaredNorm();
  l.regularized = l.residual + lambda * model.a().squaredNorm();
  return l;
}

double LossGradient::max_abs() const {
  double v = 0.0;
  if (d_a.size() > 0) v = std::max(v, d_a.cwiseAbs().maxCoeff());
  if (d_b.size() > 0) v = std::max(v, d_b.cwiseAbs().maxCoeff());
  if (d_c.size() > 0) v = std::max(v, d_c.cwiseAbs().maxCoeff());
  return v;
}

LossGradient loss_gradient(const QuadraticModel& model, const DataMatrices& dm, double lambda) {
  // dL/dA = -2 (Zdot - A Z2 - B Z1 - C 1^T) Z2^T + 2 lambda A, etc.
  const Matrix res = residual(model, dm);
  LossGradient g;
  g.d_a = -2.0 * res * dm.z2.transpose() + 2.0 * lambda * model.a();
  g.d_b = -2.0 * res * dm.z1.transpose();
  g.d_c = -2.0 * res.rowwise().sum();
  return g;
}

}  // namespace qendy
