#include "qendy/baselines.hpp"

#include "qendy/error.hpp"
#include "qendy/fit.hpp"
#include "qendy/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace qendy {

namespace {

Matrix feature_columns(const Dictionary& d, const Matrix& states) {
  Matrix phi(static_cast<Eigen::Index>(d.size()), states.rows());
  for (Eigen::Index k = 0; k < states.rows(); ++k) {
    try {
      phi.col(k) = d.feature_map(states.row(k).transpose());
    } catch (const DomainError& e) {
      throw DomainError("sample " + std::to_string(k) + ": " + e.what());
    }
  }
  return phi;
}

void check_training(const Dictionary& d, const TrainingSet& ts) {
  if (ts.size() == 0) throw InputError("training set is empty");
  if (ts.dim() != d.state_dim()) throw InputError("training states do not match the dictionary state dimension");
  if (ts.derivatives.rows() != ts.states.rows() || ts.derivatives.cols() != ts.states.cols()) {
    throw InputError("training states and derivatives differ in shape");
  }
}

}  // namespace

SindyModel sindy_fit(const Dictionary& d, const TrainingSet& ts, const SindyOptions& opts) {
  check_training(d, ts);
  const Matrix phi = feature_columns(d, ts.states);
  // Same minimizer as the normal equations Phi Phi^T Xi_l^T = Phi Xdot_l^T, solved on Phi^T.
  Matrix xi = MinNormLeastSquares(phi.transpose(), opts.pinv_cutoff).solve(ts.derivatives).transpose();

  if (opts.threshold) {
    const double thr = *opts.threshold;
    if (!(thr >= 0.0)) throw InputError("threshold must be >= 0");
    for (Eigen::Index l = 0; l < xi.rows(); ++l) {
      std::vector<Eigen::Index> keep;
      for (Eigen::Index i = 0; i < xi.cols(); ++i) {
        if (std::abs(xi(l, i)) >= thr) keep.push_back(i);
      }
      xi.row(l).setZero();
      if (keep.empty()) continue;
      const auto k = static_cast<Eigen::Index>(keep.size());
      Matrix sub(phi.cols(), k);
      for (Eigen::Index a = 0; a < k; ++a) sub.col(a) = phi.row(keep[a]).transpose();
      const Vector sol = MinNormLeastSquares(sub, opts.pinv_cutoff).solve(Vector(ts.derivatives.col(l)));
      for (Eigen::Index a = 0; a < k; ++a) xi(l, keep[a]) = sol[a];
    }
  }
  return SindyModel{d, std::move(xi)};
}

Vector sindy_rhs(const SindyModel& model, const Vector& x) { return model.xi * model.dict.feature_map(x); }

double sindy_residual(const SindyModel& model, const TrainingSet& ts) {
  check_training(model.dict, ts);
  const Matrix phi = feature_columns(model.dict, ts.states);
  return (ts.derivatives.transpose() - model.xi * phi).squaredNorm();
}

GedmdModel gedmd_fit(const Dictionary& d, const TrainingSet& ts, const GedmdOptions& opts) {
  check_training(d, ts);
  const DataMatrices dm = build_data_matrices(d, ts);
  // Phi Phi^T Theta^T = Phi Phidot^T, solved in least-squares form on Phi^T.
  Matrix theta = MinNormLeastSquares(dm.z1.transpose(), opts.pinv_cutoff).solve(Matrix(dm.zdot.transpose())).transpose();
  return GedmdModel{d, std::move(theta)};
}

Vector gedmd_rhs(const GedmdModel& model, const Vector& x) {
  return full_state_matrix(model.dict) * (model.theta * model.dict.feature_map(x));
}

std::complex<double> KoopmanEigenfunction::operator()(const Dictionary& d, const Vector& x) const {
  const Vector z = d.feature_map(x);
  if (z.size() != coefficients.size()) throw InputError("eigenfunction and dictionary differ in size");
  return (coefficients.array() * z.cast<std::complex<double>>().array()).sum();
}

std::vector<KoopmanEigenfunction> koopman_eigenfunctions(const GedmdModel& model) {
  Eigen::EigenSolver<Matrix> es(model.theta.transpose());
  if (es.info() != Eigen::Success) throw NumericError("eigen-decomposition of Theta^T failed");
  std::vector<KoopmanEigenfunction> out;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    Eigen::VectorXcd v = es.eigenvectors().col(i);
    Eigen::Index big = 0;
    v.cwiseAbs().maxCoeff(&big);
    // Rotate so the largest entry is real positive.
    const std::complex<double> phase = std::abs(v[big]) > 0.0 ? v[big] / std::abs(v[big]) : 1.0;
    v = (v / phase).eval();
    v.normalize();
    out.push_back(KoopmanEigenfunction{es.eigenvalues()[i], v});
  }
  std::sort(out.begin(), out.end(), [](const KoopmanEigenfunction& l, const KoopmanEigenfunction& r) {
    if (l.eigenvalue.real() != r.eigenvalue.real()) return l.eigenvalue.real() > r.eigenvalue.real();
    return l.eigenvalue.imag() > r.eigenvalue.imag();
  });
  return out;
}

}  // namespace qendy
