#include "qendy/reduction.hpp"

#include "qendy/error.hpp"
#include "qendy/systems.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace qendy {

Vector PcaBasis::explained_variance_ratio() const {
  const double total = spectrum.squaredNorm();
  if (total == 0.0) return Vector::Zero(singular_values.size());
  return singular_values.array().square() / total;
}

PcaBasis pca_fit(const Matrix& data, std::size_t k) {
  const Eigen::Index m = data.rows();
  const Eigen::Index dim = data.cols();
  if (m < 2) throw InputError("PCA needs at least 2 samples");
  if (k < 1 || static_cast<Eigen::Index>(k) > std::min(m, dim)) {
    throw InputError("PCA rank must satisfy 1 <= k <= min(m, D)");
  }
  if (!data.allFinite()) throw InputError("PCA data contains non-finite entries");
  PcaBasis basis;
  basis.mean = data.colwise().mean().transpose();
  const Matrix centered = data.rowwise() - basis.mean.transpose();
  Eigen::JacobiSVD<Matrix> svd(centered, Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw NumericError("SVD of the centered data failed");
  const auto kk = static_cast<Eigen::Index>(k);
  basis.spectrum = svd.singularValues();
  basis.singular_values = basis.spectrum.head(kk);
  basis.components = svd.matrixV().leftCols(kk).transpose();
  for (Eigen::Index i = 0; i < kk; ++i) {
    Eigen::Index big = 0;
    basis.components.row(i).cwiseAbs().maxCoeff(&big);
    if (basis.components(i, big) < 0.0) basis.components.row(i) *= -1.0;
  }
  return basis;
}

Matrix project(const Matrix& data, const PcaBasis& basis) {
  if (static_cast<std::size_t>(data.cols()) != basis.ambient_dim()) {
    throw InputError("data has " + std::to_string(data.cols()) + " columns, PCA basis expects " +
                     std::to_string(basis.ambient_dim()));
  }
  return (data.rowwise() - basis.mean.transpose()) * basis.components.transpose();
}

Matrix lift(const Matrix& reduced, const PcaBasis& basis) {
  if (static_cast<std::size_t>(reduced.cols()) != basis.rank()) {
    throw InputError("reduced data has " + std::to_string(reduced.cols()) + " columns, PCA basis has rank " +
                     std::to_string(basis.rank()));
  }
  return (reduced * basis.components).rowwise() + basis.mean.transpose();
}

double relative_rms(const Matrix& estimate, const Matrix& reference) {
  if (estimate.rows() != reference.rows() || estimate.cols() != reference.cols()) {
    throw InputError("relative RMS needs matching shapes");
  }
  const double denom = reference.norm();
  if (denom == 0.0) return estimate.norm() == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return (estimate - reference).norm() / denom;
}

PipelineResult reduced_identification_pipeline(const Matrix& data, const PipelineOptions& opts) {
  if (!(opts.train_fraction > 0.0 && opts.train_fraction <= 1.0)) {
    throw InputError("train_fraction must lie in (0, 1]");
  }
  if (!(opts.dt > 0.0)) throw InputError("dt must be positive");
  const Eigen::Index m = data.rows();
  PcaBasis basis = pca_fit(data, opts.k);
  Matrix reduced = project(data, basis);

  const auto train = static_cast<Eigen::Index>(std::floor(opts.train_fraction * static_cast<double>(m)));
  if (train < 3) throw InputError("training segment needs at least 3 snapshots");
  Trajectory tr;
  tr.times = Vector::LinSpaced(train, 0.0, opts.dt * static_cast<double>(train - 1));
  tr.states = reduced.topRows(train);
  const TrainingSet ts = finite_diff_derivatives(tr);
  const Dictionary dict = systems::identity_dictionary(opts.k);
  QuadraticModel model = fit(dict, ts, opts.fit);

  if (opts.substeps == 0) throw InputError("substeps must be >= 1");
  const double h = opts.dt / static_cast<double>(opts.substeps);
  const double horizon = opts.dt * static_cast<double>(m - 1);
  IntegrationResult run = rk4_integrate_partial([&model](const Vector& z) { return model.evaluate(z); },
                                                Vector(reduced.row(0).transpose()), horizon, h, opts.substeps);

  PipelineResult result{std::move(basis), std::move(model), std::move(reduced), std::move(run.trajectory.states),
                        static_cast<std::size_t>(train), 0.0, 0.0, run.failed_step};
  const Eigen::Index got = result.forecast.rows();
  const Eigen::Index train_rows = std::min(got, train);
  result.train_relative_rms = relative_rms(result.forecast.topRows(train_rows), result.reduced.topRows(train_rows));
  if (got < m) {
    result.test_relative_rms = std::numeric_limits<double>::infinity();
  } else if (train < m) {
    result.test_relative_rms =
        relative_rms(result.forecast.bottomRows(m - train), result.reduced.bottomRows(m - train));
  }
  return result;
}

Matrix random_orthonormal(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  if (cols > rows || cols == 0) throw InputError("orthonormal columns need 1 <= cols <= rows");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix g(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, j) = gauss(rng);
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  return qr.householderQ() * Matrix::Identity(g.rows(), g.cols());
}

SyntheticLift synthetic_limit_cycle(const SyntheticLiftOptions& opts) {
  if (opts.ambient_dim < 3) throw InputError("ambient dimension must be >= 3");
  if (opts.samples < 3) throw InputError("need at least 3 samples");
  const VectorField f = systems::mean_field(opts.growth, opts.frequency, opts.saturation, opts.relaxation);
  Vector x0(3);
  x0 << opts.initial_radius, 0.0, opts.initial_height;
  const double t_end = opts.dt * static_cast<double>(opts.samples - 1);
  SyntheticLift out;
  out.latent = sample_trajectory(f, x0, t_end, opts.samples, 10).states;
  out.lift = random_orthonormal(opts.ambient_dim, 3, opts.seed).transpose();
  out.data = out.latent * out.lift;
  if (opts.noise > 0.0) {
    std::mt19937_64 rng(opts.seed ^ 0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> gauss(0.0, opts.noise);
    for (Eigen::Index j = 0; j < out.data.cols(); ++j) {
      for (Eigen::Index i = 0; i < out.data.rows(); ++i) out.data(i, j) += gauss(rng);
    }
  }
  return out;
}

}  // namespace qendy
