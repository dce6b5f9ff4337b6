#pragma once

#include "qendy/fit.hpp"
#include "qendy/quadmodel.hpp"
#include "qendy/types.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>

namespace qendy {

/// Principal components of mean-centered data.
struct PcaBasis {
  Vector mean;              // D
  Matrix components;        // k x D, orthonormal rows
  Vector singular_values;   // k, non-increasing
  Vector spectrum;          // all singular values of the centered data
  std::size_t rank() const { return static_cast<std::size_t>(components.rows()); }
  std::size_t ambient_dim() const { return static_cast<std::size_t>(components.cols()); }
  /// sigma_i^2 / sum_j sigma_j^2 for the retained components.
  Vector explained_variance_ratio() const;
};

/// Top-k right singular vectors of the centered m x D data; the largest-magnitude
/// entry of each component is made positive.
PcaBasis pca_fit(const Matrix& data, std::size_t k);
/// (data - mean) components^T, m x k.
Matrix project(const Matrix& data, const PcaBasis& basis);
/// reduced components + mean, m x D.
Matrix lift(const Matrix& reduced, const PcaBasis& basis);

struct PipelineOptions {
  std::size_t k = 3;
  double train_fraction = 0.8;
  /// Sampling interval of the snapshots.
  double dt = 1.0;
  /// RK4 steps per snapshot interval for the forecast.
  std::size_t substeps = 10;
  FitOptions fit;
};

struct PipelineResult {
  PcaBasis basis;
  QuadraticModel model;
  Matrix reduced;    // m x k, projected data
  Matrix forecast;   // rows up to the last finite forecast state
  std::size_t train_count = 0;
  double train_relative_rms = 0.0;
  double test_relative_rms = 0.0;
  std::optional<std::size_t> failed_step;
};

/// PCA, projection, finite-difference derivatives on the first train_fraction of the
/// snapshots, quadratic fit with z = reduced state, forecast over the full horizon.
PipelineResult reduced_identification_pipeline(const Matrix& data, const PipelineOptions& opts);

/// ||a - b||_F / ||b||_F over matching rows.
double relative_rms(const Matrix& estimate, const Matrix& reference);

/// Random D x D' matrix with orthonormal columns (D >= D').
Matrix random_orthonormal(std::size_t rows, std::size_t cols, std::uint64_t seed);

struct SyntheticLiftOptions {
  std::size_t ambient_dim = 100;
  std::size_t samples = 2000;
  double dt = 0.05;
  double noise = 1e-3;
  /// Initial radius of the oscillation; small values include the transient onto the cycle.
  double initial_radius = 0.1;
  /// Initial height; values away from radius^2 excite the relaxation onto the paraboloid.
  double initial_height = 1.0;
  /// Mean-field parameters: growth, frequency, saturation and relaxation rate.
  double growth = 0.1;
  double frequency = 1.0;
  double saturation = -0.1;
  double relaxation = 10.0;
  std::uint64_t seed = 0;
};

struct SyntheticLift {
  Matrix latent;   // m x 3
  Matrix lift;     // 3 x D, orthonormal rows
  Matrix data;     // m x D = latent lift + noise
};

/// Mean-field oscillator (limit cycle of radius 1 on the paraboloid) lifted to D dimensions.
SyntheticLift synthetic_limit_cycle(const SyntheticLiftOptions& opts);

}  // namespace qendy
