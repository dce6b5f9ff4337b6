#pragma once

#include "qendy/dictionary.hpp"
#include "qendy/dynamics.hpp"
#include "qendy/types.hpp"

#include <complex>
#include <optional>
#include <vector>

namespace qendy {

/// Direct approximation x' = Xi phi(x); Xi is n x N.
struct SindyModel {
  Dictionary dict;
  Matrix xi;
};

struct SindyOptions {
  /// One hard-thresholding pass (|xi| < threshold zeroed, then refit on survivors). Off by default.
  std::optional<double> threshold;
  std::optional<double> pinv_cutoff;
};

/// Minimum-norm solution of Phi Phi^T Xi_l^T = Phi Xdot_l^T for every state coordinate l.
SindyModel sindy_fit(const Dictionary& d, const TrainingSet& ts, const SindyOptions& opts = {});
Vector sindy_rhs(const SindyModel& model, const Vector& x);
/// ||Xdot - Xi Phi||_F^2 on the given data.
double sindy_residual(const SindyModel& model, const TrainingSet& ts);

/// Generator approximation with Phidot ~= Theta Phi (Theta is N x N).
///
/// Row i of Theta expresses d/dt phi_i as a combination of the basis, so the
/// lifted linear system reads z' = Theta z. The Koopman generator matrix in the
/// coefficient representation is Theta^T.
struct GedmdModel {
  Dictionary dict;
  Matrix theta;
};

struct GedmdOptions {
  std::optional<double> pinv_cutoff;
};

GedmdModel gedmd_fit(const Dictionary& d, const TrainingSet& ts, const GedmdOptions& opts = {});
/// x' ~= G Theta phi(x).
Vector gedmd_rhs(const GedmdModel& model, const Vector& x);

/// Eigenfunction x -> v . phi(x) with L (v . phi) = lambda (v . phi).
struct KoopmanEigenfunction {
  std::complex<double> eigenvalue;
  /// Coefficients v with Theta^T v = lambda v; scaled to unit norm, largest entry real positive.
  Eigen::VectorXcd coefficients;
  std::complex<double> operator()(const Dictionary& d, const Vector& x) const;
};

/// Eigenpairs of Theta^T sorted by decreasing real part, then imaginary part.
std::vector<KoopmanEigenfunction> koopman_eigenfunctions(const GedmdModel& model);

}  // namespace qendy
