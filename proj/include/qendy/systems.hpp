#pragma once

#include "qendy/dictionary.hpp"
#include "qendy/dynamics.hpp"

#include <map>
#include <string>
#include <vector>

namespace qendy::systems {

/// x' = -x / (1 + x).
VectorField rational();
/// [x, 1/(1+x), x/(1+x)^2].
Dictionary rational_dictionary();

/// Damped pendulum x1' = x2, x2' = -sin(x1) - c x2.
VectorField pendulum(double damping = 0.1);
/// [x1, x2, sin(x1), cos(x1)].
Dictionary pendulum_dictionary();

/// x1' = x1 - x2^4, x2' = 2 x2; linear in [x1, x2, x2^4].
VectorField linear_lift();
Dictionary linear_lift_dictionary();

/// x1' = x1 - x2^4, x2' = x1 + 2 x2; quadratic in [x1, x2, x2^2].
VectorField quadratic_lift();
Dictionary quadratic_lift_dictionary();

/// Modified Thomas system x_i' = sin(x_{i+1}) - alpha x_i - beta x_{i+1} cos(x_i) (indices cyclic).
VectorField thomas(double alpha, double beta);
/// [x1, x2, x3, sin x1..3, cos x1..3].
Dictionary thomas9_dictionary();
/// thomas9 plus [x2 sin x1, x3 sin x2, x1 sin x3, x2 cos x1, x3 cos x2, x1 cos x3].
Dictionary thomas15_dictionary();

/// Mean-field vortex-shedding model:
///   x' = mu x - omega y + a x z,  y' = omega x + mu y + a y z,  z' = -lambda (z - x^2 - y^2).
/// Stable limit cycle of radius sqrt(-mu/a) on the paraboloid z = x^2 + y^2.
VectorField mean_field(double mu = 0.1, double omega = 1.0, double a = -0.1, double lambda = 10.0);

/// x' = [[0, 1], [-1, 0]] x.
VectorField rotation();

VectorField zero(std::size_t dim);

/// [x1, ..., xn].
Dictionary identity_dictionary(std::size_t dim);

/// Named benchmark lookup used by the CLI. Parameters not listed in `params` take
/// their defaults; unknown parameter names throw ConfigError.
VectorField by_name(const std::string& name, const std::map<std::string, double>& params = {});
/// Default dictionary for a named benchmark ("thomas15" and "identity:<n>" also accepted).
Dictionary dictionary_by_name(const std::string& name);
std::vector<std::string> names();

}  // namespace qendy::systems
