#include <doctest.h>

#include "generators.hpp"
#include "qendy/approx.hpp"
#include "qendy/baselines.hpp"
#include "qendy/error.hpp"
#include "qendy/expr.hpp"
#include "qendy/fit.hpp"
#include "qendy/systems.hpp"

#include <cmath>

using namespace qendy;
using qendy::testing::Rng;

namespace {
Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) out[i++] = d;
  return out;
}

TrainingSet uniform_data(const VectorField& f, std::size_t dim, double half, std::size_t m, std::uint64_t seed) {
  return exact_derivatives(f, sample_uniform(symmetric_box(dim, half), m, seed));
}
}  // namespace

TEST_CASE("SINDy recovers the pendulum coefficients") {
  const SindyModel s = sindy_fit(systems::pendulum_dictionary(), uniform_data(systems::pendulum(0.1), 2, 1.0, 100, 0));
  Matrix expected(2, 4);
  expected << 0, 1, 0, 0, 0, -0.1, -1, 0;
  CHECK((s.xi - expected).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((sindy_rhs(s, vec({0.3, -0.2})) - systems::pendulum(0.1)(vec({0.3, -0.2}))).norm() < 1e-8);
}

TEST_CASE("SINDy edge cases") {
  const Dictionary d = systems::pendulum_dictionary();
  const SindyModel z = sindy_fit(d, uniform_data(systems::zero(2), 2, 1.0, 20, 1));
  CHECK(z.xi.isZero(0.0));

  // -x/(1+x) is not a polynomial, so a polynomial dictionary leaves a residual.
  const Dictionary poly = Dictionary::parse(1, {"x1", "x1^2"});
  const Trajectory tr = sample_trajectory(systems::rational(), vec({1.0}), 5.0, 11);
  const TrainingSet ts = exact_derivatives(systems::rational(), tr.states);
  const SindyModel r = sindy_fit(poly, ts);
  CHECK(sindy_residual(r, ts) > 1e-6);

  CHECK_THROWS_AS(sindy_fit(d, TrainingSet{}), InputError);
  CHECK_THROWS_AS(sindy_fit(poly, uniform_data(systems::pendulum(0.1), 2, 1.0, 5, 0)), InputError);
}

TEST_CASE("SINDy on the Thomas dictionary") {
  const SindyModel s{systems::thomas9_dictionary(), Matrix::Zero(3, 9)};
  Matrix xi = Matrix::Zero(3, 9);
  for (Eigen::Index i = 0; i < 3; ++i) {
    xi(i, 3 + (i + 1) % 3) = 1.0;
    xi(i, i) = -0.2;
  }
  const SindyModel hand{systems::thomas9_dictionary(), xi};
  CHECK(sindy_rhs(hand, vec({0.0, M_PI / 2, 0.0}))[0] == doctest::Approx(1.0));
  CHECK(sindy_rhs(s, vec({0.0, M_PI / 2, 0.0})).isZero(0.0));

  const VectorField f = systems::thomas(0.2, 0.0);
  const TrainingSet ts = exact_derivatives(f, sample_trajectory(f, vec({1.0, -1.0, 0.0}), 100.0, 1000).states);
  const SindyModel fitted = sindy_fit(systems::thomas9_dictionary(), ts);
  CHECK((fitted.xi - xi).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("SINDy thresholding") {
  const Dictionary d = systems::pendulum_dictionary();
  TrainingSet ts = uniform_data(systems::pendulum(0.1), 2, 1.0, 200, 3);
  Rng rng(41);
  for (Eigen::Index k = 0; k < ts.derivatives.rows(); ++k) {
    ts.derivatives(k, 0) += 1e-4 * testing::uniform(rng, -1.0, 1.0);
    ts.derivatives(k, 1) += 1e-4 * testing::uniform(rng, -1.0, 1.0);
  }
  SindyOptions opts;
  opts.threshold = 0.05;
  const SindyModel s = sindy_fit(d, ts, opts);
  CHECK(s.xi(0, 0) == 0.0);
  CHECK(s.xi(0, 2) == 0.0);
  CHECK(s.xi(0, 3) == 0.0);
  CHECK(s.xi(1, 0) == 0.0);
  CHECK(s.xi(1, 3) == 0.0);
  CHECK(s.xi(0, 1) == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(s.xi(1, 2) == doctest::Approx(-1.0).epsilon(1e-3));
  opts.threshold = -1.0;
  CHECK_THROWS_AS(sindy_fit(d, ts, opts), InputError);
}

TEST_CASE("gEDMD on the linear lift") {
  const Dictionary d = systems::linear_lift_dictionary();
  const GedmdModel g = gedmd_fit(d, uniform_data(systems::linear_lift(), 2, 1.0, 50, 4));
  Matrix theta(3, 3);
  theta << 1, 0, -1, 0, 2, 0, 0, 0, 8;
  CHECK((g.theta - theta).cwiseAbs().maxCoeff() < 1e-8);

  const auto efs = koopman_eigenfunctions(g);
  REQUIRE(efs.size() == 3);
  CHECK(efs[0].eigenvalue.real() == doctest::Approx(8.0));
  CHECK(efs[2].eigenvalue.real() == doctest::Approx(1.0));
  const Eigen::VectorXcd v = efs[2].coefficients;
  const Vector expected = vec({7.0, 0.0, 1.0}).normalized();
  CHECK((v - expected.cast<std::complex<double>>()).cwiseAbs().maxCoeff() < 1e-8);

  // Generator identity grad(phi) . F = lambda phi at random points.
  Rng rng(42);
  for (const auto& ef : efs) {
    for (int k = 0; k < 20; ++k) {
      const Vector x = testing::random_vector(rng, 2, -1.0, 1.0);
      const Eigen::VectorXcd grad = (d.jacobian(x).transpose().cast<std::complex<double>>() * ef.coefficients);
      const std::complex<double> lhs = grad.dot(systems::linear_lift()(x).cast<std::complex<double>>());
      CHECK(std::abs(lhs - ef.eigenvalue * ef(d, x)) < 1e-8);
    }
  }
}

TEST_CASE("gEDMD special cases") {
  const Dictionary with_const = Dictionary::parse(2, {"x1", "x2", "1"});
  const GedmdModel g = gedmd_fit(with_const, uniform_data(systems::rotation(), 2, 1.0, 30, 5));
  CHECK(g.theta.row(2).cwiseAbs().maxCoeff() < 1e-12);

  const GedmdModel p = gedmd_fit(systems::pendulum_dictionary(), uniform_data(systems::pendulum(0.1), 2, 1.0, 100, 6));
  Rng rng(43);
  for (int k = 0; k < 20; ++k) {
    const Vector x = testing::random_vector(rng, 2, -1.0, 1.0);
    CHECK((gedmd_rhs(p, x) - systems::pendulum(0.1)(x)).cwiseAbs().maxCoeff() < 1e-8);
  }

  const VectorField diag = VectorField::from_exprs(2, {parse_expr("-x1"), parse_expr("-2*x2")});
  const GedmdModel dg = gedmd_fit(systems::identity_dictionary(2), uniform_data(diag, 2, 1.0, 10, 7));
  CHECK((dg.theta - Matrix(vec({-1.0, -2.0}).asDiagonal())).cwiseAbs().maxCoeff() < 1e-12);
  const auto efs = koopman_eigenfunctions(dg);
  CHECK(efs[0].eigenvalue.real() == doctest::Approx(-1.0));
  CHECK(std::abs(efs[0].coefficients[0]) == doctest::Approx(1.0));
  CHECK(efs[1].eigenvalue.real() == doctest::Approx(-2.0));
}

TEST_CASE("SINDy sample estimate converges to the quadrature solution") {
  // Pendulum second component in the non-exact span {x1, x2}: best L2 coefficients differ from the Taylor ones.
  const Dictionary d = systems::identity_dictionary(2);
  const VectorField f = systems::pendulum(0.1);
  const InnerProductSpace space = InnerProductSpace::continuous(symmetric_box(2, 1.0), 20);
  BestApproxProblem prob;
  for (std::size_t i = 0; i < 2; ++i) prob.basis.push_back([i](const Vector& x) { return x[static_cast<Eigen::Index>(i)]; });
  prob.target = [&f](const Vector& x) { return f(x)[1]; };
  const GramPair gp = gram(prob, space);
  const Vector xi_star = solve_min_norm(gp.a, gp.b);
  // Oracle: <x1, -sin x1> / <x1, x1> over [-1, 1] with uniform weight is -3 (sin 1 - cos 1).
  CHECK(xi_star[0] == doctest::Approx(-3.0 * (std::sin(1.0) - std::cos(1.0))).epsilon(1e-10));
  CHECK(xi_star[1] == doctest::Approx(-0.1).epsilon(1e-10));

  std::vector<double> ms{100, 1000, 10000};
  std::vector<double> errs;
  for (double m : ms) {
    double total = 0.0;
    for (std::uint64_t run = 0; run < 20; ++run) {
      const SindyModel s = sindy_fit(d, uniform_data(f, 2, 1.0, static_cast<std::size_t>(m), 100 + run));
      total += (s.xi.row(1).transpose() - xi_star).cwiseAbs().mean();
    }
    errs.push_back(total / 20.0);
  }
  const auto slope = loglog_slope(ms, errs);
  REQUIRE(slope.has_value());
  CHECK(*slope < -0.35);
  CHECK(*slope > -0.65);
}
