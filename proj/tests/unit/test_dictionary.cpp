#include <doctest.h>

#include "generators.hpp"
#include "qendy/dictionary.hpp"
#include "qendy/error.hpp"
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
}  // namespace

TEST_CASE("feature_map examples") {
  CHECK(systems::pendulum_dictionary().feature_map(vec({0.0, 1.0})) == vec({0.0, 1.0, 0.0, 1.0}));
  const Vector r = systems::rational_dictionary().feature_map(vec({1.0}));
  CHECK(r[0] == 1.0);
  CHECK(r[1] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(r[2] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(systems::thomas9_dictionary().feature_map(vec({0.0, 0.0, 0.0})) ==
        vec({0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0}));
}

TEST_CASE("feature_map reports the failing basis index") {
  const Dictionary d = Dictionary::parse(1, {"x1", "1/x1"});
  try {
    d.feature_map(vec({0.0}));
    FAIL("expected a domain error");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("basis function 2") != std::string::npos);
  }
  CHECK_THROWS_AS(d.feature_map(vec({1.0, 2.0})), InputError);
}

TEST_CASE("jacobian examples") {
  const Dictionary p = systems::pendulum_dictionary();
  const Vector x = vec({0.7, -0.4});
  Matrix expected(4, 2);
  expected << 1, 0, 0, 1, std::cos(0.7), 0, -std::sin(0.7), 0;
  CHECK((p.jacobian(x) - expected).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(Dictionary::parse(1, {"x1"}).jacobian(vec({5.0})) == Matrix::Ones(1, 1));
  Matrix rj(3, 1);
  rj << 1, -1, 1;
  CHECK((systems::rational_dictionary().jacobian(vec({0.0})) - rj).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("augment ordering and size") {
  const AugmentedBasis a1 = augment(Dictionary::parse(1, {"x1"}));
  CHECK(a1.size() == 3);
  CHECK(a1.feature_map(vec({3.0})) == vec({9.0, 3.0, 1.0}));

  const Dictionary d2 = Dictionary::parse(2, {"x1", "x2"});
  const AugmentedBasis a2 = augment(d2);
  CHECK(a2.size() == 7);
  CHECK(a2.feature_map(vec({2.0, 5.0})) == vec({4.0, 10.0, 10.0, 25.0, 2.0, 5.0, 1.0}));

  const AugmentedBasis ap = augment(systems::pendulum_dictionary());
  CHECK(ap.size() == 21);
  // Pair (2,4), 1-based, at row-major index 4*(2-1)+4.
  CHECK(ap.feature_map(vec({0.0, 1.0}))[static_cast<Eigen::Index>(ap.product_index(1, 3))] == 1.0);
  CHECK(ap.product_index(1, 3) == 7);
  CHECK(ap.singleton_index(0) == 16);
  CHECK(ap.constant_index() == 20);
}

TEST_CASE("augmented basis as a dictionary has the same values") {
  const Dictionary d = systems::pendulum_dictionary();
  const Dictionary ad = augment(d).as_dictionary();
  const Vector x = vec({0.3, -0.2});
  CHECK((ad.feature_map(x) - augment(d).feature_map(x)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("full_state_matrix examples") {
  Matrix gp(2, 4);
  gp << 1, 0, 0, 0, 0, 1, 0, 0;
  CHECK(full_state_matrix(systems::pendulum_dictionary()) == gp);
  Matrix gr(1, 3);
  gr << 1, 0, 0;
  CHECK(full_state_matrix(systems::rational_dictionary()) == gr);
  try {
    full_state_matrix(Dictionary::parse(1, {"sin(x1)"}));
    FAIL("expected a configuration error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("x1") != std::string::npos);
  }
}

TEST_CASE("full_state_matrix picks the first verbatim coordinate") {
  const Dictionary d = Dictionary::parse(2, {"x2^2", "x2", "x1", "x1"});
  Matrix g(2, 4);
  g << 0, 0, 1, 0, 0, 1, 0, 0;
  CHECK(full_state_matrix(d) == g);
}

TEST_CASE("user-supplied G is validated") {
  const Dictionary d = Dictionary::parse(1, {"x1+1", "1"});
  Matrix g(1, 2);
  g << 1, -1;
  const Dictionary dg = d.with_full_state_override(g);
  CHECK(full_state_matrix(dg) == g);
  CHECK_NOTHROW(validate_full_state_matrix(dg, g, symmetric_box(1, 2.0), 0));
  Matrix bad(1, 2);
  bad << 1, 0;
  CHECK_THROWS_AS(validate_full_state_matrix(d, bad, symmetric_box(1, 2.0), 0), ConfigError);
  CHECK_THROWS_AS(d.with_full_state_override(Matrix::Ones(2, 2)), ConfigError);
}

TEST_CASE("construction errors") {
  CHECK_THROWS_AS(Dictionary(1, {}), InputError);
  CHECK_THROWS_AS(Dictionary::parse(1, {"x2"}), InputError);
  CHECK_THROWS_AS(Dictionary::parse(1, {"x1+"}), SyntaxError);
}

TEST_CASE("property: product block entries, jacobian rows and G projection") {
  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = static_cast<std::size_t>(testing::uniform_int(rng, 1, 3));
    const Dictionary d = testing::random_dictionary(rng, n, static_cast<std::size_t>(testing::uniform_int(rng, 0, 3)));
    const AugmentedBasis a = augment(d);
    const Vector x = testing::random_vector(rng, static_cast<Eigen::Index>(n));
    const Vector z = d.feature_map(x);
    const Vector zb = a.feature_map(x);
    for (std::size_t i = 0; i < d.size(); ++i) {
      for (std::size_t j = 0; j < d.size(); ++j) {
        CHECK(zb[static_cast<Eigen::Index>(a.product_index(i, j))] ==
              z[static_cast<Eigen::Index>(i)] * z[static_cast<Eigen::Index>(j)]);
      }
    }
    CHECK(zb[zb.size() - 1] == 1.0);
    const Matrix j = d.jacobian(x);
    for (std::size_t i = 0; i < d.size(); ++i) {
      CHECK(j.row(static_cast<Eigen::Index>(i)).transpose() == d.basis()[i].grad(x));
    }
    CHECK(full_state_matrix(d) * z == x);
  }
}
