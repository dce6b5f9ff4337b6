#include "qendy/systems.hpp"

#include "qendy/error.hpp"

#include <cmath>

namespace qendy::systems {

namespace {

Expr x(std::size_t i) { return Expr::var(i); }
Expr c(double v) { return Expr::constant(v); }

double param(const std::map<std::string, double>& params, const std::string& key, double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

void check_params(const std::map<std::string, double>& params, std::initializer_list<const char*> allowed,
                  const std::string& system) {
  for (const auto& [key, value] : params) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError("system '" + system + "' has no parameter '" + key + "'");
  }
}

}  // namespace

VectorField rational() {
  // -x * (1 + x)^-1
  return VectorField::from_exprs(1, {c(-1.0) * x(0) * Expr::inv(c(1.0) + x(0))});
}

Dictionary rational_dictionary() {
  return Dictionary::parse(1, {"x1", "1/(1+x1)", "x1/(1+x1)^2"});
}

VectorField pendulum(double damping) {
  return VectorField::from_exprs(2, {x(1), -Expr::sin(x(0)) - damping * x(1)});
}

Dictionary pendulum_dictionary() { return Dictionary::parse(2, {"x1", "x2", "sin(x1)", "cos(x1)"}); }

VectorField linear_lift() {
  return VectorField::from_exprs(2, {x(0) - Expr::pow(x(1), 4), 2.0 * x(1)});
}

Dictionary linear_lift_dictionary() { return Dictionary::parse(2, {"x1", "x2", "x2^4"}); }

VectorField quadratic_lift() {
  return VectorField::from_exprs(2, {x(0) - Expr::pow(x(1), 4), x(0) + 2.0 * x(1)});
}

Dictionary quadratic_lift_dictionary() { return Dictionary::parse(2, {"x1", "x2", "x2^2"}); }

VectorField thomas(double alpha, double beta) {
  std::vector<Expr> f;
  for (std::size_t i = 0; i < 3; ++i) {
    const std::size_t next = (i + 1) % 3;
    f.push_back(Expr::sin(x(next)) - alpha * x(i) - beta * (x(next) * Expr::cos(x(i))));
  }
  return VectorField::from_exprs(3, std::move(f));
}

Dictionary thomas9_dictionary() {
  return Dictionary::parse(3, {"x1", "x2", "x3", "sin(x1)", "sin(x2)", "sin(x3)", "cos(x1)", "cos(x2)", "cos(x3)"});
}

Dictionary thomas15_dictionary() {
  return Dictionary::parse(3, {"x1", "x2", "x3", "sin(x1)", "sin(x2)", "sin(x3)", "cos(x1)", "cos(x2)", "cos(x3)",
                               "x2*sin(x1)", "x3*sin(x2)", "x1*sin(x3)", "x2*cos(x1)", "x3*cos(x2)",
                               "x1*cos(x3)"});
}

VectorField mean_field(double mu, double omega, double a, double lambda) {
  const Expr xx = x(0);
  const Expr yy = x(1);
  const Expr zz = x(2);
  return VectorField::from_exprs(
      3, {mu * xx - omega * yy + a * (xx * zz), omega * xx + mu * yy + a * (yy * zz),
          -lambda * zz + lambda * (xx * xx) + lambda * (yy * yy)});
}

VectorField rotation() { return VectorField::from_exprs(2, {x(1), -x(0)}); }

VectorField zero(std::size_t dim) {
  VectorField f;
  f.dim = dim;
  f.rhs = [dim](const Vector&) { return Vector::Zero(static_cast<Eigen::Index>(dim)).eval(); };
  return f;
}

Dictionary identity_dictionary(std::size_t dim) {
  std::vector<Expr> basis;
  for (std::size_t i = 0; i < dim; ++i) basis.push_back(x(i));
  return Dictionary(dim, std::move(basis));
}

VectorField by_name(const std::string& name, const std::map<std::string, double>& params) {
  if (name == "rational") {
    check_params(params, {}, name);
    return rational();
  }
  if (name == "pendulum") {
    check_params(params, {"c"}, name);
    return pendulum(param(params, "c", 0.1));
  }
  if (name == "linear_lift") {
    check_params(params, {}, name);
    return linear_lift();
  }
  if (name == "quadratic_lift") {
    check_params(params, {}, name);
    return quadratic_lift();
  }
  if (name == "thomas") {
    check_params(params, {"alpha", "beta"}, name);
    return thomas(param(params, "alpha", 0.2), param(params, "beta", 0.0));
  }
  if (name == "mean_field") {
    check_params(params, {"mu", "omega", "a", "lambda"}, name);
    return mean_field(param(params, "mu", 0.1), param(params, "omega", 1.0), param(params, "a", -0.1),
                      param(params, "lambda", 10.0));
  }
  if (name == "rotation") {
    check_params(params, {}, name);
    return rotation();
  }
  if (name == "zero") {
    check_params(params, {"n"}, name);
    return zero(static_cast<std::size_t>(param(params, "n", 1.0)));
  }
  throw ConfigError("unknown system '" + name + "'");
}

Dictionary dictionary_by_name(const std::string& name) {
  if (name == "rational") return rational_dictionary();
  if (name == "pendulum") return pendulum_dictionary();
  if (name == "linear_lift") return linear_lift_dictionary();
  if (name == "quadratic_lift") return quadratic_lift_dictionary();
  if (name == "thomas" || name == "thomas9") return thomas9_dictionary();
  if (name == "thomas15") return thomas15_dictionary();
  if (name == "mean_field") return identity_dictionary(3);
  if (name == "rotation") return identity_dictionary(2);
  if (name.rfind("identity:", 0) == 0) {
    const int n = std::stoi(name.substr(9));
    if (n < 1) throw ConfigError("identity dictionary needs dimension >= 1");
    return identity_dictionary(static_cast<std::size_t>(n));
  }
  throw ConfigError("unknown dictionary '" + name + "'");
}

std::vector<std::string> names() {
  return {"rational", "pendulum", "linear_lift", "quadratic_lift", "thomas", "mean_field", "rotation", "zero"};
}

}  // namespace qendy::systems
