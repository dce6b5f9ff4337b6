#include "qendy/dictionary.hpp"

#include "qendy/error.hpp"

#include <random>

namespace qendy {

Dictionary::Dictionary(std::size_t state_dim, std::vector<Expr> basis, std::vector<std::string> names)
    : state_dim_(state_dim), basis_(std::move(basis)), names_(std::move(names)) {
  if (state_dim_ == 0) throw InputError("dictionary state dimension must be >= 1");
  if (basis_.empty()) throw InputError("dictionary must contain at least one basis function");
  for (std::size_t i = 0; i < basis_.size(); ++i) {
    if (basis_[i].min_state_dim() > state_dim_) {
      throw InputError("basis function " + std::to_string(i + 1) + " (" + basis_[i].render() +
                       ") references a variable beyond state dimension " + std::to_string(state_dim_));
    }
  }
  if (names_.empty()) {
    names_.reserve(basis_.size());
    for (const Expr& e : basis_) names_.push_back(e.render());
  } else if (names_.size() != basis_.size()) {
    throw InputError("dictionary names and basis differ in length");
  }
}

Dictionary Dictionary::parse(std::size_t state_dim, const std::vector<std::string>& basis) {
  std::vector<Expr> exprs;
  exprs.reserve(basis.size());
  for (const std::string& s : basis) exprs.push_back(parse_expr(s));
  return Dictionary(state_dim, std::move(exprs), basis);
}

Vector Dictionary::feature_map(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != state_dim_) {
    throw InputError("state has dimension " + std::to_string(x.size()) + ", dictionary expects " +
                     std::to_string(state_dim_));
  }
  Vector z(static_cast<Eigen::Index>(basis_.size()));
  for (std::size_t i = 0; i < basis_.size(); ++i) {
    try {
      z[static_cast<Eigen::Index>(i)] = basis_[i].eval(x);
    } catch (const DomainError& e) {
      throw DomainError("basis function " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return z;
}

Matrix Dictionary::jacobian(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != state_dim_) {
    throw InputError("state has dimension " + std::to_string(x.size()) + ", dictionary expects " +
                     std::to_string(state_dim_));
  }
  Matrix j(static_cast<Eigen::Index>(basis_.size()), static_cast<Eigen::Index>(state_dim_));
  for (std::size_t i = 0; i < basis_.size(); ++i) {
    try {
      j.row(static_cast<Eigen::Index>(i)) = basis_[i].grad(x).transpose();
    } catch (const DomainError& e) {
      throw DomainError("basis function " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return j;
}

Dictionary Dictionary::with_full_state_override(Matrix g) const {
  if (static_cast<std::size_t>(g.rows()) != state_dim_ || static_cast<std::size_t>(g.cols()) != basis_.size()) {
    throw ConfigError("full-state matrix must be " + std::to_string(state_dim_) + "x" +
                      std::to_string(basis_.size()));
  }
  Dictionary copy = *this;
  copy.g_override_ = std::move(g);
  return copy;
}

Vector AugmentedBasis::feature_map(const Vector& x) const {
  const Vector z = source_.feature_map(x);
  const Eigen::Index n = z.size();
  Vector out(static_cast<Eigen::Index>(size()));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) out[n * i + j] = z[i] * z[j];
  }
  out.segment(n * n, n) = z;
  out[out.size() - 1] = 1.0;
  return out;
}

Dictionary AugmentedBasis::as_dictionary() const {
  const auto& b = source_.basis();
  const auto& names = source_.names();
  std::vector<Expr> exprs;
  std::vector<std::string> labels;
  exprs.reserve(size());
  labels.reserve(size());
  for (std::size_t i = 0; i < b.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      exprs.push_back(Expr::mul(b[i], b[j]));
      labels.push_back("(" + names[i] + ")*(" + names[j] + ")");
    }
  }
  for (std::size_t i = 0; i < b.size(); ++i) {
    exprs.push_back(b[i]);
    labels.push_back(names[i]);
  }
  exprs.push_back(Expr::constant(1.0));
  labels.emplace_back("1");
  return Dictionary(source_.state_dim(), std::move(exprs), std::move(labels));
}

AugmentedBasis augment(const Dictionary& d) { return AugmentedBasis(d); }

Matrix full_state_matrix(const Dictionary& d) {
  if (d.full_state_override()) return *d.full_state_override();
  const auto n = static_cast<Eigen::Index>(d.state_dim());
  Matrix g = Matrix::Zero(n, static_cast<Eigen::Index>(d.size()));
  for (Eigen::Index j = 0; j < n; ++j) {
    const Expr coord = Expr::var(static_cast<std::size_t>(j));
    bool found = false;
    for (std::size_t i = 0; i < d.size() && !found; ++i) {
      if (d.basis()[i] == coord) {
        g(j, static_cast<Eigen::Index>(i)) = 1.0;
        found = true;
      }
    }
    if (!found) {
      throw ConfigError("coordinate x" + std::to_string(j + 1) +
                        " is not representable: it does not appear verbatim in the dictionary "
                        "and no full-state matrix G was supplied");
    }
  }
  return g;
}

void validate_full_state_matrix(const Dictionary& d, const Matrix& g, const Box& domain, std::uint64_t seed,
                                std::size_t points, double tol) {
  if (static_cast<std::size_t>(g.rows()) != d.state_dim() || static_cast<std::size_t>(g.cols()) != d.size()) {
    throw ConfigError("full-state matrix has wrong shape");
  }
  if (domain.size() != d.state_dim()) throw ConfigError("validation domain dimension mismatch");
  std::mt19937_64 rng(seed);
  Vector x(static_cast<Eigen::Index>(d.state_dim()));
  for (std::size_t k = 0; k < points; ++k) {
    for (std::size_t j = 0; j < domain.size(); ++j) {
      std::uniform_real_distribution<double> u(domain[j].lo, domain[j].hi);
      x[static_cast<Eigen::Index>(j)] = u(rng);
    }
    const double err = (g * d.feature_map(x) - x).norm();
    if (!(err < tol)) {
      throw ConfigError("full-state matrix G does not reproduce the state: ||G phi(x) - x|| = " +
                        std::to_string(err));
    }
  }
}

}  // namespace qendy
