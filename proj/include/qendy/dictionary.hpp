#pragma once

#include "qendy/expr.hpp"
#include "qendy/types.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qendy {

/// Ordered list of basis functions phi_1..phi_N over an n-dimensional state.
///
/// Index i in the list is the feature index. An explicit full-state matrix G
/// (n x N) may be attached; otherwise G is derived from the coordinate
/// functions found verbatim in the basis.
class Dictionary {
 public:
  Dictionary(std::size_t state_dim, std::vector<Expr> basis, std::vector<std::string> names = {});

  /// Parses each entry with parse_expr.
  static Dictionary parse(std::size_t state_dim, const std::vector<std::string>& basis);

  std::size_t state_dim() const { return state_dim_; }
  std::size_t size() const { return basis_.size(); }
  const std::vector<Expr>& basis() const { return basis_; }
  const std::vector<std::string>& names() const { return names_; }

  /// z = phi(x).
  Vector feature_map(const Vector& x) const;
  /// J(x), row i = grad phi_i(x)^T; N x n.
  Matrix jacobian(const Vector& x) const;

  const std::optional<Matrix>& full_state_override() const { return g_override_; }
  /// Attaches an explicit G; checks only the shape.
  Dictionary with_full_state_override(Matrix g) const;

 private:
  std::size_t state_dim_;
  std::vector<Expr> basis_;
  std::vector<std::string> names_;
  std::optional<Matrix> g_override_;
};

/// Quadratically augmented basis {phi_i phi_j} u {phi_i} u {1}, size N^2 + N + 1.
///
/// Ordering: the product block first, pair (i, j) at index N*i + j (0-based,
/// row-major), then the N singletons, then the constant.
class AugmentedBasis {
 public:
  explicit AugmentedBasis(Dictionary source) : source_(std::move(source)) {}

  const Dictionary& source() const { return source_; }
  std::size_t size() const { return source_.size() * source_.size() + source_.size() + 1; }

  std::size_t product_index(std::size_t i, std::size_t j) const { return source_.size() * i + j; }
  std::size_t singleton_index(std::size_t i) const { return source_.size() * source_.size() + i; }
  std::size_t constant_index() const { return size() - 1; }

  Vector feature_map(const Vector& x) const;
  /// The augmented basis as a plain dictionary of product/singleton/constant expressions.
  Dictionary as_dictionary() const;

 private:
  Dictionary source_;
};

AugmentedBasis augment(const Dictionary& d);

/// G with x = G phi(x). Uses the attached override when present; otherwise places a
/// single 1 in row j at the first basis entry equal to Var(j). Throws ConfigError
/// naming the first coordinate that is missing.
Matrix full_state_matrix(const Dictionary& d);

/// Checks ||G phi(x) - x|| < tol on `points` uniform samples of `domain`. Throws ConfigError.
void validate_full_state_matrix(const Dictionary& d, const Matrix& g, const Box& domain,
                                std::uint64_t seed = 0, std::size_t points = 100, double tol = 1e-10);

}  // namespace qendy
