#pragma once

#include "qendy/types.hpp"

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qendy {

/// Immutable expression tree for scalar basis functions over an n-dimensional state.
///
/// Nodes: constants, 0-indexed variables, binary Add/Mul, integer powers, sin, cos,
/// exp and reciprocal (Inv). There is no subtraction or division node; the parser
/// lowers those onto Mul/Inv/Pow. Copies share the underlying tree.
class Expr {
 public:
  enum class Kind { Const, Var, Add, Mul, Pow, Sin, Cos, Exp, Inv };

  static Expr constant(double value);
  static Expr var(std::size_t index);
  static Expr add(Expr lhs, Expr rhs);
  static Expr mul(Expr lhs, Expr rhs);
  static Expr pow(Expr base, int exponent);
  static Expr sin(Expr arg);
  static Expr cos(Expr arg);
  static Expr exp(Expr arg);
  static Expr inv(Expr arg);

  Kind kind() const;
  /// Constant value (Const only).
  double value() const;
  /// Variable index (Var only).
  std::size_t index() const;
  /// Exponent (Pow only).
  int exponent() const;
  /// First operand of Add/Mul, sole operand of Pow/Sin/Cos/Exp/Inv.
  const Expr& lhs() const;
  /// Second operand of Add/Mul.
  const Expr& rhs() const;

  /// Smallest state dimension the expression can be evaluated in (1 + max Var index).
  std::size_t min_state_dim() const;

  double eval(std::span<const double> x) const;
  double eval(const Vector& x) const { return eval(std::span<const double>(x.data(), x.size())); }

  /// Gradient by forward-mode dual numbers, one pass per coordinate.
  Vector grad(std::span<const double> x) const;
  Vector grad(const Vector& x) const { return grad(std::span<const double>(x.data(), x.size())); }

  /// Text that parses back to a structurally equal tree.
  std::string render() const;

  friend bool operator==(const Expr& a, const Expr& b);

  struct Node;

 private:
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

Expr operator+(Expr a, Expr b);
Expr operator*(Expr a, Expr b);
Expr operator-(Expr a);
Expr operator-(Expr a, Expr b);
Expr operator*(double c, Expr e);
Expr operator+(double c, Expr e);

/// Parses the surface grammar
///   expr   := term (('+'|'-') term)*
///   term   := factor (('*'|'/') factor)*
///   factor := '-' factor | base ('^' ['-'] int)?
///   base   := number | 'x'int | fn '(' expr ')' | '(' expr ')'    fn in {sin, cos, exp}
/// Variables are 1-indexed in text. Throws SyntaxError with the byte offset.
Expr parse_expr(std::string_view text);

}  // namespace qendy
