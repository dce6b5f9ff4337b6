#include "qendy/expr.hpp"

#include "qendy/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <optional>

namespace qendy {

struct Expr::Node {
  Kind kind;
  double value = 0.0;
  std::size_t index = 0;
  int exponent = 0;
  std::vector<Expr> args;
};

namespace {

// Forward-mode dual number: value and directional derivative.
struct Dual {
  double v;
  double d;
};

Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.d + b.d}; }
Dual operator*(Dual a, Dual b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }

double value_of(double x) { return x; }
double value_of(Dual x) { return x.v; }

double apply_sin(double x) { return std::sin(x); }
double apply_cos(double x) { return std::cos(x); }
double apply_exp(double x) { return std::exp(x); }
double apply_inv(double x) { return 1.0 / x; }
double apply_pow(double x, int k) { return std::pow(x, k); }

Dual apply_sin(Dual x) { return {std::sin(x.v), std::cos(x.v) * x.d}; }
Dual apply_cos(Dual x) { return {std::cos(x.v), -std::sin(x.v) * x.d}; }
Dual apply_exp(Dual x) {
  const double e = std::exp(x.v);
  return {e, e * x.d};
}
Dual apply_inv(Dual x) {
  const double r = 1.0 / x.v;
  return {r, -r * r * x.d};
}
Dual apply_pow(Dual x, int k) {
  if (k == 0) return {1.0, 0.0};
  return {std::pow(x.v, k), k * std::pow(x.v, k - 1) * x.d};
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T>
T evaluate(const Expr& e, std::span<const T> x) {
  switch (e.kind()) {
    case Expr::Kind::Const:
      if constexpr (std::is_same_v<T, Dual>) {
        return Dual{e.value(), 0.0};
      } else {
        return e.value();
      }
    case Expr::Kind::Var:
      if (e.index() >= x.size()) {
        throw InputError("variable x" + std::to_string(e.index() + 1) +
                         " out of range for state dimension " + std::to_string(x.size()));
      }
      return x[e.index()];
    case Expr::Kind::Add:
      return evaluate(e.lhs(), x) + evaluate(e.rhs(), x);
    case Expr::Kind::Mul:
      return evaluate(e.lhs(), x) * evaluate(e.rhs(), x);
    case Expr::Kind::Pow: {
      const T base = evaluate(e.lhs(), x);
      if (e.exponent() < 0 && value_of(base) == 0.0) {
        throw DomainError("division by zero in node '" + e.render() + "'");
      }
      return apply_pow(base, e.exponent());
    }
    case Expr::Kind::Sin:
      return apply_sin(evaluate(e.lhs(), x));
    case Expr::Kind::Cos:
      return apply_cos(evaluate(e.lhs(), x));
    case Expr::Kind::Exp:
      return apply_exp(evaluate(e.lhs(), x));
    case Expr::Kind::Inv: {
      const T arg = evaluate(e.lhs(), x);
      if (value_of(arg) == 0.0) {
        throw DomainError("division by zero in node '" + e.render() + "'");
      }
      return apply_inv(arg);
    }
  }
  throw InputError("corrupt expression node");
}

}  // namespace

Expr Expr::constant(double value) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Const;
  n->value = value;
  return Expr(std::move(n));
}

Expr Expr::var(std::size_t index) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Var;
  n->index = index;
  return Expr(std::move(n));
}

Expr Expr::add(Expr lhs, Expr rhs) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Add;
  n->args = {std::move(lhs), std::move(rhs)};
  return Expr(std::move(n));
}

Expr Expr::mul(Expr lhs, Expr rhs) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Mul;
  n->args = {std::move(lhs), std::move(rhs)};
  return Expr(std::move(n));
}

Expr Expr::pow(Expr base, int exponent) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Pow;
  n->exponent = exponent;
  n->args = {std::move(base)};
  return Expr(std::move(n));
}

Expr Expr::sin(Expr arg) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Sin;
  n->args = {std::move(arg)};
  return Expr(std::move(n));
}

Expr Expr::cos(Expr arg) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Cos;
  n->args = {std::move(arg)};
  return Expr(std::move(n));
}

Expr Expr::exp(Expr arg) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Exp;
  n->args = {std::move(arg)};
  return Expr(std::move(n));
}

Expr Expr::inv(Expr arg) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Inv;
  n->args = {std::move(arg)};
  return Expr(std::move(n));
}

Expr::Kind Expr::kind() const { return node_->kind; }
double Expr::value() const { return node_->value; }
std::size_t Expr::index() const { return node_->index; }
int Expr::exponent() const { return node_->exponent; }
const Expr& Expr::lhs() const { return node_->args.at(0); }
const Expr& Expr::rhs() const { return node_->args.at(1); }

std::size_t Expr::min_state_dim() const {
  if (node_->kind == Kind::Var) return node_->index + 1;
  std::size_t dim = 0;
  for (const Expr& a : node_->args) dim = std::max(dim, a.min_state_dim());
  return dim;
}

double Expr::eval(std::span<const double> x) const { return evaluate<double>(*this, x); }

Vector Expr::grad(std::span<const double> x) const {
  const std::size_t n = x.size();
  std::vector<Dual> seeded(n);
  for (std::size_t j = 0; j < n; ++j) seeded[j] = Dual{x[j], 0.0};
  Vector g(static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) {
    seeded[j].d = 1.0;
    g[static_cast<Eigen::Index>(j)] = evaluate<Dual>(*this, std::span<const Dual>(seeded)).d;
    seeded[j].d = 0.0;
  }
  return g;
}

std::string Expr::render() const {
  switch (node_->kind) {
    case Kind::Const:
      if (std::signbit(node_->value)) return "(-" + format_number(-node_->value) + ")";
      return format_number(node_->value);
    case Kind::Var:
      return "x" + std::to_string(node_->index + 1);
    case Kind::Add:
      return "(" + lhs().render() + " + " + rhs().render() + ")";
    case Kind::Mul:
      return "(" + lhs().render() + "*" + rhs().render() + ")";
    case Kind::Pow:
      return "(" + lhs().render() + ")^" + std::to_string(node_->exponent);
    case Kind::Sin:
      return "sin(" + lhs().render() + ")";
    case Kind::Cos:
      return "cos(" + lhs().render() + ")";
    case Kind::Exp:
      return "exp(" + lhs().render() + ")";
    case Kind::Inv:
      return "(1/(" + lhs().render() + "))";
  }
  return {};
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return true;
  const Expr::Node& x = *a.node_;
  const Expr::Node& y = *b.node_;
  if (x.kind != y.kind) return false;
  switch (x.kind) {
    case Expr::Kind::Const:
      return x.value == y.value;
    case Expr::Kind::Var:
      return x.index == y.index;
    case Expr::Kind::Pow:
      if (x.exponent != y.exponent) return false;
      break;
    default:
      break;
  }
  if (x.args.size() != y.args.size()) return false;
  for (std::size_t i = 0; i < x.args.size(); ++i) {
    if (!(x.args[i] == y.args[i])) return false;
  }
  return true;
}

Expr operator+(Expr a, Expr b) { return Expr::add(std::move(a), std::move(b)); }
Expr operator*(Expr a, Expr b) { return Expr::mul(std::move(a), std::move(b)); }

Expr operator-(Expr a) {
  if (a.kind() == Expr::Kind::Const) return Expr::constant(-a.value());
  return Expr::mul(Expr::constant(-1.0), std::move(a));
}

Expr operator-(Expr a, Expr b) { return Expr::add(std::move(a), -std::move(b)); }
Expr operator*(double c, Expr e) { return Expr::mul(Expr::constant(c), std::move(e)); }
Expr operator+(double c, Expr e) { return Expr::add(Expr::constant(c), std::move(e)); }

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Expr parse() {
    Expr e = parse_expr();
    skip_ws();
    if (pos_ != text_.size()) fail("operator or end of input");
    return e;
  }

 private:
  struct Factor {
    Expr expr;
    bool powered;  // written as base^int at this level
  };

  [[noreturn]] void fail(const std::string& expected) const {
    std::string found = pos_ < text_.size() ? "'" + std::string(1, text_[pos_]) + "'" : "end of input";
    throw SyntaxError(pos_, expected,
                      "syntax error at offset " + std::to_string(pos_) + ": expected " + expected +
                          ", found " + found);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("'") + c + "'");
  }

  Expr parse_expr() {
    Expr acc = parse_term();
    for (;;) {
      if (accept('+')) {
        acc = Expr::add(acc, parse_term());
      } else if (accept('-')) {
        acc = Expr::add(acc, -parse_term());
      } else {
        return acc;
      }
    }
  }

  Expr parse_term() {
    Expr acc = parse_factor().expr;
    for (;;) {
      if (accept('*')) {
        acc = Expr::mul(acc, parse_factor().expr);
      } else if (accept('/')) {
        Factor den = parse_factor();
        Expr recip = den.powered ? Expr::pow(den.expr.lhs(), -den.expr.exponent())
                                 : Expr::inv(den.expr);
        if (acc.kind() == Expr::Kind::Const && acc.value() == 1.0) {
          acc = recip;
        } else {
          acc = Expr::mul(acc, recip);
        }
      } else {
        return acc;
      }
    }
  }

  Factor parse_factor() {
    if (accept('-')) return Factor{-parse_factor().expr, false};
    Expr base = parse_base();
    if (accept('^')) {
      return Factor{Expr::pow(base, parse_int()), true};
    }
    return Factor{base, false};
  }

  int parse_int() {
    skip_ws();
    bool negative = false;
    if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) {
      negative = text_[pos_] == '-';
      ++pos_;
    }
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_) fail("integer exponent");
    const long v = std::strtol(std::string(text_.substr(start, pos_ - start)).c_str(), nullptr, 10);
    if (v > std::numeric_limits<int>::max()) {
      pos_ = start;
      fail("integer exponent in range");
    }
    return negative ? -static_cast<int>(v) : static_cast<int>(v);
  }

  Expr parse_base() {
    skip_ws();
    if (pos_ >= text_.size()) fail("number, variable, function or '('");
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (c == '(') {
      ++pos_;
      Expr e = parse_expr();
      expect(')');
      return e;
    }
    if (c == 'x' && pos_ + 1 < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_ + 1]))) {
      const std::size_t at = pos_;
      ++pos_;
      const std::size_t start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      const unsigned long idx = std::strtoul(std::string(text_.substr(start, pos_ - start)).c_str(), nullptr, 10);
      if (idx == 0) {
        pos_ = at;
        fail("variable index >= 1 (variables are 1-indexed)");
      }
      return Expr::var(idx - 1);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      const std::string_view name = text_.substr(start, pos_ - start);
      Expr (*fn)(Expr) = nullptr;
      if (name == "sin") fn = &Expr::sin;
      if (name == "cos") fn = &Expr::cos;
      if (name == "exp") fn = &Expr::exp;
      if (fn == nullptr) {
        pos_ = start;
        fail("function name (sin, cos, exp) or variable x<int>");
      }
      expect('(');
      Expr arg = parse_expr();
      expect(')');
      return fn(arg);
    }
    fail("number, variable, function or '('");
  }

  Expr parse_number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) ++pos_;
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
      if (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) {
        pos_ = p;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      }
    }
    const std::string token(text_.substr(start, pos_ - start));
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end != token.c_str() + token.size()) {
      pos_ = start;
      fail("number");
    }
    return Expr::constant(v);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse_expr(std::string_view text) { return Parser(text).parse(); }

}  // namespace qendy
