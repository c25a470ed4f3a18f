#pragma once

// Field expression language over the variables x, y and the constant pi.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' ['-'] integer)*
//   primary := number | 'x' | 'y' | 'pi' | func '(' expr ')' | '(' expr ')'
//   func    := sin | cos | exp | sqrt | abs
//
// Evaluation propagates second-order jets (value, gradient, Hessian).

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "bvpa/error.hpp"
#include "bvpa/geometry.hpp"

namespace bvpa {

/// Value, gradient and symmetric Hessian of a scalar function at a point.
struct Jet2 {
  double value = 0.0;
  Vec2 grad{};
  double hxx = 0.0, hxy = 0.0, hyy = 0.0;

  static Jet2 constant(double c) { return {c, {}, 0, 0, 0}; }

  double hess_frobenius_sq() const noexcept { return hxx * hxx + 2 * hxy * hxy + hyy * hyy; }

  friend Jet2 operator+(const Jet2& a, const Jet2& b) {
    return {a.value + b.value, a.grad + b.grad, a.hxx + b.hxx, a.hxy + b.hxy, a.hyy + b.hyy};
  }
  friend Jet2 operator-(const Jet2& a, const Jet2& b) {
    return {a.value - b.value, a.grad - b.grad, a.hxx - b.hxx, a.hxy - b.hxy, a.hyy - b.hyy};
  }
  friend Jet2 operator-(const Jet2& a) { return {-a.value, -a.grad, -a.hxx, -a.hxy, -a.hyy}; }
  friend Jet2 operator*(double s, const Jet2& a) {
    return {s * a.value, s * a.grad, s * a.hxx, s * a.hxy, s * a.hyy};
  }
  friend Jet2 operator*(const Jet2& a, const Jet2& b) {
    return {a.value * b.value,
            b.value * a.grad + a.value * b.grad,
            a.hxx * b.value + 2 * a.grad.x * b.grad.x + a.value * b.hxx,
            a.hxy * b.value + a.grad.x * b.grad.y + a.grad.y * b.grad.x + a.value * b.hxy,
            a.hyy * b.value + 2 * a.grad.y * b.grad.y + a.value * b.hyy};
  }
};

/// Composition f(g) given f(g.value), f'(g.value), f''(g.value).
inline Jet2 chain(const Jet2& g, double f0, double f1, double f2) {
  return {f0, f1 * g.grad,
          f2 * g.grad.x * g.grad.x + f1 * g.hxx,
          f2 * g.grad.x * g.grad.y + f1 * g.hxy,
          f2 * g.grad.y * g.grad.y + f1 * g.hyy};
}

namespace expr_ops {

inline double add(double a, double b) { return a + b; }
inline Jet2 add(const Jet2& a, const Jet2& b) { return a + b; }
inline double sub(double a, double b) { return a - b; }
inline Jet2 sub(const Jet2& a, const Jet2& b) { return a - b; }
inline double mul(double a, double b) { return a * b; }
inline Jet2 mul(const Jet2& a, const Jet2& b) { return a * b; }
inline double neg(double a) { return -a; }
inline Jet2 neg(const Jet2& a) { return -a; }

inline double div(double a, double b) {
  if (b == 0.0) throw MathDomainError("division by zero");
  return a / b;
}
inline Jet2 div(const Jet2& a, const Jet2& b) {
  const double v = b.value;
  if (v == 0.0) throw MathDomainError("division by zero");
  return a * chain(b, 1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v));
}

inline double ipow(double g, int n) {
  if (n < 0 && g == 0.0) throw MathDomainError("negative power of zero");
  return std::pow(g, n);
}
inline Jet2 ipow(const Jet2& g, int n) {
  const double v = g.value;
  if (n < 0 && v == 0.0) throw MathDomainError("negative power of zero");
  if (n == 0) return Jet2::constant(1.0);
  const double f1 = n * std::pow(v, n - 1);
  const double f2 = n == 1 ? 0.0 : double(n) * (n - 1) * std::pow(v, n - 2);
  return chain(g, std::pow(v, n), f1, f2);
}

inline double fsin(double g) { return std::sin(g); }
inline Jet2 fsin(const Jet2& g) {
  return chain(g, std::sin(g.value), std::cos(g.value), -std::sin(g.value));
}
inline double fcos(double g) { return std::cos(g); }
inline Jet2 fcos(const Jet2& g) {
  return chain(g, std::cos(g.value), -std::sin(g.value), -std::cos(g.value));
}
inline double fexp(double g) { return std::exp(g); }
inline Jet2 fexp(const Jet2& g) {
  const double e = std::exp(g.value);
  return chain(g, e, e, e);
}
inline double fsqrt(double g) {
  if (g < 0.0) throw MathDomainError("sqrt of negative argument");
  return std::sqrt(g);
}
inline Jet2 fsqrt(const Jet2& g) {
  if (!(g.value > 0.0)) throw MathDomainError("sqrt not differentiable at non-positive argument");
  const double s = std::sqrt(g.value);
  return chain(g, s, 0.5 / s, -0.25 / (s * g.value));
}
inline double fabs_(double g) { return std::abs(g); }
inline Jet2 fabs_(const Jet2& g) {
  if (std::abs(g.value) < 1e-14) throw MathDomainError("abs not differentiable at zero");
  const double s = g.value > 0 ? 1.0 : -1.0;
  return chain(g, std::abs(g.value), s, 0.0);
}

}  // namespace expr_ops

class Expr {
 public:
  enum class Kind { Number, X, Y, Pi, Neg, Add, Sub, Mul, Div, Pow, Sin, Cos, Exp, Sqrt, Abs };

  struct Node {
    Kind kind;
    double number = 0.0;
    int exponent = 0;
    std::shared_ptr<const Node> lhs, rhs;
  };

  Expr() : root_(std::make_shared<Node>(Node{Kind::Number, 0.0, 0, nullptr, nullptr})) {}
  explicit Expr(std::shared_ptr<const Node> root) : root_(std::move(root)) {}

  const Node& root() const noexcept { return *root_; }

  template <class T>
  T eval(const T& x, const T& y) const {
    return eval_node<T>(*root_, x, y);
  }
  double value(Point p) const { return eval<double>(p.x, p.y); }
  Jet2 jet(Point p) const {
    return eval<Jet2>(Jet2{p.x, {1.0, 0.0}, 0, 0, 0}, Jet2{p.y, {0.0, 1.0}, 0, 0, 0});
  }

  std::string to_string() const { return print(*root_); }

  friend bool operator==(const Expr& a, const Expr& b) { return same(*a.root_, *b.root_); }

 private:
  template <class T>
  static T eval_node(const Node& n, const T& x, const T& y) {
    using namespace expr_ops;
    switch (n.kind) {
      case Kind::Number: return T(constant<T>(n.number));
      case Kind::X: return x;
      case Kind::Y: return y;
      case Kind::Pi: return constant<T>(std::numbers::pi);
      case Kind::Neg: return neg(eval_node<T>(*n.lhs, x, y));
      case Kind::Add: return add(eval_node<T>(*n.lhs, x, y), eval_node<T>(*n.rhs, x, y));
      case Kind::Sub: return sub(eval_node<T>(*n.lhs, x, y), eval_node<T>(*n.rhs, x, y));
      case Kind::Mul: return mul(eval_node<T>(*n.lhs, x, y), eval_node<T>(*n.rhs, x, y));
      case Kind::Div: return div(eval_node<T>(*n.lhs, x, y), eval_node<T>(*n.rhs, x, y));
      case Kind::Pow: return ipow(eval_node<T>(*n.lhs, x, y), n.exponent);
      case Kind::Sin: return fsin(eval_node<T>(*n.lhs, x, y));
      case Kind::Cos: return fcos(eval_node<T>(*n.lhs, x, y));
      case Kind::Exp: return fexp(eval_node<T>(*n.lhs, x, y));
      case Kind::Sqrt: return fsqrt(eval_node<T>(*n.lhs, x, y));
      case Kind::Abs: return fabs_(eval_node<T>(*n.lhs, x, y));
    }
    return constant<T>(0.0);
  }

  template <class T>
  static T constant(double c) {
    if constexpr (std::is_same_v<T, double>) return c;
    else return Jet2::constant(c);
  }

  static std::string fmt_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
  }

  static const char* func_name(Kind k) {
    switch (k) {
      case Kind::Sin: return "sin";
      case Kind::Cos: return "cos";
      case Kind::Exp: return "exp";
      case Kind::Sqrt: return "sqrt";
      case Kind::Abs: return "abs";
      default: return "?";
    }
  }

  static std::string print(const Node& n) {
    switch (n.kind) {
      case Kind::Number: return fmt_number(n.number);
      case Kind::X: return "x";
      case Kind::Y: return "y";
      case Kind::Pi: return "pi";
      case Kind::Neg: return "(-" + print(*n.lhs) + ")";
      case Kind::Add: return "(" + print(*n.lhs) + " + " + print(*n.rhs) + ")";
      case Kind::Sub: return "(" + print(*n.lhs) + " - " + print(*n.rhs) + ")";
      case Kind::Mul: return "(" + print(*n.lhs) + " * " + print(*n.rhs) + ")";
      case Kind::Div: return "(" + print(*n.lhs) + " / " + print(*n.rhs) + ")";
      case Kind::Pow: return "(" + print(*n.lhs) + "^" + std::to_string(n.exponent) + ")";
      default: return std::string(func_name(n.kind)) + "(" + print(*n.lhs) + ")";
    }
  }

  static bool same(const Node& a, const Node& b) {
    if (a.kind != b.kind || a.exponent != b.exponent) return false;
    if (a.kind == Kind::Number && a.number != b.number) return false;
    if (bool(a.lhs) != bool(b.lhs) || bool(a.rhs) != bool(b.rhs)) return false;
    if (a.lhs && !same(*a.lhs, *b.lhs)) return false;
    if (a.rhs && !same(*a.rhs, *b.rhs)) return false;
    return true;
  }

  std::shared_ptr<const Node> root_;
};

namespace detail {

class ExprParser {
  using Kind = Expr::Kind;
  using NodePtr = std::shared_ptr<const Expr::Node>;

 public:
  explicit ExprParser(std::string_view text) : s_(text) {}

  Expr parse() {
    NodePtr e = parse_expr();
    skip_ws();
    if (pos_ != s_.size()) throw ParseError("unexpected character '" + std::string(1, s_[pos_]) + "'", pos_);
    return Expr(e);
  }

 private:
  static NodePtr make(Kind k, NodePtr l = nullptr, NodePtr r = nullptr) {
    return std::make_shared<Expr::Node>(Expr::Node{k, 0.0, 0, std::move(l), std::move(r)});
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    for (;;) {
      if (accept('+')) lhs = make(Kind::Add, lhs, parse_term());
      else if (accept('-')) lhs = make(Kind::Sub, lhs, parse_term());
      else return lhs;
    }
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_unary();
    for (;;) {
      if (accept('*')) lhs = make(Kind::Mul, lhs, parse_unary());
      else if (accept('/')) lhs = make(Kind::Div, lhs, parse_unary());
      else return lhs;
    }
  }

  NodePtr parse_unary() {
    if (accept('-')) return make(Kind::Neg, parse_unary());
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_primary();
    while (accept('^')) {
      skip_ws();
      const std::size_t start = pos_;
      bool negative = false;
      if (pos_ < s_.size() && s_[pos_] == '-') {
        negative = true;
        ++pos_;
      }
      int e = 0;
      const char* first = s_.data() + pos_;
      auto [ptr, ec] = std::from_chars(first, s_.data() + s_.size(), e);
      if (ec != std::errc() || ptr == first) throw ParseError("expected integer exponent", start);
      pos_ += static_cast<std::size_t>(ptr - first);
      if (pos_ < s_.size() && (s_[pos_] == '.' || s_[pos_] == 'e' || s_[pos_] == 'E'))
        throw ParseError("exponent must be an integer", start);
      auto n = std::make_shared<Expr::Node>(Expr::Node{Kind::Pow, 0.0, negative ? -e : e, base, nullptr});
      base = n;
    }
    return base;
  }

  NodePtr parse_primary() {
    skip_ws();
    if (pos_ >= s_.size()) throw ParseError("unexpected end of input", pos_);
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = parse_expr();
      if (!accept(')')) throw ParseError("expected ')'", pos_);
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      const std::string name(s_.substr(start, pos_ - start));
      if (name == "x") return make(Kind::X);
      if (name == "y") return make(Kind::Y);
      if (name == "pi") return make(Kind::Pi);
      Kind k;
      if (name == "sin") k = Kind::Sin;
      else if (name == "cos") k = Kind::Cos;
      else if (name == "exp") k = Kind::Exp;
      else if (name == "sqrt") k = Kind::Sqrt;
      else if (name == "abs") k = Kind::Abs;
      else throw UnknownIdentifierError(name, start);
      if (!accept('(')) throw ParseError("expected '(' after " + name, pos_);
      NodePtr arg = parse_expr();
      if (!accept(')')) throw ParseError("expected ')'", pos_);
      return make(k, arg);
    }
    throw ParseError("expected operand", pos_);
  }

  NodePtr parse_number() {
    const std::size_t start = pos_;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
    if (ec != std::errc()) throw ParseError("malformed number", start);
    pos_ += static_cast<std::size_t>(ptr - (s_.data() + pos_));
    auto n = std::make_shared<Expr::Node>(Expr::Node{Kind::Number, v, 0, nullptr, nullptr});
    return n;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Expr parse(std::string_view text) { return detail::ExprParser(text).parse(); }

}  // namespace bvpa
