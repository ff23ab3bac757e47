#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

namespace attract {

// Forward-mode derivative bundle: value plus partial derivatives with respect
// to x and y.
struct DualValue {
  double value = 0.0;
  double dx = 0.0;
  double dy = 0.0;
};

// Value plus derivative with respect to the curve parameter t.
struct ParamDual {
  double value = 0.0;
  double dt = 0.0;
};

struct SyntaxError : std::runtime_error {
  SyntaxError(std::size_t offset, std::string expected, std::string found);
  std::size_t offset;     // byte offset into the source text
  std::string expected;   // description of the acceptable tokens
  std::string found;
};

struct UnknownIdentifier : std::runtime_error {
  UnknownIdentifier(std::string name, std::size_t offset, std::string context);
  std::string name;
  std::size_t offset;
};

// Raised when evaluation leaves the real domain: ln or sqrt of a negative
// number, division by zero, or a power with negative base and non-integer
// exponent. Carries the (x, y) evaluation point that triggered it.
struct DomainError : std::runtime_error {
  DomainError(const std::string& what, double x, double y);
  double x;
  double y;
};

enum class UnaryOp { Neg, Sin, Cos, Exp, Ln, Sqrt, Abs };
enum class BinaryOp { Add, Sub, Mul, Div, Pow };

// Which variables a source string may reference. Vector field components and
// implicit curves use (x, y); graph definitions use a single axis; parametric
// curve components use t.
struct VarSet {
  bool x = false;
  bool y = false;
  bool t = false;
  static constexpr VarSet xy() { return {true, true, false}; }
  static constexpr VarSet only_x() { return {true, false, false}; }
  static constexpr VarSet only_y() { return {false, true, false}; }
  static constexpr VarSet only_t() { return {false, false, true}; }
};

namespace detail {
struct Node;
}

// Immutable expression tree over (x, y, t). Built by parse_expression() or the
// static builders below. Evaluation is pure; a single Expr may be evaluated
// from many threads concurrently.
class Expr {
 public:
  Expr();  // constant 0

  static Expr constant(double c);
  static Expr variable(char name);  // 'x', 'y' or 't'
  static Expr unary(UnaryOp op, Expr operand);
  static Expr binary(BinaryOp op, Expr lhs, Expr rhs);

  double eval(double x, double y, double t = 0.0) const;
  double eval_t(double t) const { return eval(0.0, 0.0, t); }

  // Partials with respect to x and y, propagated exactly through the tree.
  DualValue eval_dual(double x, double y) const;

  // Value and d/dt for parametric curve components.
  ParamDual eval_dual_param(double t) const;

  // Replaces every x with x_repl and every y with y_repl; t is untouched.
  Expr substituted(const Expr& x_repl, const Expr& y_repl) const;

  // Parenthesized form that parses back to an identically evaluating tree.
  std::string to_string() const;

 private:
  explicit Expr(std::shared_ptr<const detail::Node> root);
  friend Expr parse_expression(std::string_view source, VarSet allowed);
  std::shared_ptr<const detail::Node> root_;
};

// Recursive-descent parser for the expression grammar:
//
//   expr   := term (("+" | "-") term)*
//   term   := factor (("*" | "/") factor)*
//   factor := "-" factor | power
//   power  := atom ("^" factor)?
//   atom   := NUMBER | IDENT | IDENT "(" expr ")" | "(" expr ")"
//
// "^" is right-associative and binds tighter than unary minus. Functions are
// sin, cos, exp, ln, sqrt, abs; constants are pi and e. There is no implicit
// multiplication.
Expr parse_expression(std::string_view source, VarSet allowed);

// Small builders used when deriving one system from another (sign flips,
// rescalings, coordinate rotations).
Expr negated(const Expr& e);
Expr scaled(double c, const Expr& e);
Expr added(const Expr& a, const Expr& b);

}  // namespace attract
