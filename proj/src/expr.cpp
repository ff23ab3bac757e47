#include "attract/expr.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace attract {

namespace {

std::string format_double(double v) {
  std::array<char, 32> buf;
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::string format_point(double x, double y) {
  std::ostringstream os;
  os << "(" << x << ", " << y << ")";
  return os.str();
}

}  // namespace

SyntaxError::SyntaxError(std::size_t offset_in, std::string expected_in,
                         std::string found_in)
    : std::runtime_error("syntax error at offset " + std::to_string(offset_in) +
                         ": expected " + expected_in + ", found " + found_in),
      offset(offset_in),
      expected(std::move(expected_in)),
      found(std::move(found_in)) {}

UnknownIdentifier::UnknownIdentifier(std::string name_in, std::size_t offset_in,
                                     std::string context)
    : std::runtime_error("unknown identifier '" + name_in + "' at offset " +
                         std::to_string(offset_in) +
                         (context.empty() ? "" : " (" + context + ")")),
      name(std::move(name_in)),
      offset(offset_in) {}

DomainError::DomainError(const std::string& what, double x_in, double y_in)
    : std::runtime_error(what + " at " + format_point(x_in, y_in)),
      x(x_in),
      y(y_in) {}

namespace detail {

struct Node {
  enum class Kind { Constant, Variable, Unary, Binary };
  Kind kind = Kind::Constant;
  double value = 0.0;
  char var = 0;
  UnaryOp uop = UnaryOp::Neg;
  BinaryOp bop = BinaryOp::Add;
  std::shared_ptr<const Node> a;
  std::shared_ptr<const Node> b;
};

using NodePtr = std::shared_ptr<const Node>;

NodePtr make_constant(double v) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Constant;
  n->value = v;
  return n;
}

NodePtr make_variable(char var) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Variable;
  n->var = var;
  return n;
}

NodePtr make_unary(UnaryOp op, NodePtr a) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Unary;
  n->uop = op;
  n->a = std::move(a);
  return n;
}

NodePtr make_binary(BinaryOp op, NodePtr a, NodePtr b) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Binary;
  n->bop = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

// An exponent counts as syntactically constant when it is a literal or a
// chain of unary minuses over one, so x^-2 stays legal at negative bases.
bool constant_exponent(const Node* n, double& out) {
  if (n->kind == Node::Kind::Constant) {
    out = n->value;
    return true;
  }
  if (n->kind == Node::Kind::Unary && n->uop == UnaryOp::Neg &&
      constant_exponent(n->a.get(), out)) {
    out = -out;
    return true;
  }
  return false;
}

// Plain evaluation. (px, py) is the ambient evaluation point reported in
// DomainError, which for parametric components is (t, 0).
double eval_node(const Node* n, double x, double y, double t, double px,
                 double py) {
  switch (n->kind) {
    case Node::Kind::Constant:
      return n->value;
    case Node::Kind::Variable:
      return n->var == 'x' ? x : (n->var == 'y' ? y : t);
    case Node::Kind::Unary: {
      double u = eval_node(n->a.get(), x, y, t, px, py);
      switch (n->uop) {
        case UnaryOp::Neg:
          return -u;
        case UnaryOp::Sin:
          return std::sin(u);
        case UnaryOp::Cos:
          return std::cos(u);
        case UnaryOp::Exp:
          return std::exp(u);
        case UnaryOp::Ln:
          if (u <= 0.0) throw DomainError("ln of a non-positive value", px, py);
          return std::log(u);
        case UnaryOp::Sqrt:
          if (u < 0.0) throw DomainError("sqrt of a negative value", px, py);
          return std::sqrt(u);
        case UnaryOp::Abs:
          return std::fabs(u);
      }
      break;
    }
    case Node::Kind::Binary: {
      double a = eval_node(n->a.get(), x, y, t, px, py);
      double b = eval_node(n->b.get(), x, y, t, px, py);
      switch (n->bop) {
        case BinaryOp::Add:
          return a + b;
        case BinaryOp::Sub:
          return a - b;
        case BinaryOp::Mul:
          return a * b;
        case BinaryOp::Div:
          if (b == 0.0) throw DomainError("division by zero", px, py);
          return a / b;
        case BinaryOp::Pow: {
          double cval = 0.0;
          bool const_exp = constant_exponent(n->b.get(), cval);
          if (a == 0.0 && b < 0.0)
            throw DomainError("zero raised to a negative power", px, py);
          if (a < 0.0) {
            if (!const_exp)
              throw DomainError(
                  "power with a non-constant exponent needs a positive base",
                  px, py);
            if (b != std::floor(b))
              throw DomainError(
                  "negative base raised to a non-integer exponent", px, py);
          } else if (a == 0.0 && !const_exp) {
            throw DomainError(
                "power with a non-constant exponent needs a positive base", px,
                py);
          }
          return std::pow(a, b);
        }
      }
      break;
    }
  }
  return 0.0;  // unreachable
}

struct D {
  double v = 0.0;
  double dx = 0.0;
  double dy = 0.0;
};

D eval_dual_node(const Node* n, const D& X, const D& Y, const D& T, double px,
                 double py) {
  switch (n->kind) {
    case Node::Kind::Constant:
      return {n->value, 0.0, 0.0};
    case Node::Kind::Variable:
      return n->var == 'x' ? X : (n->var == 'y' ? Y : T);
    case Node::Kind::Unary: {
      D u = eval_dual_node(n->a.get(), X, Y, T, px, py);
      switch (n->uop) {
        case UnaryOp::Neg:
          return {-u.v, -u.dx, -u.dy};
        case UnaryOp::Sin: {
          double c = std::cos(u.v);
          return {std::sin(u.v), c * u.dx, c * u.dy};
        }
        case UnaryOp::Cos: {
          double s = -std::sin(u.v);
          return {std::cos(u.v), s * u.dx, s * u.dy};
        }
        case UnaryOp::Exp: {
          double w = std::exp(u.v);
          return {w, w * u.dx, w * u.dy};
        }
        case UnaryOp::Ln:
          if (u.v <= 0.0)
            throw DomainError("ln of a non-positive value", px, py);
          return {std::log(u.v), u.dx / u.v, u.dy / u.v};
        case UnaryOp::Sqrt: {
          if (u.v < 0.0)
            throw DomainError("sqrt of a negative value", px, py);
          double s = std::sqrt(u.v);
          if (s == 0.0) {
            auto edge = [](double d) {
              return d == 0.0 ? 0.0
                              : std::copysign(
                                    std::numeric_limits<double>::infinity(), d);
            };
            return {0.0, edge(u.dx), edge(u.dy)};
          }
          double f = 0.5 / s;
          return {s, f * u.dx, f * u.dy};
        }
        case UnaryOp::Abs: {
          double s = u.v > 0.0 ? 1.0 : (u.v < 0.0 ? -1.0 : 0.0);
          return {std::fabs(u.v), s * u.dx, s * u.dy};
        }
      }
      break;
    }
    case Node::Kind::Binary: {
      D a = eval_dual_node(n->a.get(), X, Y, T, px, py);
      switch (n->bop) {
        case BinaryOp::Add: {
          D b = eval_dual_node(n->b.get(), X, Y, T, px, py);
          return {a.v + b.v, a.dx + b.dx, a.dy + b.dy};
        }
        case BinaryOp::Sub: {
          D b = eval_dual_node(n->b.get(), X, Y, T, px, py);
          return {a.v - b.v, a.dx - b.dx, a.dy - b.dy};
        }
        case BinaryOp::Mul: {
          D b = eval_dual_node(n->b.get(), X, Y, T, px, py);
          return {a.v * b.v, a.dx * b.v + a.v * b.dx,
                  a.dy * b.v + a.v * b.dy};
        }
        case BinaryOp::Div: {
          D b = eval_dual_node(n->b.get(), X, Y, T, px, py);
          if (b.v == 0.0) throw DomainError("division by zero", px, py);
          double w = a.v / b.v;
          return {w, (a.dx - w * b.dx) / b.v, (a.dy - w * b.dy) / b.v};
        }
        case BinaryOp::Pow: {
          double c = 0.0;
          if (constant_exponent(n->b.get(), c)) {
            if (a.v == 0.0 && c < 0.0)
              throw DomainError("zero raised to a negative power", px, py);
            if (a.v < 0.0 && c != std::floor(c))
              throw DomainError(
                  "negative base raised to a non-integer exponent", px, py);
            double w = std::pow(a.v, c);
            if (a.dx == 0.0 && a.dy == 0.0) return {w, 0.0, 0.0};
            double f = c == 0.0 ? 0.0 : c * std::pow(a.v, c - 1.0);
            return {w, f * a.dx, f * a.dy};
          }
          D b = eval_dual_node(n->b.get(), X, Y, T, px, py);
          if (a.v <= 0.0)
            throw DomainError(
                "power with a non-constant exponent needs a positive base", px,
                py);
          double w = std::pow(a.v, b.v);
          double lnu = std::log(a.v);
          return {w, w * (b.dx * lnu + b.v * a.dx / a.v),
                  w * (b.dy * lnu + b.v * a.dy / a.v)};
        }
      }
      break;
    }
  }
  return {};  // unreachable
}

void print_node(const Node* n, std::string& out) {
  switch (n->kind) {
    case Node::Kind::Constant: {
      if (n->value < 0.0 || std::signbit(n->value)) {
        out += "(";
        out += format_double(n->value);
        out += ")";
      } else {
        out += format_double(n->value);
      }
      return;
    }
    case Node::Kind::Variable:
      out += n->var;
      return;
    case Node::Kind::Unary: {
      static const char* names[] = {"",     "sin", "cos", "exp",
                                    "ln",   "sqrt", "abs"};
      if (n->uop == UnaryOp::Neg) {
        out += "(-";
        print_node(n->a.get(), out);
        out += ")";
      } else {
        out += names[static_cast<int>(n->uop)];
        out += "(";
        print_node(n->a.get(), out);
        out += ")";
      }
      return;
    }
    case Node::Kind::Binary: {
      static const char* ops[] = {" + ", " - ", " * ", " / ", " ^ "};
      out += "(";
      print_node(n->a.get(), out);
      out += ops[static_cast<int>(n->bop)];
      print_node(n->b.get(), out);
      out += ")";
      return;
    }
  }
}

NodePtr substitute_node(const NodePtr& n, const NodePtr& for_x,
                        const NodePtr& for_y) {
  switch (n->kind) {
    case Node::Kind::Constant:
      return n;
    case Node::Kind::Variable:
      if (n->var == 'x') return for_x;
      if (n->var == 'y') return for_y;
      return n;
    case Node::Kind::Unary:
      return make_unary(n->uop, substitute_node(n->a, for_x, for_y));
    case Node::Kind::Binary:
      return make_binary(n->bop, substitute_node(n->a, for_x, for_y),
                         substitute_node(n->b, for_x, for_y));
  }
  return n;
}

}  // namespace detail

using detail::Node;
using detail::NodePtr;

Expr::Expr() : root_(detail::make_constant(0.0)) {}
Expr::Expr(NodePtr root) : root_(std::move(root)) {}

Expr Expr::constant(double c) { return Expr(detail::make_constant(c)); }
Expr Expr::variable(char name) { return Expr(detail::make_variable(name)); }
Expr Expr::unary(UnaryOp op, Expr operand) {
  return Expr(detail::make_unary(op, std::move(operand.root_)));
}
Expr Expr::binary(BinaryOp op, Expr lhs, Expr rhs) {
  return Expr(
      detail::make_binary(op, std::move(lhs.root_), std::move(rhs.root_)));
}

double Expr::eval(double x, double y, double t) const {
  return detail::eval_node(root_.get(), x, y, t, x, y);
}

DualValue Expr::eval_dual(double x, double y) const {
  detail::D r = detail::eval_dual_node(root_.get(), {x, 1.0, 0.0},
                                       {y, 0.0, 1.0}, {0.0, 0.0, 0.0}, x, y);
  return {r.v, r.dx, r.dy};
}

ParamDual Expr::eval_dual_param(double t) const {
  detail::D r = detail::eval_dual_node(root_.get(), {0.0, 0.0, 0.0},
                                       {0.0, 0.0, 0.0}, {t, 1.0, 0.0}, t, 0.0);
  return {r.v, r.dx};
}

Expr Expr::substituted(const Expr& x_repl, const Expr& y_repl) const {
  return Expr(detail::substitute_node(root_, x_repl.root_, y_repl.root_));
}

std::string Expr::to_string() const {
  std::string out;
  detail::print_node(root_.get(), out);
  return out;
}

Expr negated(const Expr& e) { return Expr::unary(UnaryOp::Neg, e); }

Expr scaled(double c, const Expr& e) {
  return Expr::binary(BinaryOp::Mul, Expr::constant(c), e);
}

Expr added(const Expr& a, const Expr& b) {
  return Expr::binary(BinaryOp::Add, a, b);
}

// ---------------------------------------------------------------------------
// Parser

namespace {

struct Token {
  enum class Kind {
    Number,
    Ident,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End
  };
  Kind kind = Kind::End;
  double num = 0.0;
  std::string text;
  std::size_t offset = 0;
};

std::string describe(const Token& tk) {
  switch (tk.kind) {
    case Token::Kind::Number:
      return "number '" + tk.text + "'";
    case Token::Kind::Ident:
      return "'" + tk.text + "'";
    case Token::Kind::End:
      return "end of input";
    default:
      return "'" + tk.text + "'";
  }
}

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto is_digit = [](char c) { return c >= '0' && c <= '9'; };
  auto is_alpha = [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
  };
  while (i < src.size()) {
    char c = src[i];
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      ++i;
      continue;
    }
    std::size_t start = i;
    if (is_digit(c) || (c == '.' && i + 1 < src.size() && is_digit(src[i + 1]))) {
      while (i < src.size() && is_digit(src[i])) ++i;
      if (i < src.size() && src[i] == '.') {
        ++i;
        while (i < src.size() && is_digit(src[i])) ++i;
      }
      if (i < src.size() && (src[i] == 'e' || src[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < src.size() && (src[j] == '+' || src[j] == '-')) ++j;
        if (j < src.size() && is_digit(src[j])) {
          i = j;
          while (i < src.size() && is_digit(src[i])) ++i;
        }
      }
      Token tk;
      tk.kind = Token::Kind::Number;
      tk.text = std::string(src.substr(start, i - start));
      tk.offset = start;
      auto res = std::from_chars(src.data() + start, src.data() + i, tk.num);
      if (res.ec != std::errc()) {
        throw SyntaxError(start, "a valid numeric literal", "'" + tk.text + "'");
      }
      out.push_back(std::move(tk));
      continue;
    }
    if (is_alpha(c)) {
      while (i < src.size() && (is_alpha(src[i]) || is_digit(src[i]))) ++i;
      Token tk;
      tk.kind = Token::Kind::Ident;
      tk.text = std::string(src.substr(start, i - start));
      tk.offset = start;
      out.push_back(std::move(tk));
      continue;
    }
    Token tk;
    tk.offset = start;
    tk.text = std::string(1, c);
    switch (c) {
      case '+': tk.kind = Token::Kind::Plus; break;
      case '-': tk.kind = Token::Kind::Minus; break;
      case '*': tk.kind = Token::Kind::Star; break;
      case '/': tk.kind = Token::Kind::Slash; break;
      case '^': tk.kind = Token::Kind::Caret; break;
      case '(': tk.kind = Token::Kind::LParen; break;
      case ')': tk.kind = Token::Kind::RParen; break;
      default:
        throw SyntaxError(start,
                          "a number, an identifier, an operator or a "
                          "parenthesis",
                          "'" + std::string(1, c) + "'");
    }
    ++i;
    out.push_back(std::move(tk));
  }
  Token end;
  end.kind = Token::Kind::End;
  end.offset = src.size();
  out.push_back(std::move(end));
  return out;
}

bool is_function_name(const std::string& s) {
  return s == "sin" || s == "cos" || s == "exp" || s == "ln" || s == "sqrt" ||
         s == "abs";
}

UnaryOp function_op(const std::string& s) {
  if (s == "sin") return UnaryOp::Sin;
  if (s == "cos") return UnaryOp::Cos;
  if (s == "exp") return UnaryOp::Exp;
  if (s == "ln") return UnaryOp::Ln;
  if (s == "sqrt") return UnaryOp::Sqrt;
  return UnaryOp::Abs;
}

class Parser {
 public:
  Parser(std::vector<Token> tokens, VarSet vars)
      : tokens_(std::move(tokens)), vars_(vars) {}

  NodePtr run() {
    NodePtr root = parse_expr();
    if (peek().kind != Token::Kind::End) {
      fail(peek(), "an operator or end of input");
    }
    return root;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& advance() { return tokens_[pos_++]; }

  [[noreturn]] void fail(const Token& tk, const std::string& expected) const {
    throw SyntaxError(tk.offset, expected, describe(tk));
  }

  void expect(Token::Kind kind, const std::string& expected) {
    if (peek().kind != kind) fail(peek(), expected);
    advance();
  }

  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    while (peek().kind == Token::Kind::Plus ||
           peek().kind == Token::Kind::Minus) {
      BinaryOp op = advance().kind == Token::Kind::Plus ? BinaryOp::Add
                                                        : BinaryOp::Sub;
      lhs = detail::make_binary(op, std::move(lhs), parse_term());
    }
    return lhs;
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_factor();
    while (peek().kind == Token::Kind::Star ||
           peek().kind == Token::Kind::Slash) {
      BinaryOp op = advance().kind == Token::Kind::Star ? BinaryOp::Mul
                                                        : BinaryOp::Div;
      lhs = detail::make_binary(op, std::move(lhs), parse_factor());
    }
    return lhs;
  }

  NodePtr parse_factor() {
    if (peek().kind == Token::Kind::Minus) {
      advance();
      return detail::make_unary(UnaryOp::Neg, parse_factor());
    }
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_atom();
    if (peek().kind == Token::Kind::Caret) {
      advance();
      return detail::make_binary(BinaryOp::Pow, std::move(base),
                                 parse_factor());
    }
    return base;
  }

  NodePtr parse_atom() {
    const Token& tk = peek();
    switch (tk.kind) {
      case Token::Kind::Number: {
        advance();
        return detail::make_constant(tk.num);
      }
      case Token::Kind::LParen: {
        advance();
        NodePtr e = parse_expr();
        expect(Token::Kind::RParen, "')'");
        return e;
      }
      case Token::Kind::Ident: {
        Token ident = advance();
        if (peek().kind == Token::Kind::LParen && is_function_name(ident.text)) {
          advance();
          NodePtr arg = parse_expr();
          expect(Token::Kind::RParen, "')'");
          return detail::make_unary(function_op(ident.text), std::move(arg));
        }
        if (is_function_name(ident.text)) {
          throw UnknownIdentifier(ident.text, ident.offset,
                                  "function names need an argument list");
        }
        if (ident.text == "pi") return detail::make_constant(M_PI);
        if (ident.text == "e") return detail::make_constant(M_E);
        if (ident.text == "x" && vars_.x) return detail::make_variable('x');
        if (ident.text == "y" && vars_.y) return detail::make_variable('y');
        if (ident.text == "t" && vars_.t) return detail::make_variable('t');
        throw UnknownIdentifier(ident.text, ident.offset, allowed_vars());
      }
      default:
        fail(tk, "a number, an identifier, '(' or '-'");
    }
  }

  std::string allowed_vars() const {
    std::string names;
    auto add = [&names](const char* v) {
      if (!names.empty()) names += ", ";
      names += v;
    };
    if (vars_.x) add("x");
    if (vars_.y) add("y");
    if (vars_.t) add("t");
    if (names.empty()) return "no variables are allowed here";
    return "allowed variables here: " + names;
  }

  std::vector<Token> tokens_;
  VarSet vars_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse_expression(std::string_view source, VarSet allowed) {
  Parser parser(lex(source), allowed);
  return Expr(parser.run());
}

}  // namespace attract
