#include "memkit/expr.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "memkit/error.hpp"

namespace memkit {

std::string_view var_name(Var var) {
  switch (var) {
    case Var::q: return "q";
    case Var::phi: return "phi";
    case Var::i: return "i";
    case Var::v: return "v";
    case Var::t: return "t";
  }
  return "?";
}

std::string VarSet::to_string() const {
  std::string out;
  for (Var v : {Var::q, Var::phi, Var::i, Var::v, Var::t}) {
    if (!contains(v)) continue;
    if (!out.empty()) out += ", ";
    out += var_name(v);
  }
  return out;
}

double Point::operator[](Var var) const {
  switch (var) {
    case Var::q: return q;
    case Var::phi: return phi;
    case Var::i: return i;
    case Var::v: return v;
    case Var::t: return t;
  }
  return 0.0;
}

std::string format_number(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

struct Expr::Node {
  Op op = Op::constant;
  double value = 0.0;
  Var var = Var::q;
  std::shared_ptr<const Node> a;
  std::shared_ptr<const Node> b;
};

Expr::Expr() : Expr(constant(0.0)) {}

Expr::Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

Expr Expr::constant(double value) {
  auto n = std::make_shared<Node>();
  n->op = Op::constant;
  n->value = value;
  return Expr(std::move(n));
}

Expr Expr::variable(Var var) {
  auto n = std::make_shared<Node>();
  n->op = Op::variable;
  n->var = var;
  return Expr(std::move(n));
}

Expr Expr::binary(Op op, Expr lhs, Expr rhs) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->a = std::move(lhs.node_);
  n->b = std::move(rhs.node_);
  return Expr(std::move(n));
}

Expr Expr::unary(Op op, Expr arg) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->a = std::move(arg.node_);
  return Expr(std::move(n));
}

Expr::Op Expr::op() const { return node_->op; }
double Expr::constant_value() const { return node_->value; }
Var Expr::var() const { return node_->var; }
Expr Expr::lhs() const { return Expr(node_->a); }
Expr Expr::rhs() const { return Expr(node_->b); }

namespace {

[[noreturn]] void domain_fail(const char* what) { throw DomainError(std::string("characteristic evaluation: ") + what); }

double checked(double x, const char* what) {
  if (!std::isfinite(x)) domain_fail(what);
  return x;
}

}  // namespace

// Plain evaluation and forward-mode differentiation share the recursion shape
// but are kept separate so that the value path stays cheap.
double Expr::eval(const Point& point) const {
  struct Rec {
    static double run(const Node& n, const Point& p) {
      switch (n.op) {
        case Op::constant: return n.value;
        case Op::variable: return p[n.var];
        case Op::add: return run(*n.a, p) + run(*n.b, p);
        case Op::sub: return run(*n.a, p) - run(*n.b, p);
        case Op::mul: return run(*n.a, p) * run(*n.b, p);
        case Op::div: {
          double den = run(*n.b, p);
          if (den == 0.0) domain_fail("division by zero");
          return run(*n.a, p) / den;
        }
        case Op::pow: return std::pow(run(*n.a, p), run(*n.b, p));
        case Op::neg: return -run(*n.a, p);
        case Op::sin: return std::sin(run(*n.a, p));
        case Op::cos: return std::cos(run(*n.a, p));
        case Op::exp: return std::exp(run(*n.a, p));
        case Op::asin: {
          double x = run(*n.a, p);
          if (x < -1.0 || x > 1.0) domain_fail("asin argument outside [-1, 1]");
          return std::asin(x);
        }
      }
      return 0.0;
    }
  };
  return checked(Rec::run(*node_, point), "non-finite result");
}

Dual Expr::eval_dual(const Point& point) const {
  struct Rec {
    static Dual scale(const Dual& a, double value, double factor) {
      Dual r;
      r.value = value;
      for (std::size_t k = 0; k < 4; ++k) r.grad[k] = factor * a.grad[k];
      return r;
    }
    static Dual run(const Node& n, const Point& p) {
      Dual r;
      switch (n.op) {
        case Op::constant:
          r.value = n.value;
          return r;
        case Op::variable:
          r.value = p[n.var];
          if (n.var != Var::t) r.grad[static_cast<std::size_t>(n.var)] = 1.0;
          return r;
        case Op::add:
        case Op::sub: {
          Dual a = run(*n.a, p), b = run(*n.b, p);
          double s = n.op == Op::add ? 1.0 : -1.0;
          r.value = a.value + s * b.value;
          for (std::size_t k = 0; k < 4; ++k) r.grad[k] = a.grad[k] + s * b.grad[k];
          return r;
        }
        case Op::mul: {
          Dual a = run(*n.a, p), b = run(*n.b, p);
          r.value = a.value * b.value;
          for (std::size_t k = 0; k < 4; ++k) r.grad[k] = a.grad[k] * b.value + a.value * b.grad[k];
          return r;
        }
        case Op::div: {
          Dual a = run(*n.a, p), b = run(*n.b, p);
          if (b.value == 0.0) domain_fail("division by zero");
          r.value = a.value / b.value;
          for (std::size_t k = 0; k < 4; ++k) r.grad[k] = (a.grad[k] - r.value * b.grad[k]) / b.value;
          return r;
        }
        case Op::pow: {
          Dual a = run(*n.a, p), b = run(*n.b, p);
          r.value = std::pow(a.value, b.value);
          bool exponent_varies = false;
          for (double g : b.grad) exponent_varies |= g != 0.0;
          double da = b.value == 0.0 ? 0.0 : b.value * std::pow(a.value, b.value - 1.0);
          double db = exponent_varies ? r.value * std::log(a.value) : 0.0;
          for (std::size_t k = 0; k < 4; ++k) {
            r.grad[k] = (a.grad[k] != 0.0 ? da * a.grad[k] : 0.0) + (b.grad[k] != 0.0 ? db * b.grad[k] : 0.0);
          }
          return r;
        }
        case Op::neg: {
          Dual a = run(*n.a, p);
          return scale(a, -a.value, -1.0);
        }
        case Op::sin: {
          Dual a = run(*n.a, p);
          return scale(a, std::sin(a.value), std::cos(a.value));
        }
        case Op::cos: {
          Dual a = run(*n.a, p);
          return scale(a, std::cos(a.value), -std::sin(a.value));
        }
        case Op::exp: {
          Dual a = run(*n.a, p);
          double e = std::exp(a.value);
          return scale(a, e, e);
        }
        case Op::asin: {
          Dual a = run(*n.a, p);
          if (a.value <= -1.0 || a.value >= 1.0) domain_fail("asin derivative undefined outside (-1, 1)");
          return scale(a, std::asin(a.value), 1.0 / std::sqrt(1.0 - a.value * a.value));
        }
      }
      return r;
    }
  };
  Dual r = Rec::run(*node_, point);
  checked(r.value, "non-finite result");
  for (double g : r.grad) checked(g, "non-finite derivative");
  return r;
}

VarSet Expr::variables() const {
  VarSet out;
  std::function<void(const Node&)> walk = [&](const Node& n) {
    if (n.op == Op::variable) out.insert(n.var);
    if (n.a) walk(*n.a);
    if (n.b) walk(*n.b);
  };
  walk(*node_);
  return out;
}

// ---------------------------------------------------------------------------
// Printing

namespace {

constexpr int kPrecAdd = 1;
constexpr int kPrecMul = 2;
constexpr int kPrecUnary = 3;
constexpr int kPrecPow = 4;
constexpr int kPrecAtom = 5;

}  // namespace

std::string Expr::to_string() const {
  struct Printer {
    static int precedence(const Node& n) {
      switch (n.op) {
        case Op::constant: return n.value < 0.0 || std::signbit(n.value) ? kPrecUnary : kPrecAtom;
        case Op::variable: return kPrecAtom;
        case Op::add:
        case Op::sub: return kPrecAdd;
        case Op::mul:
        case Op::div: return kPrecMul;
        case Op::neg: return kPrecUnary;
        case Op::pow: return kPrecPow;
        default: return kPrecAtom;  // function calls
      }
    }
    static void print(const Node& n, int min_prec, std::string& out) {
      bool parens = precedence(n) < min_prec;
      if (parens) out += '(';
      switch (n.op) {
        case Op::constant: out += format_number(n.value); break;
        case Op::variable: out += var_name(n.var); break;
        case Op::add:
        case Op::sub:
        case Op::mul:
        case Op::div: {
          int p = precedence(n);
          print(*n.a, p, out);
          out += n.op == Op::add ? " + " : n.op == Op::sub ? " - " : n.op == Op::mul ? " * " : " / ";
          print(*n.b, p + 1, out);
          break;
        }
        case Op::pow:
          print(*n.a, kPrecAtom, out);
          out += '^';
          print(*n.b, kPrecPow, out);
          break;
        case Op::neg:
          out += '-';
          print(*n.a, kPrecUnary, out);
          break;
        case Op::sin:
        case Op::cos:
        case Op::exp:
        case Op::asin:
          out += n.op == Op::sin ? "sin(" : n.op == Op::cos ? "cos(" : n.op == Op::exp ? "exp(" : "asin(";
          print(*n.a, 0, out);
          out += ')';
          break;
      }
      if (parens) out += ')';
    }
  };
  std::string out;
  Printer::print(*node_, 0, out);
  return out;
}

// ---------------------------------------------------------------------------
// Simplifying builders and symbolic calculus

namespace {

bool is_const(const Expr& e, double value) { return e.is_constant() && e.constant_value() == value; }

}  // namespace

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr::constant(a.constant_value() + b.constant_value());
  if (is_const(a, 0.0)) return b;
  if (is_const(b, 0.0)) return a;
  return Expr::binary(Expr::Op::add, a, b);
}

Expr operator-(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr::constant(a.constant_value() - b.constant_value());
  if (is_const(b, 0.0)) return a;
  if (is_const(a, 0.0)) return -b;
  return Expr::binary(Expr::Op::sub, a, b);
}

Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr::constant(a.constant_value() * b.constant_value());
  if (is_const(a, 0.0) || is_const(b, 0.0)) return Expr::constant(0.0);
  if (is_const(a, 1.0)) return b;
  if (is_const(b, 1.0)) return a;
  return Expr::binary(Expr::Op::mul, a, b);
}

Expr operator/(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant() && b.constant_value() != 0.0)
    return Expr::constant(a.constant_value() / b.constant_value());
  if (is_const(a, 0.0) && !is_const(b, 0.0)) return Expr::constant(0.0);
  if (is_const(b, 1.0)) return a;
  return Expr::binary(Expr::Op::div, a, b);
}

Expr operator-(const Expr& a) {
  if (a.is_constant()) return Expr::constant(-a.constant_value());
  if (a.op() == Expr::Op::neg) return a.lhs();
  return Expr::unary(Expr::Op::neg, a);
}

Expr pow(const Expr& base, const Expr& exponent) {
  if (is_const(exponent, 0.0)) return Expr::constant(1.0);
  if (is_const(exponent, 1.0)) return base;
  if (base.is_constant() && exponent.is_constant())
    return Expr::constant(std::pow(base.constant_value(), exponent.constant_value()));
  return Expr::binary(Expr::Op::pow, base, exponent);
}

Expr sin(const Expr& a) { return a.is_constant() ? Expr::constant(std::sin(a.constant_value())) : Expr::unary(Expr::Op::sin, a); }
Expr cos(const Expr& a) { return a.is_constant() ? Expr::constant(std::cos(a.constant_value())) : Expr::unary(Expr::Op::cos, a); }
Expr exp(const Expr& a) { return a.is_constant() ? Expr::constant(std::exp(a.constant_value())) : Expr::unary(Expr::Op::exp, a); }
Expr asin(const Expr& a) { return Expr::unary(Expr::Op::asin, a); }

Expr Expr::derivative(Var var) const {
  switch (op()) {
    case Op::constant: return constant(0.0);
    case Op::variable: return constant(this->var() == var ? 1.0 : 0.0);
    case Op::add: return lhs().derivative(var) + rhs().derivative(var);
    case Op::sub: return lhs().derivative(var) - rhs().derivative(var);
    case Op::mul: return lhs().derivative(var) * rhs() + lhs() * rhs().derivative(var);
    case Op::div: {
      Expr a = lhs(), b = rhs();
      return (a.derivative(var) * b - a * b.derivative(var)) / pow(b, constant(2.0));
    }
    case Op::pow: {
      Expr a = lhs(), b = rhs();
      Expr db = b.derivative(var);
      Expr term = b * pow(a, b - constant(1.0)) * a.derivative(var);
      if (is_const(db, 0.0)) return term;
      // The language has no logarithm to express a^b ln(a) b'.
      throw DomainError("symbolic derivative of a variable exponent is not supported");
    }
    case Op::neg: return -lhs().derivative(var);
    case Op::sin: return cos(lhs()) * lhs().derivative(var);
    case Op::cos: return -(sin(lhs()) * lhs().derivative(var));
    case Op::exp: return *this * lhs().derivative(var);
    case Op::asin: {
      Expr a = lhs();
      return a.derivative(var) / pow(constant(1.0) - pow(a, constant(2.0)), constant(0.5));
    }
  }
  return constant(0.0);
}

Expr Expr::substitute(Var var, const Expr& replacement) const {
  switch (op()) {
    case Op::constant: return *this;
    case Op::variable: return this->var() == var ? replacement : *this;
    case Op::add: return lhs().substitute(var, replacement) + rhs().substitute(var, replacement);
    case Op::sub: return lhs().substitute(var, replacement) - rhs().substitute(var, replacement);
    case Op::mul: return lhs().substitute(var, replacement) * rhs().substitute(var, replacement);
    case Op::div: return lhs().substitute(var, replacement) / rhs().substitute(var, replacement);
    case Op::pow: return pow(lhs().substitute(var, replacement), rhs().substitute(var, replacement));
    case Op::neg: return -lhs().substitute(var, replacement);
    case Op::sin: return sin(lhs().substitute(var, replacement));
    case Op::cos: return cos(lhs().substitute(var, replacement));
    case Op::exp: return exp(lhs().substitute(var, replacement));
    case Op::asin: return asin(lhs().substitute(var, replacement));
  }
  return *this;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

class ExprParser {
 public:
  ExprParser(std::string_view text, const ConstantTable& constants) : text_(text), constants_(constants) {}

  Expr parse() {
    Expr e = parse_sum();
    skip_space();
    if (pos_ < text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& message) const {
    throw ParseError(message, 1, static_cast<int>(pos_) + 1);
  }

  void skip_space() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr parse_sum() {
    Expr e = parse_product();
    for (;;) {
      if (accept('+')) {
        e = Expr::binary(Expr::Op::add, e, parse_product());
      } else if (accept('-')) {
        e = Expr::binary(Expr::Op::sub, e, parse_product());
      } else {
        return e;
      }
    }
  }

  Expr parse_product() {
    Expr e = parse_unary();
    for (;;) {
      if (accept('*')) {
        e = Expr::binary(Expr::Op::mul, e, parse_unary());
      } else if (accept('/')) {
        e = Expr::binary(Expr::Op::div, e, parse_unary());
      } else {
        return e;
      }
    }
  }

  Expr parse_unary() {
    if (accept('-')) {
      Expr arg = parse_unary();
      if (arg.is_constant()) return Expr::constant(-arg.constant_value());
      return Expr::unary(Expr::Op::neg, arg);
    }
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    if (accept('^')) return Expr::binary(Expr::Op::pow, base, parse_unary());
    return base;
  }

  Expr parse_primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = parse_sum();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  Expr parse_number() {
    std::size_t start = pos_;
    double value = 0.0;
    auto res = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), value);
    if (res.ec != std::errc()) fail("malformed number");
    pos_ = static_cast<std::size_t>(res.ptr - text_.data());
    if (pos_ < text_.size() && (std::isalpha(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      pos_ = start;
      fail("malformed number");
    }
    return Expr::constant(value);
  }

  Expr parse_identifier() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    std::string_view name = text_.substr(start, pos_ - start);

    static constexpr std::pair<std::string_view, Expr::Op> kFunctions[] = {
        {"sin", Expr::Op::sin}, {"cos", Expr::Op::cos}, {"exp", Expr::Op::exp}, {"asin", Expr::Op::asin}};
    for (const auto& [fname, fop] : kFunctions) {
      if (name != fname) continue;
      if (!accept('(')) fail("expected '(' after " + std::string(name));
      Expr arg = parse_sum();
      if (!accept(')')) fail("expected ')'");
      return Expr::unary(fop, arg);
    }

    if (name == "q") return Expr::variable(Var::q);
    if (name == "phi") return Expr::variable(Var::phi);
    if (name == "i") return Expr::variable(Var::i);
    if (name == "v") return Expr::variable(Var::v);
    if (name == "t") return Expr::variable(Var::t);
    if (auto it = constants_.find(name); it != constants_.end()) return Expr::constant(it->second);
    if (name == "pi") return Expr::constant(std::numbers::pi);
    if (name == "sigma" || name == "rho") {
      pos_ = start;
      fail("second-order devices are out of scope ('" + std::string(name) +
           "' is a time integral of charge or flux)");
    }
    pos_ = start;
    fail("unknown identifier '" + std::string(name) + "'");
  }

  std::string_view text_;
  const ConstantTable& constants_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse_expr(std::string_view text, const ConstantTable& constants) {
  return ExprParser(text, constants).parse();
}

}  // namespace memkit
