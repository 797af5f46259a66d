#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>

namespace memkit {

// The four fundamental circuit variables plus time.
enum class Var : std::uint8_t { q = 0, phi = 1, i = 2, v = 3, t = 4 };

std::string_view var_name(Var var);

// Small bitmask set over Var.
class VarSet {
 public:
  constexpr VarSet() = default;
  constexpr VarSet(std::initializer_list<Var> vars) {
    for (Var v : vars) bits_ |= bit(v);
  }

  constexpr bool contains(Var v) const { return (bits_ & bit(v)) != 0; }
  constexpr void insert(Var v) { bits_ |= bit(v); }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr bool subset_of(VarSet other) const { return (bits_ & ~other.bits_) == 0; }
  constexpr VarSet operator|(VarSet other) const { return VarSet(bits_ | other.bits_); }
  constexpr bool operator==(const VarSet&) const = default;

  // "q, phi, i" style listing in canonical order.
  std::string to_string() const;

 private:
  constexpr explicit VarSet(std::uint8_t bits) : bits_(bits) {}
  static constexpr std::uint8_t bit(Var v) { return static_cast<std::uint8_t>(1u << static_cast<unsigned>(v)); }
  std::uint8_t bits_ = 0;
};

struct Point {
  double q = 0.0;
  double phi = 0.0;
  double i = 0.0;
  double v = 0.0;
  double t = 0.0;

  double operator[](Var var) const;
};

// Forward-mode dual number carrying the gradient with respect to (q, phi, i, v).
struct Dual {
  double value = 0.0;
  std::array<double, 4> grad{};

  double d(Var var) const { return var == Var::t ? 0.0 : grad[static_cast<std::size_t>(var)]; }
};

// Immutable expression tree over constants, circuit variables, the four
// arithmetic operators, powers and a few elementary functions. Copies share
// structure; an Expr is safe to share between threads.
class Expr {
 public:
  enum class Op : std::uint8_t { constant, variable, add, sub, mul, div, pow, neg, sin, cos, exp, asin };

  Expr();  // the constant 0
  static Expr constant(double value);
  static Expr variable(Var var);
  // Raw node constructors; no simplification is applied.
  static Expr binary(Op op, Expr lhs, Expr rhs);
  static Expr unary(Op op, Expr arg);

  Op op() const;
  double constant_value() const;
  Var var() const;
  Expr lhs() const;  // also the argument of unary nodes
  Expr rhs() const;

  bool is_constant() const { return op() == Op::constant; }

  // Throws DomainError on division by zero or a non-finite result.
  double eval(const Point& point) const;
  Dual eval_dual(const Point& point) const;

  VarSet variables() const;

  // Canonical text. parse_expr(e.to_string()).to_string() == e.to_string().
  std::string to_string() const;

  // Symbolic manipulation; results are lightly simplified (constant folding,
  // additive and multiplicative identities).
  Expr derivative(Var var) const;
  Expr substitute(Var var, const Expr& replacement) const;

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);
  friend Expr pow(const Expr& base, const Expr& exponent);
  friend Expr sin(const Expr& a);
  friend Expr cos(const Expr& a);
  friend Expr exp(const Expr& a);
  friend Expr asin(const Expr& a);

 private:
  struct Node;
  explicit Expr(std::shared_ptr<const Node> node);
  std::shared_ptr<const Node> node_;
};

using ConstantTable = std::map<std::string, double, std::less<>>;

// Recursive-descent parser. Identifiers q, phi, i, v, t name variables; `pi`
// and the entries of `constants` are bound numerically; sin, cos, exp and asin
// are the available functions. `^` is right-associative and binds tighter
// than unary minus. Throws ParseError with a 1-based column on failure.
Expr parse_expr(std::string_view text, const ConstantTable& constants = {});

// Shortest decimal text that reads back to exactly `value`.
std::string format_number(double value);

}  // namespace memkit
