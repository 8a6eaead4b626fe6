#pragma once

// Scalar-field expressions over x1..xn with exact first and second derivatives.
//
// Grammar (standard precedence, left-associative within a level):
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' exponent)*
//   exponent:= ['-' | '+'] INTEGER | '(' ['-' | '+'] INTEGER ')'
//   primary := NUMBER | 'pi' | VAR | FUNC '(' expr ')' | '(' expr ')'
// with VAR = x1, x2, ... and FUNC in {sin, cos, exp, sqrt, log}.

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace degenbill {

inline constexpr int kMaxDim = 3;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Syntax errors carry the byte offset into the source text.
class ParseError : public Error {
public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " at byte " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

private:
  std::size_t offset_;
};

/// Raised when a sub-expression is evaluated outside its domain.
class EvalError : public Error {
public:
  EvalError(const std::string& what, std::string subexpr)
      : Error(what + " in '" + subexpr + "'"), subexpr_(std::move(subexpr)) {}
  const std::string& subexpression() const { return subexpr_; }

private:
  std::string subexpr_;
};

enum class Func { Sin, Cos, Exp, Sqrt, Log };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  enum class Kind { Constant, Variable, Negate, Add, Sub, Mul, Div, Power, Call };
  Kind kind = Kind::Constant;
  double value = 0.0;  // Constant
  int index = 0;       // Variable (0-based)
  int exponent = 0;    // Power
  Func func = Func::Sin;
  NodePtr lhs;  // unary operand / base / call argument
  NodePtr rhs;
};

bool operator==(const Node& a, const Node& b);

/// Second-order truncated Taylor jet in up to kMaxDim variables.
struct Jet {
  double v = 0.0;
  std::array<double, kMaxDim> g{};
  std::array<double, kMaxDim * kMaxDim> h{};

  static Jet constant(double c) {
    Jet j;
    j.v = c;
    return j;
  }
  static Jet variable(double x, int i) {
    Jet j;
    j.v = x;
    j.g[i] = 1.0;
    return j;
  }
};

Jet operator+(const Jet& a, const Jet& b);
Jet operator-(const Jet& a, const Jet& b);
Jet operator-(const Jet& a);
Jet operator*(const Jet& a, const Jet& b);
Jet operator*(double c, const Jet& a);
Jet operator/(const Jet& a, const Jet& b);

/// Applies a univariate function given its value and first two derivatives at a.v.
Jet chain(const Jet& a, double f0, double f1, double f2);

struct FieldJet {
  double value = 0.0;
  Vec gradient;
  Mat hessian;
};

/// Immutable parsed expression; cheap to copy, safe to evaluate concurrently.
class FieldExpr {
public:
  FieldExpr() = default;
  FieldExpr(NodePtr root, int dim, std::string source)
      : root_(std::move(root)), dim_(dim), source_(std::move(source)) {}

  int dim() const { return dim_; }
  const std::string& source() const { return source_; }
  const Node& root() const { return *root_; }
  bool empty() const { return !root_; }

  double value(std::span<const double> x) const;
  Jet jet(std::span<const double> x) const;

  /// Fully parenthesized form; parses back to an equal AST.
  std::string to_string() const;

  friend bool operator==(const FieldExpr& a, const FieldExpr& b) {
    return a.dim_ == b.dim_ && *a.root_ == *b.root_;
  }

private:
  NodePtr root_;
  int dim_ = 0;
  std::string source_;
};

FieldExpr parse_expression(std::string_view text, int n);

FieldJet evaluate_jet(const FieldExpr& expr, const Vec& x);

std::string to_string(const Node& node);

}  // namespace degenbill
