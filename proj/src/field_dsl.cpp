#include "degenbill/field_dsl.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <vector>

namespace degenbill {

// ---------------------------------------------------------------------------
// Jet arithmetic

Jet operator+(const Jet& a, const Jet& b) {
  Jet r;
  r.v = a.v + b.v;
  for (int i = 0; i < kMaxDim; ++i) r.g[i] = a.g[i] + b.g[i];
  for (int i = 0; i < kMaxDim * kMaxDim; ++i) r.h[i] = a.h[i] + b.h[i];
  return r;
}

Jet operator-(const Jet& a, const Jet& b) {
  Jet r;
  r.v = a.v - b.v;
  for (int i = 0; i < kMaxDim; ++i) r.g[i] = a.g[i] - b.g[i];
  for (int i = 0; i < kMaxDim * kMaxDim; ++i) r.h[i] = a.h[i] - b.h[i];
  return r;
}

Jet operator-(const Jet& a) {
  Jet r;
  r.v = -a.v;
  for (int i = 0; i < kMaxDim; ++i) r.g[i] = -a.g[i];
  for (int i = 0; i < kMaxDim * kMaxDim; ++i) r.h[i] = -a.h[i];
  return r;
}

Jet operator*(const Jet& a, const Jet& b) {
  Jet r;
  r.v = a.v * b.v;
  for (int i = 0; i < kMaxDim; ++i) r.g[i] = a.g[i] * b.v + a.v * b.g[i];
  for (int i = 0; i < kMaxDim; ++i)
    for (int j = 0; j < kMaxDim; ++j) {
      const int k = i * kMaxDim + j;
      r.h[k] = a.h[k] * b.v + a.v * b.h[k] + a.g[i] * b.g[j] + a.g[j] * b.g[i];
    }
  return r;
}

Jet operator*(double c, const Jet& a) {
  Jet r;
  r.v = c * a.v;
  for (int i = 0; i < kMaxDim; ++i) r.g[i] = c * a.g[i];
  for (int i = 0; i < kMaxDim * kMaxDim; ++i) r.h[i] = c * a.h[i];
  return r;
}

Jet chain(const Jet& a, double f0, double f1, double f2) {
  Jet r;
  r.v = f0;
  for (int i = 0; i < kMaxDim; ++i) r.g[i] = f1 * a.g[i];
  for (int i = 0; i < kMaxDim; ++i)
    for (int j = 0; j < kMaxDim; ++j) {
      const int k = i * kMaxDim + j;
      r.h[k] = f1 * a.h[k] + f2 * a.g[i] * a.g[j];
    }
  return r;
}

Jet operator/(const Jet& a, const Jet& b) {
  const double inv = 1.0 / b.v;
  return a * chain(b, inv, -inv * inv, 2.0 * inv * inv * inv);
}

// ---------------------------------------------------------------------------
// AST helpers

bool operator==(const Node& a, const Node& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Node::Kind::Constant:
      return a.value == b.value;
    case Node::Kind::Variable:
      return a.index == b.index;
    case Node::Kind::Negate:
      return *a.lhs == *b.lhs;
    case Node::Kind::Power:
      return a.exponent == b.exponent && *a.lhs == *b.lhs;
    case Node::Kind::Call:
      return a.func == b.func && *a.lhs == *b.lhs;
    default:
      return *a.lhs == *b.lhs && *a.rhs == *b.rhs;
  }
}

namespace {

const char* func_name(Func f) {
  switch (f) {
    case Func::Sin: return "sin";
    case Func::Cos: return "cos";
    case Func::Exp: return "exp";
    case Func::Sqrt: return "sqrt";
    case Func::Log: return "log";
  }
  return "?";
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string to_string(const Node& node) {
  switch (node.kind) {
    case Node::Kind::Constant:
      return format_number(node.value);
    case Node::Kind::Variable:
      return "x" + std::to_string(node.index + 1);
    case Node::Kind::Negate:
      return "(-" + to_string(*node.lhs) + ")";
    case Node::Kind::Add:
      return "(" + to_string(*node.lhs) + " + " + to_string(*node.rhs) + ")";
    case Node::Kind::Sub:
      return "(" + to_string(*node.lhs) + " - " + to_string(*node.rhs) + ")";
    case Node::Kind::Mul:
      return "(" + to_string(*node.lhs) + " * " + to_string(*node.rhs) + ")";
    case Node::Kind::Div:
      return "(" + to_string(*node.lhs) + " / " + to_string(*node.rhs) + ")";
    case Node::Kind::Power:
      return "(" + to_string(*node.lhs) + "^" + std::to_string(node.exponent) + ")";
    case Node::Kind::Call:
      return std::string(func_name(node.func)) + "(" + to_string(*node.lhs) + ")";
  }
  return {};
}

// ---------------------------------------------------------------------------
// Parser

namespace {

class Parser {
public:
  Parser(std::string_view text, int n) : text_(text), n_(n) {}

  NodePtr parse() {
    skip_ws();
    if (pos_ == text_.size()) throw ParseError("empty expression", 0);
    NodePtr e = expr();
    skip_ws();
    if (pos_ != text_.size())
      throw ParseError(std::string("unexpected character '") + text_[pos_] + "'", pos_);
    return e;
  }

private:
  static NodePtr make(Node n) { return std::make_shared<const Node>(std::move(n)); }

  static NodePtr binary(Node::Kind k, NodePtr a, NodePtr b) {
    Node n;
    n.kind = k;
    n.lhs = std::move(a);
    n.rhs = std::move(b);
    return make(std::move(n));
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
    if (!accept(c)) {
      if (pos_ >= text_.size())
        throw ParseError(std::string("expected '") + c + "' but reached end of input", pos_);
      throw ParseError(std::string("expected '") + c + "'", pos_);
    }
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+'))
        lhs = binary(Node::Kind::Add, lhs, term());
      else if (accept('-'))
        lhs = binary(Node::Kind::Sub, lhs, term());
      else
        return lhs;
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*'))
        lhs = binary(Node::Kind::Mul, lhs, unary());
      else if (accept('/'))
        lhs = binary(Node::Kind::Div, lhs, unary());
      else
        return lhs;
    }
  }

  NodePtr unary() {
    if (accept('-')) {
      Node n;
      n.kind = Node::Kind::Negate;
      n.lhs = unary();
      return make(std::move(n));
    }
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    while (accept('^')) {
      Node n;
      n.kind = Node::Kind::Power;
      n.lhs = base;
      n.exponent = integer_exponent();
      base = make(std::move(n));
    }
    return base;
  }

  int integer_exponent() {
    const bool paren = accept('(');
    int sign = 1;
    if (accept('-'))
      sign = -1;
    else
      accept('+');
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ == start) throw ParseError("exponent must be an integer literal", start);
    if (pos_ < text_.size() && (text_[pos_] == '.' || text_[pos_] == 'e' || text_[pos_] == 'E'))
      throw ParseError("exponent must be an integer literal", start);
    int value = 0;
    auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (ec != std::errc()) throw ParseError("exponent out of range", start);
    if (paren) expect(')');
    return sign * value;
  }

  NodePtr primary() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  NodePtr number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
      ++pos_;
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
      if (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) {
        pos_ = p;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      }
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, v);
    if (ec != std::errc() || ptr != text_.data() + pos_)
      throw ParseError("malformed number", start);
    Node n;
    n.kind = Node::Kind::Constant;
    n.value = v;
    return make(std::move(n));
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    const std::string_view name = text_.substr(start, pos_ - start);

    if (name == "pi") {
      Node n;
      n.kind = Node::Kind::Constant;
      n.value = std::numbers::pi;
      return make(std::move(n));
    }
    if (name.size() >= 2 && name[0] == 'x') {
      bool digits = true;
      for (std::size_t i = 1; i < name.size(); ++i)
        digits = digits && std::isdigit(static_cast<unsigned char>(name[i]));
      if (digits) {
        int idx = 0;
        std::from_chars(name.data() + 1, name.data() + name.size(), idx);
        if (idx < 1 || idx > n_)
          throw ParseError("variable index out of range: '" + std::string(name) +
                               "' with n = " + std::to_string(n_),
                           start);
        Node n;
        n.kind = Node::Kind::Variable;
        n.index = idx - 1;
        return make(std::move(n));
      }
    }
    static constexpr std::pair<std::string_view, Func> kFuncs[] = {
        {"sin", Func::Sin}, {"cos", Func::Cos}, {"exp", Func::Exp},
        {"sqrt", Func::Sqrt}, {"log", Func::Log}};
    for (const auto& [fname, f] : kFuncs) {
      if (name == fname) {
        expect('(');
        Node n;
        n.kind = Node::Kind::Call;
        n.func = f;
        n.lhs = expr();
        expect(')');
        return make(std::move(n));
      }
    }
    throw ParseError("unknown identifier '" + std::string(name) + "'", start);
  }

  std::string_view text_;
  int n_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Evaluation

double value_of(double x) { return x; }
double value_of(const Jet& j) { return j.v; }

template <class T>
T constant_of(double c);
template <>
double constant_of<double>(double c) { return c; }
template <>
Jet constant_of<Jet>(double c) { return Jet::constant(c); }

double apply(Func f, double a, const Node& node) {
  switch (f) {
    case Func::Sin: return std::sin(a);
    case Func::Cos: return std::cos(a);
    case Func::Exp: return std::exp(a);
    case Func::Sqrt:
      if (a < 0.0) throw EvalError("sqrt of negative argument", to_string(node));
      return std::sqrt(a);
    case Func::Log:
      if (a <= 0.0) throw EvalError("log of non-positive argument", to_string(node));
      return std::log(a);
  }
  return 0.0;
}

Jet apply(Func f, const Jet& a, const Node& node) {
  const double x = a.v;
  switch (f) {
    case Func::Sin: return chain(a, std::sin(x), std::cos(x), -std::sin(x));
    case Func::Cos: return chain(a, std::cos(x), -std::sin(x), -std::cos(x));
    case Func::Exp: {
      const double e = std::exp(x);
      return chain(a, e, e, e);
    }
    case Func::Sqrt: {
      if (x <= 0.0)
        throw EvalError("sqrt of non-positive argument (derivative undefined)", to_string(node));
      const double s = std::sqrt(x);
      return chain(a, s, 0.5 / s, -0.25 / (s * x));
    }
    case Func::Log:
      if (x <= 0.0) throw EvalError("log of non-positive argument", to_string(node));
      return chain(a, std::log(x), 1.0 / x, -1.0 / (x * x));
  }
  return a;
}

double ipow(double x, int n) {
  double r = 1.0;
  double b = x;
  unsigned e = static_cast<unsigned>(n < 0 ? -n : n);
  while (e) {
    if (e & 1u) r *= b;
    b *= b;
    e >>= 1u;
  }
  return n < 0 ? 1.0 / r : r;
}

double power_of(double a, int n, const Node& node) {
  if (n < 0 && a == 0.0) throw EvalError("division by zero", to_string(node));
  return ipow(a, n);
}

Jet power_of(const Jet& a, int n, const Node& node) {
  if (n < 0 && a.v == 0.0) throw EvalError("division by zero", to_string(node));
  if (n == 0) return Jet::constant(1.0);
  const double f0 = ipow(a.v, n);
  const double f1 = n * ipow(a.v, n - 1);
  const double f2 = (n == 1) ? 0.0 : n * (n - 1) * ipow(a.v, n - 2);
  return chain(a, f0, f1, f2);
}

template <class T>
T eval(const Node& node, std::span<const T> vars) {
  switch (node.kind) {
    case Node::Kind::Constant:
      return constant_of<T>(node.value);
    case Node::Kind::Variable:
      return vars[node.index];
    case Node::Kind::Negate:
      return -eval(*node.lhs, vars);
    case Node::Kind::Add:
      return eval(*node.lhs, vars) + eval(*node.rhs, vars);
    case Node::Kind::Sub:
      return eval(*node.lhs, vars) - eval(*node.rhs, vars);
    case Node::Kind::Mul:
      return eval(*node.lhs, vars) * eval(*node.rhs, vars);
    case Node::Kind::Div: {
      const T den = eval(*node.rhs, vars);
      if (value_of(den) == 0.0) throw EvalError("division by zero", to_string(node));
      return eval(*node.lhs, vars) / den;
    }
    case Node::Kind::Power:
      return power_of(eval(*node.lhs, vars), node.exponent, node);
    case Node::Kind::Call:
      return apply(node.func, eval(*node.lhs, vars), node);
  }
  return constant_of<T>(0.0);
}

}  // namespace

FieldExpr parse_expression(std::string_view text, int n) {
  if (n < 1 || n > kMaxDim)
    throw Error("dimension must be between 1 and " + std::to_string(kMaxDim));
  Parser parser(text, n);
  return FieldExpr(parser.parse(), n, std::string(text));
}

double FieldExpr::value(std::span<const double> x) const {
  return eval<double>(*root_, x.first(dim_));
}

Jet FieldExpr::jet(std::span<const double> x) const {
  std::array<Jet, kMaxDim> vars;
  for (int i = 0; i < dim_; ++i) vars[i] = Jet::variable(x[i], i);
  return eval<Jet>(*root_, std::span<const Jet>(vars.data(), dim_));
}

std::string FieldExpr::to_string() const { return degenbill::to_string(*root_); }

FieldJet evaluate_jet(const FieldExpr& expr, const Vec& x) {
  const int n = expr.dim();
  if (x.size() != n) throw Error("evaluation point has wrong dimension");
  const Jet j = expr.jet(std::span<const double>(x.data(), n));
  FieldJet out;
  out.value = j.v;
  out.gradient.resize(n);
  out.hessian.resize(n, n);
  for (int i = 0; i < n; ++i) {
    out.gradient[i] = j.g[i];
    for (int k = 0; k < n; ++k) out.hessian(i, k) = j.h[i * kMaxDim + k];
  }
  return out;
}

}  // namespace degenbill
