#include <doctest.h>

#include <cmath>
#include <random>

#include "degenbill/field_dsl.hpp"

using namespace degenbill;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

double val(const std::string& s, const Vec& x) { return evaluate_jet(parse_expression(s, x.size()), x).value; }

}  // namespace

TEST_CASE("parse and evaluate the disk function") {
  const FieldJet j = evaluate_jet(parse_expression("0.5*(1 - x1^2 - x2^2)", 2), v2(0.5, 0.0));
  CHECK(j.value == doctest::Approx(0.375).epsilon(1e-15));
  CHECK(j.gradient[0] == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(j.gradient[1] == 0.0);
  CHECK(j.hessian(0, 0) == doctest::Approx(-1.0));
  CHECK(j.hessian(1, 1) == doctest::Approx(-1.0));
  CHECK(j.hessian(0, 1) == 0.0);
}

TEST_CASE("operator precedence") {
  CHECK(val("x1 + -x2", v2(0, 1)) == -1.0);
  CHECK(val("-x1^2", v2(3, 0)) == -9.0);
  CHECK(val("2^3^2", v2(0, 0)) == 64.0);  // (2^3)^2 with integer exponents applied left to right
  CHECK(val("8/4/2", v2(0, 0)) == 1.0);
  CHECK(val("1 - 2 - 3", v2(0, 0)) == -4.0);
  CHECK(val("2*pi", v2(0, 0)) == doctest::Approx(2 * M_PI));
  CHECK(val("x1^-2", v2(2, 0)) == 0.25);
  CHECK(val("x1^(-1)", v2(4, 0)) == 0.25);
}

TEST_CASE("functions and their derivatives at a point") {
  const FieldJet s = evaluate_jet(parse_expression("sin(x1)", 1), Vec::Zero(1));
  CHECK(s.value == 0.0);
  CHECK(s.gradient[0] == 1.0);
  CHECK(s.hessian(0, 0) == 0.0);
  CHECK(val("exp(log(x1))", v2(2.5, 0)) == doctest::Approx(2.5));
  CHECK(val("sqrt(x1^2 + x2^2)", v2(3, 4)) == doctest::Approx(5.0));
  CHECK(val("cos(pi)", v2(0, 0)) == doctest::Approx(-1.0));
}

TEST_CASE("parse errors") {
  CHECK_THROWS_AS(parse_expression("x3", 2), ParseError);
  CHECK_THROWS_WITH(parse_expression("x3", 2), doctest::Contains("out of range"));
  CHECK_THROWS_AS(parse_expression("", 2), ParseError);
  CHECK_THROWS_AS(parse_expression("foo(x1)", 2), ParseError);
  CHECK_THROWS_AS(parse_expression("x1^1.5", 2), ParseError);
  CHECK_THROWS_AS(parse_expression("(x1 + 1", 2), ParseError);
  try {
    parse_expression("x1 + * 2", 2);
    FAIL("no error");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 5);
  }
}

TEST_CASE("domain errors name the sub-expression") {
  CHECK_THROWS_AS(evaluate_jet(parse_expression("sqrt(x1)", 1), -Vec::Ones(1)), EvalError);
  CHECK_THROWS_AS(evaluate_jet(parse_expression("log(x1 - 1)", 1), Vec::Zero(1)), EvalError);
  try {
    evaluate_jet(parse_expression("1/(x1 - x2)", 2), v2(1, 1));
    FAIL("no error");
  } catch (const EvalError& e) {
    CHECK(e.subexpression().find("x1") != std::string::npos);
  }
}

TEST_CASE("print then parse gives the same tree") {
  for (const char* s : {"0.5*(1 - x1^2 - x2^2)", "x1 + -x2", "sin(x1)*exp(-x2^2)/(1 + x1^2)",
                        "(1 - x1^2)*(1 - x2^2)/(2*(2 - x1^2 - x2^2))", "-(x1^3) + 0.1*pi*cos(x2)^2", "1e-3*x1"}) {
    const FieldExpr a = parse_expression(s, 2);
    const FieldExpr b = parse_expression(a.to_string(), 2);
    CHECK(a == b);
    CHECK(b.to_string() == a.to_string());
  }
}

TEST_CASE("jets agree with central differences on random polynomials") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> e(0, 3);
  for (int trial = 0; trial < 20; ++trial) {
    std::string s;
    for (int t = 0; t < 5; ++t) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "%s%.6f*x1^%d*x2^%d*x3^%d", t ? " + " : "", u(rng), e(rng), e(rng), e(rng));
      s += buf;
    }
    s += " + sin(x1*x2) + exp(0.3*x3)";
    const FieldExpr f = parse_expression(s, 3);
    Vec x(3);
    x << u(rng), u(rng), u(rng);
    const FieldJet j = evaluate_jet(f, x);
    const double h = 1e-5;
    for (int i = 0; i < 3; ++i) {
      Vec xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      const FieldJet jp = evaluate_jet(f, xp), jm = evaluate_jet(f, xm);
      const double g = (jp.value - jm.value) / (2 * h);
      CHECK(std::abs(g - j.gradient[i]) <= 1e-6 * std::max(1.0, std::abs(j.gradient[i])));
      for (int k = 0; k < 3; ++k) {
        const double hk = (jp.gradient[k] - jm.gradient[k]) / (2 * h);
        CHECK(std::abs(hk - j.hessian(i, k)) <= 1e-6 * std::max(1.0, std::abs(j.hessian(i, k))));
      }
    }
    CHECK((j.hessian - j.hessian.transpose()).norm() == 0.0);
  }
}
