#include <doctest.h>

#include <cmath>
#include <numbers>

#include "degenbill/config.hpp"

using namespace degenbill;

namespace {

constexpr double kPi = std::numbers::pi;

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_CASE("boundary lengths of the presets") {
  CHECK(make_preset("disk")->length() == doctest::Approx(2 * kPi).epsilon(1e-12));
  CHECK(make_preset("concave_quartic")->length() == doctest::Approx(5.8932263811134703921).epsilon(1e-10));
  CHECK(make_preset("separable_square")->length() == doctest::Approx(8.0).epsilon(1e-10));
  CHECK(make_preset("flat_cylinder")->length() == doctest::Approx(2 * kPi).epsilon(1e-12));
}

TEST_CASE("doubling phi halves the length") {
  DomainConfig c = preset_config("disk");
  c.phi = "(1 - x1^2 - x2^2)";
  CHECK(build_domain(c)->length() == doctest::Approx(kPi).epsilon(1e-12));
}

TEST_CASE("quartic boundary radius on the x1 axis") {
  const auto d = make_preset("concave_quartic");
  const Vec x = d->boundary_point(0.0).x;
  CHECK(x[0] == doctest::Approx(0.95712056873709283093).epsilon(1e-13));
  CHECK(std::abs(x[1]) < 1e-14);
  CHECK(std::abs(d->phi(x)) < 1e-14);
  // q of the x2 axis crossing is a quarter of the length by symmetry
  CHECK(d->q_of_point(d->boundary_point(kPi / 2).x) == doctest::Approx(1.473306595278367598).epsilon(1e-10));
}

TEST_CASE("arclength table is monotone and inverts") {
  const auto d = make_preset("concave_quartic");
  const ArclengthTable& t = d->arclength();
  double prev = -1.0;
  for (int i = 0; i <= 40; ++i) {
    const double th = 2 * kPi * i / 40.0;
    const double q = t.q_of_theta(th);
    CHECK(q > prev);
    prev = q;
    CHECK(t.theta_of_q(q) == doctest::Approx(th).epsilon(1e-12));
  }
  CHECK(t.q_of_theta(1.0 + 2 * kPi) == doctest::Approx(t.q_of_theta(1.0) + t.length()).epsilon(1e-13));
}

TEST_CASE("boundary metric") {
  const auto d = make_preset("disk");
  CHECK(boundary_metric(*d, v2(1, 0), v2(0, 1)) == doctest::Approx(1.0).epsilon(1e-14));
  DomainConfig c = preset_config("disk");
  c.phi = "(1 - x1^2 - x2^2)";
  CHECK(boundary_metric(*build_domain(c), v2(0, 1), v2(1, 0)) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK_THROWS_AS(boundary_metric(*d, v2(0.5, 0), v2(0, 1)), DomainError);
}

TEST_CASE("unit tangent in the boundary metric") {
  for (const char* name : {"disk", "concave_quartic", "separable_square"}) {
    const auto d = make_preset(name);
    for (double q : {0.1, 1.0, 2.5, 4.0}) {
      const Vec x = d->boundary_at_q(q);
      CHECK(boundary_metric(*d, x, d->tangent_at_q(q)) == doctest::Approx(1.0).epsilon(1e-8));
    }
  }
}

TEST_CASE("Gauss curvature") {
  const auto disk = make_preset("disk");
  CHECK(gauss_curvature(*disk, v2(0, 0)) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(gauss_curvature(*disk, v2(0.5, 0)) == doctest::Approx(-4.0 / 3.0).epsilon(1e-14));
  const auto quartic = make_preset("concave_quartic");
  CHECK(gauss_curvature(*quartic, v2(0.3, -0.2)) == doctest::Approx(-1.1803256940369769556).epsilon(1e-13));
}

TEST_CASE("sectional curvature agrees with Gauss curvature in two dimensions") {
  for (const char* name : {"disk", "concave_quartic", "separable_square"}) {
    const auto d = make_preset(name);
    for (const Vec& x : {v2(0.5, 0), v2(0.3, -0.2), v2(-0.1, 0.6)}) {
      CHECK(sectional_curvature(*d, x, v2(1, 0), v2(0, 1)) == doctest::Approx(gauss_curvature(*d, x)).epsilon(1e-12));
    }
  }
}

TEST_CASE("collar chart of the disk") {
  const auto d = make_preset("disk");
  const CollarChart ch(*d, 0.2);
  // the gradient lines are radial and phi = r, so |x| = sqrt(1 - 2 r)
  for (double r : {0.0, 0.01, 0.05}) {
    const Vec x = ch.chi(0.7, r);
    CHECK(x.norm() == doctest::Approx(std::sqrt(1 - 2 * r)).epsilon(1e-10));
    CHECK(std::atan2(x[1], x[0]) == doctest::Approx(0.7).epsilon(1e-10));
  }
  const CollarCoeffs cc = ch.coeffs(0.3, 0.1);
  CHECK(cc.a == doctest::Approx(0.8).epsilon(1e-8));
  CHECK(cc.c(0, 0) == doctest::Approx(1 / 0.8).epsilon(1e-8));
  CHECK(std::abs(cc.b[0]) < 1e-8);
  const auto [q, r] = ch.inverse(ch.chi(2.0, 0.02));
  CHECK(q == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(r == doctest::Approx(0.02).epsilon(1e-10));
  const CollarChart::Report rep = ch.validate();
  CHECK(rep.max_phi_error < 1e-9);
  CHECK(rep.max_roundtrip_error < 1e-9);
}

TEST_CASE("flat cylinder strip") {
  const auto d = make_preset("flat_cylinder");
  const Vec x = d->boundary_at_q(1.0);
  CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(x[1]) < 1e-14);
  CHECK(d->wrap_q(1.0 + 2 * kPi) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("metric must be positive definite") {
  const MetricField m = MetricField::diagonal({parse_expression("1", 2), parse_expression("x1", 2)});
  CHECK_NOTHROW(m.evaluate(v2(0.5, 0)));
  CHECK_THROWS_AS(m.evaluate(v2(-0.5, 0)), DomainError);
}
