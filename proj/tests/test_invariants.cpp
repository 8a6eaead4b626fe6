#include <doctest.h>

#include <cmath>
#include <numbers>

#include "degenbill/config.hpp"
#include "degenbill/invariants.hpp"

using namespace degenbill;

namespace {

constexpr double kPi = std::numbers::pi;

SectionPoint at(double q, double p) {
  SectionPoint s;
  s.q = q;
  s.p = p;
  return s;
}

BilliardOptions tight() {
  BilliardOptions bo;
  bo.tol = 1e-12;
  return bo;
}

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_CASE("rotation numbers") {
  const auto flat = make_preset("flat_cylinder");
  const RotationNumber r = rotation_number(billiard_orbit(*flat, at(0.0, 2.0), 120, tight()), flat->length());
  CHECK(r.value == doctest::Approx(0.125).epsilon(1e-11));
  CHECK(r.spread < 1e-11);
  const auto disk = make_preset("disk");
  const RotationNumber rd = rotation_number(billiard_orbit(*disk, at(0.0, 8.0), 100, tight()), disk->length());
  CHECK(rd.value == doctest::Approx(0.047966063349105101724 / (2 * kPi)).epsilon(1e-8));
  CHECK_THROWS_AS(rotation_number(billiard_orbit(*disk, at(0.0, 8.0), 10, tight()), 2 * kPi), InvariantError);
}

TEST_CASE("caustic of the disk is a circle") {
  const auto disk = make_preset("disk");
  const double expected[][2] = {
      {0.05, 0.99937506510145405354}, {0.1, 0.99750104149307105541}, {0.2, 0.99001665555952292672}};
  for (const auto& e : expected) {
    const auto pts = caustic_curve(*disk, e[0], 12, 1e-12, 1);
    REQUIRE(pts.size() == 12);
    for (const CausticPoint& c : pts) CHECK(c.x.norm() == doctest::Approx(e[1]).epsilon(1e-9));
  }
  CHECK_THROWS_AS(caustic_curve(*disk, 2.0, 12, 1e-12, 1), InvariantError);
}

TEST_CASE("semigeodesic inverse") {
  const auto disk = make_preset("disk");
  // s = t^2 with rho = 2 t, so rho = 0.1 gives s = 0.0025
  const auto [q, s] = semigeodesic_inverse(*disk, 0.99750104149307105541 * v2(std::cos(1.0), std::sin(1.0)));
  CHECK(q == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(s == doctest::Approx(0.0025).epsilon(1e-8));
}

TEST_CASE("flat cylinder invariant circle and actions") {
  const auto flat = make_preset("flat_cylinder");
  const NormalFormData nf = constant_jets(flat->length(), 0.0);
  const double eps = 0.3;
  FitOptions fo;
  fo.modes = 4;
  const InvariantCircleFit fit = fit_invariant_circle(*flat, nf, eps, 400, tight(), fo);
  CHECK(fit.a[0] == doctest::Approx(eps).epsilon(1e-11));
  CHECK(fit.epsilon_circle == doctest::Approx(eps).epsilon(1e-11));
  CHECK(fit.deviation < 1e-10);
  CHECK(fit.rotation_number == doctest::Approx(kPi * eps * eps / (2 * kPi)).epsilon(1e-10));
  const ActionVariables av = action_variables(*flat, fit, tight());
  CHECK(av.I2 == doctest::Approx(flat->length() / eps).epsilon(1e-10));
  CHECK(av.I1 == doctest::Approx(kPi * eps).epsilon(1e-9));
}

TEST_CASE("disk single-flight action") {
  const auto disk = make_preset("disk");
  const BounceResult r = billiard_step(*disk, at(0.0, 10.0), tight());
  CHECK(r.action / (kPi * 0.1) == doctest::Approx(0.995049383620779).epsilon(1e-9));
}

TEST_CASE("resonant launches are refused") {
  const auto flat = make_preset("flat_cylinder");
  const NormalFormData nf = constant_jets(flat->length(), 0.0);
  CHECK_THROWS_AS(fit_invariant_circle(*flat, nf, 0.5, 200, tight()), ResonanceError);
}

TEST_CASE("Noether momentum") {
  const auto disk = make_preset("disk");
  FlowOptions fo;
  fo.tol = 1e-12;
  fo.t_end = 20.0;
  const Trajectory tr = integrate(*disk, make_interior(*disk, v2(0.2, 0.1), v2(0.7, 1.3)), fo);
  CHECK(noether_drift(*disk, tr) < 1e-9);
  const auto quartic = make_preset("concave_quartic");
  const Trajectory tq = integrate(*quartic, make_interior(*quartic, v2(0.2, 0.1), v2(0.7, 1.3)), fo);
  CHECK_THROWS_AS(noether_drift(*quartic, tq), InvariantError);
}

TEST_CASE("Liouville integral on the separable square") {
  const auto sq = make_preset("separable_square");
  FlowOptions fo;
  fo.tol = 1e-12;
  fo.t_end = 20.0;
  const Trajectory tr = integrate(*sq, make_interior(*sq, v2(0.2, 0.1), v2(0.7, 1.3)), fo);
  const LiouvilleReport rep = liouville_integral_drift(*sq, tr);
  CHECK(rep.used > 10);
  CHECK(rep.drift < 1e-8);
  // F at a point against the closed form with chi_i = 2 / (1 - x_i^2)
  const double c1 = 2 / (1 - 0.04), c2 = 2 / (1 - 0.01);
  CHECK(liouville_integral(*sq, v2(0.2, 0.1), v2(0.7, 1.3)) ==
        doctest::Approx((c2 * 0.49 - c1 * 1.69) / (c1 + c2)).epsilon(1e-14));
  CHECK_THROWS_AS(liouville_integral_drift(*make_preset("disk"), tr), InvariantError);
}
