#include <doctest.h>

#include <cmath>
#include <numbers>

#include "degenbill/billiard_map.hpp"
#include "degenbill/config.hpp"

using namespace degenbill;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_CASE("interior Hamiltonian") {
  const auto d = make_preset("disk");
  CHECK(hamiltonian(*d, make_interior(*d, v2(0.5, 0), v2(1, 0))) == doctest::Approx(0.375).epsilon(1e-15));
  CHECK(hamiltonian(*d, make_interior(*d, v2(0, 0), v2(1, 1))) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("Levi-Civita substitution") {
  auto [xi, eta] = levi_civita_forward(0.5, 2.0, 1);
  CHECK(xi == doctest::Approx(1.0));
  CHECK(eta == doctest::Approx(2.0));
  std::tie(xi, eta) = levi_civita_forward(0.5, 2.0, -1);
  CHECK(xi == doctest::Approx(-1.0));
  CHECK(eta == doctest::Approx(-2.0));
  const auto [r, pr] = levi_civita_back(-1.0, -2.0);
  CHECK(r == doctest::Approx(0.5));
  CHECK(pr == doctest::Approx(2.0));
  CHECK_THROWS_AS(levi_civita_forward(0.0, 1.0, 1), ChartError);
  CHECK_THROWS_AS(levi_civita_back(0.0, 1.0), ChartError);
  CollarCoeffs cc;
  cc.a = 1.0;
  cc.b = Vec::Zero(1);
  cc.c = Mat::Identity(1, 1);
  CHECK(collar_hamiltonian(cc, 0.0, 1.0, 2.0) == doctest::Approx(2.0));
}

TEST_CASE("chart round trip keeps the covector") {
  const auto d = make_preset("concave_quartic");
  const PhasePoint a = make_interior(*d, v2(0.8, 0.3), v2(0.4, -1.1));
  const PhasePoint c = to_collar(*d, a);
  CHECK(hamiltonian(*d, c) == doctest::Approx(hamiltonian(*d, a)).epsilon(1e-13));
  const PhasePoint b = to_interior(*d, c);
  CHECK((b.p - a.p).norm() < 1e-13);
  CHECK((cotangent(*d, c) - a.p).norm() < 1e-13);
}

TEST_CASE("radial launch on the disk") {
  const auto d = make_preset("disk");
  SectionPoint sp;
  sp.q = 0.0;
  sp.p = 0.0;
  const PhasePoint pt = launch(*d, sp);
  CHECK(pt.chart == Chart::Collar);
  CHECK(pt.alpha == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(pt.xi == 0.0);
  CHECK(hamiltonian(*d, pt) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("flight times on the disk") {
  const auto d = make_preset("disk");
  BilliardOptions bo;
  bo.tol = 1e-12;
  const double expected[][2] = {{2, 1.2825498301618640955},
                                {4, 0.74048048969306104117},
                                {8, 0.38670332378008601709},
                                {16, 0.19558701548000920142}};
  for (const auto& e : expected) {
    SectionPoint sp;
    sp.q = 0.4;
    sp.p = e[0];
    const BounceResult r = billiard_step(*d, sp, bo);
    CHECK(r.flight_time == doctest::Approx(e[1]).epsilon(1e-9));
    CHECK(r.eta_error < 1e-8);
    CHECK(r.energy_drift < 1e-10);
  }
}

TEST_CASE("forward then backward returns to the start") {
  const auto d = make_preset("separable_square");
  const PhasePoint a = make_interior(*d, v2(0.2, 0.1), v2(0.7, 1.3));
  FlowOptions fo;
  fo.tol = 1e-12;
  fo.t_end = 3.0;
  const Trajectory f = integrate(*d, a, fo);
  CHECK(f.events.size() > 0);
  fo.t_end = -3.0;
  const Trajectory b = integrate(*d, f.final, fo);
  const PhasePoint back = to_interior(*d, b.final);
  CHECK((back.x - a.x).norm() < 1e-8);
  CHECK((back.p - a.p).norm() < 1e-8);
}

TEST_CASE("time reversal") {
  const auto d = make_preset("disk");
  const PhasePoint a = make_interior(*d, v2(0.1, 0.2), v2(-0.3, 0.9));
  FlowOptions fo;
  fo.tol = 1e-12;
  fo.t_end = 2.0;
  const Trajectory f = integrate(*d, a, fo);
  const Trajectory b = integrate(*d, time_reversed(f.final), fo);
  const PhasePoint back = to_interior(*d, time_reversed(b.final));
  CHECK((back.x - a.x).norm() < 1e-8);
  CHECK((back.p - a.p).norm() < 1e-8);
}

TEST_CASE("the sheet flips at each crossing") {
  const auto d = make_preset("disk");
  SectionPoint sp;
  sp.q = 1.0;
  sp.p = 1.0;
  FlowOptions fo;
  fo.tol = 1e-12;
  fo.t_end = 10.0;
  const Trajectory tr = integrate(*d, launch(*d, sp), fo);
  int last = 0;
  int crossings = 0;
  for (const Event& e : tr.events) {
    if (e.type != Event::Type::Crossing) continue;
    ++crossings;
    if (last != 0) CHECK(e.section.sheet == -last);
    last = e.section.sheet;
    CHECK(e.eta_error < 1e-8);
  }
  CHECK(crossings >= 3);
  CHECK(tr.max_rel_drift < 1e-10);
}

TEST_CASE("internal tolerance") { CHECK(internal_tolerance(1e-10) == doctest::Approx(1e-12)); }
