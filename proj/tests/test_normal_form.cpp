#include <doctest.h>

#include <cmath>
#include <numbers>

#include "degenbill/config.hpp"
#include "degenbill/normal_form.hpp"

using namespace degenbill;

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

TEST_CASE("periodic spline") {
  std::vector<double> y(64);
  for (int i = 0; i < 64; ++i) y[i] = std::sin(2 * kPi * i / 64.0) + 2.0;
  const PeriodicSpline s(y, 2 * kPi);
  for (double q : {0.05, 1.3, 4.4, 6.2}) {
    CHECK(s(q) == doctest::Approx(std::sin(q) + 2.0).epsilon(1e-6));
    CHECK(s.derivative(q) == doctest::Approx(std::cos(q)).epsilon(1e-4));
  }
  CHECK(s(0.3 + 2 * kPi) == doctest::Approx(s(0.3)).epsilon(1e-14));
  CHECK(s(-0.3) == doctest::Approx(s(2 * kPi - 0.3)).epsilon(1e-14));
  CHECK(s.integral() == doctest::Approx(4 * kPi).epsilon(1e-12));
}

TEST_CASE("averaged Hamiltonian values") {
  const NormalFormData flat = constant_jets(2 * kPi, 0.0);
  CHECK(averaged_hamiltonian(flat, 1.0, 2.0) == doctest::Approx(-0.5));
  const NormalFormData disk = constant_jets(2 * kPi, 4.0 / 3.0);
  CHECK(averaged_hamiltonian(disk, 1.0, 2.0) == doctest::Approx(-0.4375));
  CHECK(averaged_hamiltonian(disk, 1.0, -2.0) == doctest::Approx(-0.4375));
  CHECK(disk.K0(0.3, 3.0) == 9.0);
  CHECK(disk.K1(0.3, 3.0) == doctest::Approx(12.0));
}

TEST_CASE("flow of N on the flat cylinder") {
  const NormalFormData flat = constant_jets(2 * kPi, 0.0);
  const auto [q, p] = flow_N(flat, 0.0, 2.0, kPi, 1e-13);
  CHECK(q == doctest::Approx(kPi / 4).epsilon(1e-12));
  CHECK(p == 2.0);
}

TEST_CASE("model map") {
  Vec q = Vec::Zero(1), p(1);
  p << 2.0;
  const Mat C = Mat::Identity(1, 1);
  const auto [q1, p1] = model_map(q, p, 1.0, C);
  CHECK(q1[0] == doctest::Approx(kPi / 4));
  CHECK(p1[0] == 2.0);
  Vec q2 = Vec::Zero(2), p2(2);
  p2 << 3.0, 4.0;
  Mat C2 = Mat::Identity(2, 2);
  C2(1, 1) = 0.25;
  const auto [qa, pa] = model_map(q2, p2, 2.0, C2);
  // <Cp, p> = 13
  CHECK(qa[0] == doctest::Approx(kPi * 2.0 * std::pow(13.0, -1.5) * 3.0));
  CHECK(qa[1] == doctest::Approx(kPi * 2.0 * std::pow(13.0, -1.5) * 1.0));
}

TEST_CASE("cycloid") {
  Vec q0 = Vec::Zero(1), p(1);
  p << 2.0;
  const Mat C = Mat::Identity(1, 1);
  const CycloidState top = cycloid_state(0.0, q0, p, 1.0, C);
  CHECK(top.s == doctest::Approx(0.25));
  CHECK(top.p_s == 0.0);
  CHECK(top.q[0] == 0.0);
  const double t = 0.3;
  const CycloidState a = cycloid_state(t, q0, p, 1.0, C), b = cycloid_state(-t, q0, p, 1.0, C);
  CHECK(a.s == doctest::Approx(b.s));
  CHECK(a.q[0] == doctest::Approx(-b.q[0]));
  CHECK(a.q[0] == doctest::Approx(0.25 * (t + std::sin(4 * t) / 4) * 2.0));
  // energy p_s^2 s + p^2 s = h
  CHECK(a.p_s * a.p_s * a.s + 4.0 * a.s == doctest::Approx(1.0));
  const CycloidState end = cycloid_state(kPi / 4 - 1e-9, q0, p, 1.0, C);
  // twice the half flight is the model map advance
  CHECK(2 * end.q[0] == doctest::Approx(kPi / 4).epsilon(1e-8));
  CHECK_THROWS_AS(cycloid_state(1.0, q0, p, 1.0, C), NormalFormError);
}

TEST_CASE("disk jets give constant curvature 4/3") {
  const auto d = make_preset("disk");
  JetOptions jo;
  jo.samples = 16;
  const NormalFormData nf = estimate_boundary_jets(*d, jo);
  CHECK(nf.L == doctest::Approx(2 * kPi).epsilon(1e-12));
  for (double k : nf.k_values) CHECK(k == doctest::Approx(4.0 / 3.0).epsilon(1e-4));
  for (double b0 : nf.b0_values) CHECK(b0 == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(nf.s_consistency < 1e-6);
}

TEST_CASE("flat cylinder jets vanish") {
  const auto d = make_preset("flat_cylinder");
  JetOptions jo;
  jo.samples = 8;
  const NormalFormData nf = estimate_boundary_jets(*d, jo);
  for (double k : nf.k_values) CHECK(std::abs(k) < 1e-6);
}

TEST_CASE("log-log slope") {
  CHECK(loglog_slope({1, 2, 4, 8}, {1, 0.25, 0.0625, 0.015625}) == doctest::Approx(-2.0));
  CHECK_THROWS(loglog_slope({1}, {1}));
}
