#include "degenbill/billiard_map.hpp"

#include <cmath>

#include <Eigen/QR>

namespace degenbill {

double periodic_diff(double a, double b, double L) {
  double d = std::fmod(a - b, L);
  if (d > 0.5 * L) d -= L;
  if (d <= -0.5 * L) d += L;
  return d;
}

BounceResult billiard_step(const Domain& d, const SectionPoint& sp, const BilliardOptions& opts) {
  if (!d.has_boundary()) throw FlowError("the billiard map requires n = 2");
  const PhasePoint start = launch(d, sp);
  FlowOptions o;
  o.tol = opts.tol;
  o.t_end = opts.max_time / std::sqrt(sp.h);
  o.stop_at_crossing = true;
  o.record_samples = false;
  Trajectory tr;
  try {
    tr = integrate(d, start, o);
  } catch (const FlowError& e) {
    throw TrappedOrbit(std::string("no return to the boundary: ") + e.what());
  }
  if (!tr.crossed)
    throw TrappedOrbit("no return within max time " + std::to_string(opts.max_time) + " (possibly trapped)");
  const Event& ev = tr.events.back();
  BounceResult r;
  r.out = ev.section;
  r.out.h = sp.h;
  r.flight_time = ev.t;
  r.flight_length = 2.0 * std::sqrt(sp.h) * ev.t;
  r.dq = ev.q_lifted - d.arclength().q_of_theta(tr.theta_start);
  r.action = tr.action;
  r.eta_error = ev.eta_error;
  r.xi_dot = std::abs(ev.xi_dot);
  r.energy_drift = tr.max_rel_drift;
  return r;
}

BilliardOrbit billiard_orbit(const Domain& d, const SectionPoint& sp, int m, const BilliardOptions& opts) {
  if (m < 1) throw Error("bounce count must be at least 1");
  BilliardOrbit orb;
  SectionPoint cur = sp;
  cur.q = d.wrap_q(cur.q);
  orb.points.push_back(cur);
  for (int i = 0; i < m; ++i) {
    try {
      const BounceResult r = billiard_step(d, cur, opts);
      cur = r.out;
      orb.points.push_back(cur);
      orb.flight_lengths.push_back(r.flight_length);
      orb.dq.push_back(r.dq);
    } catch (const TrappedOrbit& e) {
      orb.trapped = true;
      orb.message = e.what();
      break;
    }
  }
  return orb;
}

Eigen::Matrix2d jacobian(const Domain& d, const SectionPoint& sp, double delta, const BilliardOptions& opts) {
  auto image = [&](double q, double p) {
    SectionPoint s = sp;
    s.q = q;
    s.p = p;
    const BounceResult r = billiard_step(d, s, opts);
    return Eigen::Vector2d(q + r.dq, r.out.p);
  };
  const double L = d.length();
  auto diff = [&](const Eigen::Vector2d& a, const Eigen::Vector2d& b) -> Eigen::Vector2d {
    return Eigen::Vector2d(periodic_diff(a[0], b[0], L), a[1] - b[1]) / (2.0 * delta);
  };
  Eigen::Matrix2d J;
  J.col(0) = diff(image(sp.q + delta, sp.p), image(sp.q - delta, sp.p));
  J.col(1) = diff(image(sp.q, sp.p + delta), image(sp.q, sp.p - delta));
  return J;
}

double reversibility_defect(const Domain& d, const SectionPoint& sp, const BilliardOptions& opts) {
  const double L = d.length();
  const BounceResult a = billiard_step(d, sp, opts);
  SectionPoint back = a.out;
  back.p = -back.p;
  const BounceResult b = billiard_step(d, back, opts);
  const double dq = periodic_diff(b.out.q, sp.q, L);
  const double dp = -b.out.p - sp.p;
  return std::max(std::abs(dq), std::abs(dp));
}

TwoPeriodicResult find_two_periodic(const Domain& d, double q1, double q2, double tol,
                                    const BilliardOptions& opts) {
  const double L = d.length();
  auto shoot = [&](double q) {
    SectionPoint s;
    s.q = q;
    s.p = 0.0;
    s.h = 1.0;
    const BounceResult r = billiard_step(d, s, opts);
    return std::pair<double, double>{r.dq, r.out.p};
  };
  auto residual = [&](double a, double b) {
    const auto [da, pa] = shoot(a);
    const auto [db, pb] = shoot(b);
    Eigen::Vector4d r;
    r << periodic_diff(a + da, b, L), pa, periodic_diff(b + db, a, L), pb;
    return r;
  };
  const double h = 1e-6;
  double a = q1, b = q2;
  Eigen::Vector4d r;
  try {
    r = residual(a, b);
  } catch (const TrappedOrbit& e) {
    throw NewtonDivergence(std::string("shooting failed at the initial guess: ") + e.what(), INFINITY);
  }
  double best = r.norm();
  int it = 0;
  for (; it < 40 && r.norm() >= tol; ++it) {
    Eigen::Matrix<double, 4, 2> J;
    const auto [dap, pap] = shoot(a + h);
    const auto [dam, pam] = shoot(a - h);
    const auto [dbp, pbp] = shoot(b + h);
    const auto [dbm, pbm] = shoot(b - h);
    // lifted advances are ambiguous by L for chords through the star center
    const double dqa = periodic_diff(dap + 2 * h, dam, L) / (2 * h) - 1.0, dpa = (pap - pam) / (2 * h);
    const double dqb = periodic_diff(dbp + 2 * h, dbm, L) / (2 * h) - 1.0, dpb = (pbp - pbm) / (2 * h);
    J << 1.0 + dqa, -1.0, dpa, 0.0, -1.0, 1.0 + dqb, 0.0, dpb;
    const Eigen::Vector2d step = Eigen::CompleteOrthogonalDecomposition<Eigen::Matrix<double, 4, 2>>(J).solve(-r);
    double lam = 1.0;
    bool improved = false;
    for (int ls = 0; ls < 12; ++ls) {
      try {
        const Eigen::Vector4d rn = residual(a + lam * step[0], b + lam * step[1]);
        if (rn.norm() < r.norm() || rn.norm() < tol) {
          a += lam * step[0];
          b += lam * step[1];
          r = rn;
          improved = true;
          break;
        }
      } catch (const TrappedOrbit&) {
      }
      lam *= 0.5;
    }
    best = std::min(best, r.norm());
    if (!improved) throw NewtonDivergence("two-periodic shooting stalled", best);
  }
  if (r.norm() >= tol) throw NewtonDivergence("two-periodic shooting did not converge", best);
  TwoPeriodicResult res;
  res.q1 = d.wrap_q(a);
  res.q2 = d.wrap_q(b);
  res.residual = r.norm();
  res.iterations = it;
  SectionPoint s;
  s.q = res.q1;
  s.p = 0.0;
  res.orbit = billiard_orbit(d, s, 2, opts);
  return res;
}

}  // namespace degenbill
