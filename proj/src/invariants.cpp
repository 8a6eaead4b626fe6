#include "degenbill/invariants.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "degenbill/parallel.hpp"

namespace degenbill {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// End point of the orthogonal geodesic from q after time t (h = 1, so s = t^2).
Vec geodesic_point(const Domain& d, double q, double t, double tol) {
  SectionPoint sp;
  sp.q = q;
  sp.p = 0.0;
  FlowOptions fo;
  fo.tol = tol;
  fo.t_end = t;
  fo.record_samples = false;
  return project_to_base(integrate(d, launch(d, sp), fo).final);
}

}  // namespace

RotationNumber rotation_number(const BilliardOrbit& orbit, double L) {
  const int n = static_cast<int>(orbit.dq.size());
  if (n < 100) throw InvariantError("rotation number needs at least 100 bounces, got " + std::to_string(n));
  double total = 0.0;
  for (double v : orbit.dq) total += v;
  RotationNumber r;
  r.value = total / (n * L);
  const int blocks = 10, len = n / blocks;
  std::vector<double> m(blocks, 0.0);
  for (int b = 0; b < blocks; ++b) {
    for (int i = b * len; i < (b + 1) * len; ++i) m[b] += orbit.dq[i];
    m[b] /= len * L;
  }
  double mean = 0.0, var = 0.0;
  for (double v : m) mean += v / blocks;
  for (double v : m) var += (v - mean) * (v - mean) / blocks;
  r.spread = std::sqrt(var);
  return r;
}

double InvariantCircleFit::series(double q) const {
  double v = a[0];
  for (int j = 1; j <= modes; ++j) {
    const double w = kTwoPi * j * q / L;
    v += a[j] * std::cos(w) + b[j] * std::sin(w);
  }
  return v;
}

InvariantCircleFit fit_invariant_circle(const Domain& d, const NormalFormData& nf, double eps, int orbit_len,
                                        const BilliardOptions& opts, const FitOptions& fo) {
  if (!d.has_boundary()) throw InvariantError("invariant circles are implemented for n = 2 only");
  if (!(eps > 0.0)) throw InvariantError("epsilon must be positive");
  const int M = fo.modes;
  if (orbit_len < 2 * M + 2) throw InvariantError("orbit too short for the Fourier fit");
  const double L = d.length();

  SectionPoint sp;
  sp.q = fo.q0;
  sp.p = 1.0 / eps;
  const BilliardOrbit orb = billiard_orbit(d, sp, orbit_len, opts);
  if (orb.trapped) throw InvariantError("orbit escapes the collar regime: " + orb.message);

  InvariantCircleFit fit;
  fit.epsilon = eps;
  fit.q0 = fo.q0;
  fit.modes = M;
  fit.L = L;
  fit.orbit_len = orbit_len;
  fit.min_p = INFINITY;
  const int n = static_cast<int>(orb.points.size());
  std::vector<double> qs(n), ys(n);
  for (int i = 0; i < n; ++i) {
    fit.min_p = std::min(fit.min_p, orb.points[i].p);
    qs[i] = d.wrap_q(orb.points[i].q);
    ys[i] = 1.0 / orb.points[i].p;
  }
  if (!(fit.min_p > 0.0)) throw InvariantError("orbit reached p <= 0; not a graph over the boundary");

  std::vector<double> sorted = qs;
  std::sort(sorted.begin(), sorted.end());
  double gap = sorted.front() + L - sorted.back();
  for (int i = 1; i < n; ++i) gap = std::max(gap, sorted[i] - sorted[i - 1]);
  if (gap > L / (4.0 * M))
    throw ResonanceError("q samples cluster (largest gap " + std::to_string(gap) + "); launch looks resonant");

  Eigen::MatrixXd V(n, 2 * M + 1);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    V(i, 0) = 1.0;
    for (int j = 1; j <= M; ++j) {
      const double w = kTwoPi * j * qs[i] / L;
      V(i, 2 * j - 1) = std::cos(w);
      V(i, 2 * j) = std::sin(w);
    }
    y[i] = ys[i];
  }
  const Eigen::VectorXd c = V.colPivHouseholderQr().solve(y);
  fit.a.assign(M + 1, 0.0);
  fit.b.assign(M + 1, 0.0);
  fit.a[0] = c[0];
  for (int j = 1; j <= M; ++j) {
    fit.a[j] = c[2 * j - 1];
    fit.b[j] = c[2 * j];
  }
  for (int i = 1; i < n; ++i) fit.residual = std::max(fit.residual, std::abs(ys[i] - fit.series(qs[i])));

  // circle parameter e from the mean: a0 = e + (3/8) kbar e^3
  const double kbar = nf.k.integral() / nf.L;
  double e = fit.a[0];
  for (int it = 0; it < 50; ++it) {
    const double r = e + 0.375 * kbar * e * e * e - fit.a[0];
    const double step = r / (1.0 + 1.125 * kbar * e * e);
    e -= step;
    if (std::abs(step) < 1e-17 * std::abs(e)) break;
  }
  fit.epsilon_circle = e;
  const int grid = 1024;
  for (int i = 0; i < grid; ++i) {
    const double q = L * i / grid;
    fit.deviation = std::max(fit.deviation, std::abs(fit.series(q) - e - 0.375 * nf.k(q) * e * e * e));
  }
  if (orbit_len >= 100) {
    const RotationNumber rn = rotation_number(orb, L);
    fit.rotation_number = rn.value;
    fit.rotation_spread = rn.spread;
  }
  return fit;
}

std::vector<CausticPoint> caustic_curve(const Domain& d, double eps, int m_points, double tol, int workers) {
  if (!d.has_boundary()) throw InvariantError("caustics are implemented for n = 2 only");
  if (!(eps > 0.0) || m_points < 3) throw InvariantError("caustic needs eps > 0 and at least 3 points");
  const double L = d.length();
  return parallel_map<CausticPoint>(
      m_points,
      [&](int i) {
        CausticPoint c;
        c.q = L * i / m_points;
        c.x = geodesic_point(d, c.q, 0.5 * eps, tol);
        if (d.phi(c.x) > d.collar_threshold())
          throw InvariantError("caustic depth eps = " + std::to_string(eps) + " lies outside the collar");
        return c;
      },
      workers);
}

std::pair<double, double> semigeodesic_inverse(const Domain& d, const Vec& x, double tol) {
  const CollarChart chart(d, d.collar_threshold());
  auto [q, r] = chart.inverse(x);
  if (!(r > 0.0)) throw InvariantError("point is not inside the domain");
  double t = std::sqrt(r);
  const double dq = 1e-5;
  for (int it = 0; it < 20; ++it) {
    const Vec f = geodesic_point(d, q, t, tol) - x;
    if (f.norm() < 1e-13) break;
    const double dt = 1e-5 * t;
    Eigen::Matrix2d J;
    J.col(0) = (geodesic_point(d, q + dq, t, tol) - geodesic_point(d, q - dq, t, tol)) / (2 * dq);
    J.col(1) = (geodesic_point(d, q, t + dt, tol) - geodesic_point(d, q, t - dt, tol)) / (2 * dt);
    const Eigen::Vector2d step = J.partialPivLu().solve(Eigen::Vector2d(f[0], f[1]));
    q -= step[0];
    t -= step[1];
    if (!(t > 0.0)) throw InvariantError("semigeodesic inverse left the collar");
    if (step.norm() < 1e-14) break;
  }
  return {d.wrap_q(q), t * t};
}

TangencyReport caustic_tangency(const Domain& d, const InvariantCircleFit& fit, int flights,
                                const BilliardOptions& opts) {
  TangencyReport rep;
  rep.target_rho = 2.0 * fit.epsilon;
  SectionPoint sp;
  sp.q = fit.q0;
  sp.p = 1.0 / fit.epsilon;
  double ratio_sum = 0.0;
  for (int f = 0; f < flights; ++f) {
    FlowOptions fo;
    fo.tol = opts.tol;
    fo.t_end = opts.max_time / std::sqrt(sp.h);
    fo.stop_at_crossing = true;
    fo.locate_turning = true;
    fo.record_samples = false;
    const Trajectory tr = integrate(d, launch(d, sp), fo);
    if (!tr.crossed) throw TrappedOrbit("flight did not return to the boundary");
    double rho = 0.0;
    for (const Event& ev : tr.events)
      if (ev.type == Event::Type::Turning)
        rho = std::max(rho, 2.0 * std::sqrt(semigeodesic_inverse(d, project_to_base(ev.point)).second));
    ++rep.flights;
    ratio_sum += rho / fit.epsilon;
    if (std::abs(rho - rep.target_rho) <= 0.05 * rep.target_rho) ++rep.within;
    sp = tr.events.back().section;
  }
  rep.mean_ratio = rep.flights ? ratio_sum / rep.flights : 0.0;
  return rep;
}

ActionVariables action_variables(const Domain& d, const InvariantCircleFit& fit, const BilliardOptions& opts) {
  ActionVariables av;
  const int grid = 2048;
  double s = 0.0;
  for (int i = 0; i < grid; ++i) {
    const double v = fit.series(fit.L * i / grid);
    if (!(v > 0.0)) throw InvariantError("fitted circle is not a graph with p > 0");
    s += 1.0 / v;
  }
  av.I2 = s * fit.L / grid;
  SectionPoint sp;
  sp.q = fit.q0;
  sp.p = 1.0 / fit.series(fit.q0);
  av.I1 = billiard_step(d, sp, opts).action;
  return av;
}

double noether_drift(const Domain& d, const Trajectory& tr) {
  if (!d.flags().so_invariant) throw InvariantError("domain is not flagged rotation invariant");
  const int n = d.dim();
  auto momenta = [&](const PhasePoint& pt) {
    std::vector<double> out;
    Vec px = pt.p;
    Vec nu_hat = Vec::Zero(n);
    double coef = 0.0;
    if (pt.chart == Chart::Collar && pt.xi != 0.0) {
      const Vec nu = d.phi_jet(pt.x).gradient;
      const MetricEval m = d.metric().evaluate(pt.x);
      nu_hat = nu / std::sqrt(nu.dot(m.Ainv * nu));
      coef = pt.alpha / pt.xi;
    }
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        out.push_back(pt.x[i] * px[j] - pt.x[j] * px[i] + coef * (pt.x[i] * nu_hat[j] - pt.x[j] * nu_hat[i]));
    return out;
  };
  std::vector<const PhasePoint*> pts;
  for (const Sample& s : tr.samples) pts.push_back(&s.point);
  pts.push_back(&tr.final);
  const std::vector<double> ref = momenta(*pts.front());
  double drift = 0.0;
  for (const PhasePoint* p : pts) {
    const auto v = momenta(*p);
    for (std::size_t k = 0; k < v.size(); ++k) drift = std::max(drift, std::abs(v[k] - ref[k]));
  }
  return drift;
}

double liouville_integral(const Domain& d, const Vec& x, const Vec& p) {
  const auto& f = d.flags().separable;
  if (f.size() != 2) throw InvariantError("Liouville integral needs a separable domain with n = 2");
  const std::span<const double> xs(x.data(), x.size());
  const double c1 = 1.0 / f[0].value(xs), c2 = 1.0 / f[1].value(xs);
  return (c2 * p[0] * p[0] - c1 * p[1] * p[1]) / (c1 + c2);
}

LiouvilleReport liouville_integral_drift(const Domain& d, const Trajectory& tr, double corner_margin) {
  const auto& f = d.flags().separable;
  if (f.size() != 2 || d.dim() != 2) throw InvariantError("domain is not flagged separable");
  LiouvilleReport rep;
  bool have_ref = false;
  double ref = 0.0;
  auto consider = [&](const PhasePoint& pt) {
    if (pt.chart == Chart::Collar) {
      ++rep.skipped_collar;
      return;
    }
    const std::span<const double> xs(pt.x.data(), pt.x.size());
    if (std::min(f[0].value(xs), f[1].value(xs)) < corner_margin) {
      ++rep.skipped_corner;
      rep.corner_proximity = true;
      return;
    }
    const double F = liouville_integral(d, pt.x, pt.p);
    if (!have_ref) {
      ref = F;
      have_ref = true;
    }
    rep.drift = std::max(rep.drift, std::abs(F - ref));
    ++rep.used;
  };
  for (const Sample& s : tr.samples) consider(s.point);
  consider(tr.final);
  return rep;
}

}  // namespace degenbill
