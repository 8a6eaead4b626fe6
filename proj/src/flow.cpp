#include "degenbill/flow.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/tools/roots.hpp>

#include "degenbill/ode.hpp"

namespace degenbill {

namespace {

struct Frame {
  double phi = 0.0;
  Vec nu;
  Mat hess;
  MetricEval m;
  double N = 0.0;
  Vec nuhat;
  Vec mv;  // A^-1 nu
  Vec u;   // A^-1 nu / N
};

Frame frame_at(const Domain& d, const Vec& x) {
  Frame f;
  const FieldJet j = d.phi_jet(x);
  f.phi = j.value;
  f.nu = j.gradient;
  f.hess = j.hessian;
  f.m = d.metric().evaluate(x);
  f.mv = f.m.Ainv * f.nu;
  const double n2 = f.nu.dot(f.mv);
  if (!(n2 > 0.0)) throw FlowError("gradient of phi vanishes along the trajectory");
  f.N = std::sqrt(n2);
  f.nuhat = f.nu / f.N;
  f.u = f.mv / f.N;
  return f;
}

// d(M)/dx_k applied as a bilinear form: a^T dM_k b = -(M a)^T dA_k (M b)
double dM_form(const Frame& f, int k, const Vec& Ma, const Vec& Mb) {
  return -Ma.dot(f.m.dA[k] * Mb);
}

int sign_of(double v) { return v < 0.0 ? -1 : 1; }

// State layouts
//   interior: x[0..n), p[n..2n), action[2n]
//   collar:   x[0..n), xi[n], alpha[n+1], w[n+2..2n+2), action[2n+2]
int state_dim(Chart c, int n) { return c == Chart::Interior ? 2 * n + 1 : 2 * n + 3; }

State pack(const PhasePoint& pt, double action) {
  State s{};
  const int n = static_cast<int>(pt.x.size());
  for (int i = 0; i < n; ++i) s[i] = pt.x[i];
  if (pt.chart == Chart::Interior) {
    for (int i = 0; i < n; ++i) s[n + i] = pt.p[i];
    s[2 * n] = action;
  } else {
    s[n] = pt.xi;
    s[n + 1] = pt.alpha;
    for (int i = 0; i < n; ++i) s[n + 2 + i] = pt.p[i];
    s[2 * n + 2] = action;
  }
  return s;
}

PhasePoint unpack(const State& s, Chart c, int n, int sheet, double h, double* action) {
  PhasePoint pt;
  pt.chart = c;
  pt.x = Vec(n);
  pt.p = Vec(n);
  pt.h = h;
  for (int i = 0; i < n; ++i) pt.x[i] = s[i];
  if (c == Chart::Interior) {
    for (int i = 0; i < n; ++i) pt.p[i] = s[n + i];
    pt.sheet = sheet;
    if (action) *action = s[2 * n];
  } else {
    pt.xi = s[n];
    pt.alpha = s[n + 1];
    for (int i = 0; i < n; ++i) pt.p[i] = s[n + 2 + i];
    pt.sheet = pt.xi != 0.0 ? sign_of(pt.xi) : sign_of(pt.alpha);
    if (action) *action = s[2 * n + 2];
  }
  return pt;
}

void interior_rhs(const Domain& d, int n, const State& s, State& ds) {
  Vec x(n), p(n);
  for (int i = 0; i < n; ++i) {
    x[i] = s[i];
    p[i] = s[n + i];
  }
  const Frame f = frame_at(d, x);
  const Vec Mp = f.m.Ainv * p;
  const double pMp = p.dot(Mp);
  ds.fill(0.0);
  for (int i = 0; i < n; ++i) {
    ds[i] = 2.0 * f.phi * Mp[i];
    ds[n + i] = -f.nu[i] * pMp - f.phi * dM_form(f, i, Mp, Mp);
  }
  const double pu = p.dot(f.u);
  ds[2 * n] = 2.0 * f.phi * pu * pu;
}

void collar_rhs(const Domain& d, int n, const State& s, State& ds) {
  Vec x(n), w(n);
  for (int i = 0; i < n; ++i) {
    x[i] = s[i];
    w[i] = s[n + 2 + i];
  }
  const double xi = s[n];
  const double al = s[n + 1];
  const Frame f = frame_at(d, x);
  w -= w.dot(f.u) * f.nuhat;
  const Vec Mw = f.m.Ainv * w;
  const double wMw = w.dot(Mw);
  const Vec z = al * f.u + xi * Mw;

  Vec Q(n);
  for (int k = 0; k < n; ++k)
    Q[k] = 0.5 * al * al * dM_form(f, k, f.u, f.u) + al * xi * dM_form(f, k, f.u, Mw) +
           0.5 * xi * xi * dM_form(f, k, Mw, Mw);

  // derivatives of nuhat and u along z
  const Vec Hz = f.hess * z;
  Mat dAz = Mat::Zero(n, n);
  for (int k = 0; k < n; ++k) dAz += z[k] * f.m.dA[k];
  const Vec Mz_nu = -(f.m.Ainv * (dAz * f.mv));
  const Vec mz = Mz_nu + f.m.Ainv * Hz;
  const double n2z = 2.0 * Hz.dot(f.mv) + f.nu.dot(Mz_nu);
  const double Nz = n2z / (2.0 * f.N);
  const Vec nuhat_z = Hz / f.N - f.nu * (Nz / (f.N * f.N));
  const Vec u_z = mz / f.N - f.mv * (Nz / (f.N * f.N));

  const Vec sv = al * f.nuhat + xi * w;
  const double s_uz = sv.dot(u_z);
  const double Qu = Q.dot(f.u);

  ds.fill(0.0);
  for (int i = 0; i < n; ++i) ds[i] = xi * z[i];
  ds[n] = f.N * al;
  ds[n + 1] = -xi * f.N * wMw - xi * Qu + xi * s_uz;
  for (int i = 0; i < n; ++i)
    ds[n + 2 + i] = -(Q[i] - Qu * f.nuhat[i]) - s_uz * f.nuhat[i] - al * nuhat_z[i];
  ds[2 * n + 2] = al * al;
}

}  // namespace

// ---------------------------------------------------------------------------

double hamiltonian(const Domain& d, const PhasePoint& pt) {
  if (pt.chart == Chart::Interior) {
    const double ph = d.phi(pt.x);
    const MetricEval m = d.metric().evaluate(pt.x);
    return ph * pt.p.dot(m.Ainv * pt.p);
  }
  const MetricEval m = d.metric().evaluate(pt.x);
  return 0.5 * pt.alpha * pt.alpha + 0.5 * pt.xi * pt.xi * pt.p.dot(m.Ainv * pt.p);
}

double collar_hamiltonian(const CollarCoeffs& cc, double p, double xi, double eta) {
  const double bp = cc.b.size() ? cc.b[0] * p : 0.0;
  return 0.5 * cc.a * eta * eta + bp * xi * eta + 0.5 * xi * xi * cc.c(0, 0) * p * p;
}

std::pair<double, double> levi_civita_forward(double r, double p_r, int sheet) {
  if (!(r > 0.0)) throw ChartError("Levi-Civita change needs r > 0");
  const double xi = (sheet < 0 ? -1.0 : 1.0) * std::sqrt(2.0 * r);
  return {xi, p_r * xi};
}

std::pair<double, double> levi_civita_back(double xi, double eta) {
  if (xi == 0.0) throw ChartError("Levi-Civita chart change is singular on the section xi = 0");
  return {0.5 * xi * xi, eta / xi};
}

PhasePoint make_interior(const Domain& d, const Vec& x, const Vec& p, int sheet) {
  PhasePoint pt;
  pt.chart = Chart::Interior;
  pt.x = x;
  pt.p = p;
  pt.sheet = sheet;
  pt.h = hamiltonian(d, pt);
  return pt;
}

PhasePoint to_collar(const Domain& d, const PhasePoint& pt) {
  if (pt.chart == Chart::Collar) return pt;
  const Frame f = frame_at(d, pt.x);
  if (f.phi < 0.0) throw ChartError("point outside the domain");
  PhasePoint c = pt;
  c.chart = Chart::Collar;
  c.xi = (pt.sheet < 0 ? -1.0 : 1.0) * std::sqrt(2.0 * f.phi);
  const double pn = pt.p.dot(f.u);
  c.alpha = c.xi * pn;
  c.p = pt.p - pn * f.nuhat;
  return c;
}

PhasePoint to_interior(const Domain& d, const PhasePoint& pt) {
  if (pt.chart == Chart::Interior) return pt;
  if (pt.xi == 0.0) throw ChartError("cannot leave the collar chart on the section xi = 0");
  const Frame f = frame_at(d, pt.x);
  PhasePoint c = pt;
  c.chart = Chart::Interior;
  c.p = (pt.alpha / pt.xi) * f.nuhat + pt.p;
  c.sheet = sign_of(pt.xi);
  c.xi = 0.0;
  c.alpha = 0.0;
  return c;
}

PhasePoint time_reversed(const PhasePoint& pt) {
  PhasePoint r = pt;
  r.p = -pt.p;
  r.alpha = -pt.alpha;
  return r;
}

Vec project_to_base(const PhasePoint& pt) { return pt.x; }

Vec cotangent(const Domain& d, const PhasePoint& pt) {
  if (pt.chart == Chart::Interior) return pt.p;
  return to_interior(d, pt).p;
}

CollarCoords collar_coords(const CollarChart& chart, const PhasePoint& pt) {
  const Domain& d = chart.domain();
  const PhasePoint c = to_collar(d, pt);
  const auto [q, r] = chart.inverse(c.x);
  const Frame f = frame_at(d, c.x);
  CollarCoords cc;
  cc.q = q;
  cc.xi = c.xi;
  cc.eta = c.alpha / f.N;
  cc.p = c.p.dot(chart.chi_q(q, r));
  return cc;
}

PhasePoint from_collar_coords(const CollarChart& chart, const CollarCoords& cc, double h) {
  const Domain& d = chart.domain();
  const double r = 0.5 * cc.xi * cc.xi;
  PhasePoint pt;
  pt.chart = Chart::Collar;
  pt.x = chart.chi(cc.q, r);
  const Frame f = frame_at(d, pt.x);
  const Vec t = chart.chi_q(cc.q, r);
  const Vec At = f.m.A * t;
  pt.p = cc.p * At / t.dot(At);
  pt.xi = cc.xi;
  pt.alpha = f.N * cc.eta;
  pt.sheet = cc.xi != 0.0 ? sign_of(cc.xi) : sign_of(cc.eta);
  pt.h = h;
  return pt;
}

PhasePoint launch(const Domain& d, const SectionPoint& sp) {
  if (!(sp.h > 0.0)) throw FlowError("energy must be positive");
  const double th = d.arclength().theta_of_q(sp.q);
  const BoundaryPoint bp = d.boundary_point(th);
  const Vec t = bp.dx / d.arclength().speed(th);
  const MetricEval m = d.metric().evaluate(bp.x);
  const Vec At = m.A * t;
  PhasePoint pt;
  pt.chart = Chart::Collar;
  pt.x = bp.x;
  pt.p = sp.p * At / t.dot(At);
  pt.xi = 0.0;
  pt.alpha = (sp.sheet < 0 ? -1.0 : 1.0) * std::sqrt(2.0 * sp.h);
  pt.sheet = sp.sheet < 0 ? -1 : 1;
  pt.h = sp.h;
  return pt;
}

SectionPoint section_point_at(const Domain& d, const PhasePoint& pt, double theta_lifted, double* q_lifted) {
  const PhasePoint c = to_collar(d, pt);
  const ArclengthTable& tab = d.arclength();
  const double ql = tab.q_of_theta(theta_lifted);
  const BoundaryPoint bp = d.boundary_point(theta_lifted);
  const Vec t = bp.dx / tab.speed(theta_lifted);
  SectionPoint sp;
  sp.q = d.wrap_q(ql);
  sp.p = c.p.dot(t);
  sp.sheet = sign_of(c.alpha);
  sp.h = pt.h;
  if (q_lifted) *q_lifted = ql;
  return sp;
}

double internal_tolerance(double tol) { return 0.01 * tol; }

// ---------------------------------------------------------------------------
// Integrator driver

namespace {

struct Driver {
  const Domain& d;
  const FlowOptions& o;
  int n;
  Trajectory tr;
  AdaptiveRK rk;
  Chart chart;
  int sheet;
  double h_nominal;

  Driver(const Domain& dom, const FlowOptions& opts, int dim)
      : d(dom), o(opts), n(dim), rk(1, internal_tolerance(opts.tol)) {}

  Rhs rhs() const {
    const Domain* dp = &d;
    const int nn = n;
    if (chart == Chart::Interior)
      return [dp, nn](const State& s, State& ds, double) { interior_rhs(*dp, nn, s, ds); };
    return [dp, nn](const State& s, State& ds, double) { collar_rhs(*dp, nn, s, ds); };
  }

  PhasePoint point(const State& s, double* action = nullptr) const {
    return unpack(s, chart, n, sheet, h_nominal, action);
  }

  // sign function used for event location
  double xi_of(const State& s) const { return s[n]; }
  double radial_of(const State& s) const {
    if (chart == Chart::Collar) return s[n + 1];
    Vec x(n), p(n);
    for (int i = 0; i < n; ++i) {
      x[i] = s[i];
      p[i] = s[n + i];
    }
    const FieldJet j = d.phi_jet(x);
    const MetricEval m = d.metric().evaluate(x);
    return p.dot(m.Ainv * j.gradient);
  }

  template <class G>
  double locate(const Rhs& f, const State& y0, double t, double h, G g) const {
    auto fn = [&](double tau) { return g(rk.step(f, y0, t, tau)); };
    double a = 0.0, b = h;
    double fa = g(y0), fb = fn(b);
    if (a > b) {
      std::swap(a, b);
      std::swap(fa, fb);
    }
    boost::uintmax_t iters = 100;
    auto br = boost::math::tools::toms748_solve(fn, a, b, fa, fb,
                                                boost::math::tools::eps_tolerance<double>(52), iters);
    const double ga = std::abs(fn(br.first)), gb = std::abs(fn(br.second));
    return ga <= gb ? br.first : br.second;
  }
};

}  // namespace

Trajectory integrate(const Domain& d, const PhasePoint& start, const FlowOptions& o) {
  const int n = d.dim();
  if (start.x.size() != n || start.p.size() != n) throw FlowError("phase point has wrong dimension");
  Driver dr(d, o, n);
  const double eps = d.collar_threshold();
  const double dir = o.t_end >= 0.0 ? 1.0 : -1.0;
  const bool track_angle = d.has_boundary();

  PhasePoint cur = start;
  if (cur.chart == Chart::Interior && d.phi(cur.x) < 0.8 * eps) cur = to_collar(d, cur);
  if (cur.chart == Chart::Collar && d.phi(cur.x) > eps) cur = to_interior(d, cur);
  dr.chart = cur.chart;
  dr.sheet = cur.chart == Chart::Collar ? (cur.xi != 0.0 ? sign_of(cur.xi) : sign_of(cur.alpha)) : cur.sheet;
  dr.h_nominal = start.h;

  Trajectory& tr = dr.tr;
  tr.h0 = hamiltonian(d, cur);
  if (track_angle) tr.theta_start = d.boundary_angle(cur.x);
  if (!(tr.h0 > 0.0)) throw FlowError("hamiltonian must be positive at the start point");

  double t = 0.0;
  double action = 0.0;
  State y = pack(cur, action);
  dr.rk = AdaptiveRK(state_dim(dr.chart, n), internal_tolerance(o.tol));
  Rhs f = dr.rhs();
  double h = dir * dr.rk.initial_step(f, y, t, dir);
  h = dir * std::min(std::abs(h), std::abs(o.t_end) > 0 ? std::abs(o.t_end) : 1.0);

  if (o.record_samples) tr.samples.push_back({t, dr.point(y)});
  std::size_t next_out = 0;
  while (next_out < o.output_times.size() && o.output_times[next_out] == 0.0) {
    tr.outputs.push_back({0.0, dr.point(y)});
    ++next_out;
  }

  State out{};
  int rejects = 0;
  bool done = o.t_end == 0.0;
  while (!done) {
    if (++tr.steps > o.max_steps) throw FlowError("step limit exceeded");
    double target = o.t_end;
    if (next_out < o.output_times.size() && dir * o.output_times[next_out] < dir * target)
      target = o.output_times[next_out];
    double step = h;
    bool hits = false;
    if (dir * (t + step - target) >= 0.0) {
      step = target - t;
      hits = true;
    }
    double trial = step;
    bool ok = dr.rk.attempt(f, y, t, trial, out);
    if (ok) {
      // interior steps must not dive too deep; collar steps must stay finite
      const PhasePoint np = dr.point(out);
      if (!d.box().contains(np.x)) {
        if (std::abs(step) > 1e-6 * (1.0 + std::abs(t))) {
          ok = false;
          trial = 0.25 * step;
        } else {
          throw FlowError("trajectory left the bounding box");
        }
      } else if (dr.chart == Chart::Interior) {
        double ph = 0.0;
        try {
          ph = d.phi(np.x);
        } catch (const EvalError&) {
          ph = -1.0;
        }
        if (!(ph >= 0.4 * eps)) {
          ok = false;
          trial = 0.5 * step;
        }
      }
    }
    if (!ok) {
      ++tr.rejected;
      h = trial;
      if (++rejects > 100 || std::abs(h) < 1e-15 * std::max(1.0, std::abs(t)))
        throw FlowError("step size underflow at t = " + std::to_string(t));
      continue;
    }
    rejects = 0;
    const double t_new = hits ? target : t + step;

    // section crossing
    if (dr.chart == Chart::Collar && dr.xi_of(y) != 0.0 &&
        (dr.xi_of(out) == 0.0 || (dr.xi_of(y) > 0.0) != (dr.xi_of(out) > 0.0))) {
      const double tau = dr.xi_of(out) == 0.0 ? step
                                                : dr.locate(f, y, t, step, [&](const State& s) { return dr.xi_of(s); });
      const State yc = dr.rk.step(f, y, t, tau);
      double act = 0.0;
      PhasePoint pc = dr.point(yc, &act);
      Event ev;
      ev.type = Event::Type::Crossing;
      ev.t = t + tau;
      ev.point = pc;
      const Frame fr = frame_at(d, pc.x);
      ev.xi_dot = fr.N * pc.alpha;
      ev.eta_error = std::abs(std::abs(pc.alpha) / std::sqrt(2.0 * tr.h0) - 1.0);
      if (track_angle) {
        const double ang = tr.angle_change + d.angle_step(dr.point(y).x, pc.x);
        ev.section = section_point_at(d, pc, tr.theta_start + ang, &ev.q_lifted);
      } else {
        ev.section.sheet = sign_of(pc.alpha);
        ev.section.h = tr.h0;
      }
      tr.events.push_back(ev);
      tr.crossed = true;
      if (o.stop_at_crossing) {
        if (track_angle) tr.angle_change += d.angle_step(dr.point(y).x, pc.x);
        tr.action = act;
        tr.final = pc;
        tr.t_final = t + tau;
        if (o.record_samples) tr.samples.push_back({tr.t_final, pc});
        const double hh = hamiltonian(d, pc);
        tr.max_rel_drift = std::max(tr.max_rel_drift, std::abs(hh - tr.h0) / tr.h0);
        return tr;
      }
    }

    // turning points of the normal motion
    if (o.locate_turning) {
      const double g0 = dr.radial_of(y), g1 = dr.radial_of(out);
      if (g0 != 0.0 && (g1 == 0.0 || (g0 > 0.0) != (g1 > 0.0))) {
        const double tau =
            g1 == 0.0 ? step : dr.locate(f, y, t, step, [&](const State& s) { return dr.radial_of(s); });
        Event ev;
        ev.type = Event::Type::Turning;
        ev.t = t + tau;
        ev.point = dr.point(dr.rk.step(f, y, t, tau));
        tr.events.push_back(ev);
      }
    }

    if (track_angle) tr.angle_change += d.angle_step(dr.point(y).x, dr.point(out).x);
    y = out;
    t = t_new;
    h = trial;
    if (hits && !(next_out < o.output_times.size() && target == o.output_times[next_out])) done = true;
    if (hits && target == o.t_end) done = true;
    PhasePoint np = dr.point(y, &action);
    while (next_out < o.output_times.size() && o.output_times[next_out] == t) {
      tr.outputs.push_back({t, np});
      ++next_out;
    }

    const double hh = hamiltonian(d, np);
    tr.max_rel_drift = std::max(tr.max_rel_drift, std::abs(hh - tr.h0) / tr.h0);

    // chart switches with hysteresis
    const double ph = d.phi(np.x);
    PhasePoint switched;
    bool sw = false;
    if (dr.chart == Chart::Interior && ph < 0.8 * eps) {
      switched = to_collar(d, np);
      sw = true;
    } else if (dr.chart == Chart::Collar && ph > eps) {
      switched = to_interior(d, np);
      sw = true;
    }
    if (o.record_samples) tr.samples.push_back({t, np});
    if (sw) {
      dr.chart = switched.chart;
      dr.sheet = switched.sheet;
      Event ev;
      ev.type = Event::Type::Switch;
      ev.t = t;
      ev.point = switched;
      tr.events.push_back(ev);
      y = pack(switched, action);
      const double hscale = h;
      dr.rk = AdaptiveRK(state_dim(dr.chart, n), internal_tolerance(o.tol));
      f = dr.rhs();
      h = hscale;
    }
  }
  tr.action = action;
  tr.final = dr.point(y);
  tr.t_final = t;
  return tr;
}

Event detect_section_crossing(const Domain& d, const Sample& a, const Sample& b, double tol) {
  if (a.point.chart != Chart::Collar || b.point.chart != Chart::Collar)
    throw FlowError("crossing detection needs a collar segment");
  if (a.point.xi == 0.0 || (a.point.xi > 0.0) == (b.point.xi > 0.0))
    throw FlowError("no sign change of xi in the segment");
  FlowOptions o;
  o.tol = tol;
  o.t_end = b.t - a.t;
  o.stop_at_crossing = true;
  o.record_samples = false;
  Trajectory tr = integrate(d, a.point, o);
  for (const Event& e : tr.events)
    if (e.type == Event::Type::Crossing) {
      Event r = e;
      r.t += a.t;
      return r;
    }
  throw FlowError("no crossing found in the segment");
}

}  // namespace degenbill
