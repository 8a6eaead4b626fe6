#include "degenbill/normal_form.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "degenbill/ode.hpp"
#include "degenbill/parallel.hpp"

namespace degenbill {

namespace {

constexpr double kPi = std::numbers::pi;

double wrap(double q, double period) {
  double r = std::fmod(q, period);
  if (r < 0.0) r += period;
  if (r >= period) r -= period;
  return r;
}

}  // namespace

PeriodicSpline::PeriodicSpline(std::vector<double> values, double period)
    : y_(std::move(values)), period_(period) {
  const int n = static_cast<int>(y_.size());
  if (n < 3) throw Error("periodic spline needs at least 3 samples");
  if (!(period > 0.0)) throw Error("periodic spline period must be positive");
  step_ = period / n;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd rhs(n);
  const double c = 6.0 / (step_ * step_);
  for (int i = 0; i < n; ++i) {
    const int im = (i + n - 1) % n, ip = (i + 1) % n;
    A(i, im) += 1.0;
    A(i, i) += 4.0;
    A(i, ip) += 1.0;
    rhs[i] = c * (y_[ip] - 2.0 * y_[i] + y_[im]);
  }
  const Eigen::VectorXd m = A.partialPivLu().solve(rhs);
  m_.assign(m.data(), m.data() + n);
}

double PeriodicSpline::operator()(double q) const {
  const int n = static_cast<int>(y_.size());
  const double u = wrap(q, period_);
  int i = std::min(static_cast<int>(u / step_), n - 1);
  const double t = u - i * step_, h = step_, r = h - t;
  const int j = (i + 1) % n;
  return m_[i] * r * r * r / (6 * h) + m_[j] * t * t * t / (6 * h) + (y_[i] / h - m_[i] * h / 6) * r +
         (y_[j] / h - m_[j] * h / 6) * t;
}

double PeriodicSpline::derivative(double q) const {
  const int n = static_cast<int>(y_.size());
  const double u = wrap(q, period_);
  int i = std::min(static_cast<int>(u / step_), n - 1);
  const double t = u - i * step_, h = step_, r = h - t;
  const int j = (i + 1) % n;
  return -m_[i] * r * r / (2 * h) + m_[j] * t * t / (2 * h) - (y_[i] / h - m_[i] * h / 6) +
         (y_[j] / h - m_[j] * h / 6);
}

double PeriodicSpline::integral() const {
  // the second-derivative terms sum to zero on a periodic grid
  double s = 0.0;
  for (double v : y_) s += v;
  return s * step_;
}

NormalFormData estimate_boundary_jets(const Domain& d, const JetOptions& o) {
  if (!d.has_boundary()) throw NormalFormError("jet estimation is implemented for n = 2 only");
  if (o.samples < 8) throw NormalFormError("need at least 8 boundary samples");
  if (!(o.s_min > 0.0 && o.s_max > o.s_min) || o.s_count < 4)
    throw NormalFormError("invalid s window");
  const double L = d.length();

  std::vector<double> svals(o.s_count);
  const double ds = (o.s_max - o.s_min) / (o.s_count - 1);
  for (int j = 0; j < o.s_count; ++j) svals[j] = o.s_min + ds * j;
  if (o.jitter_seed) {
    std::mt19937_64 rng(*o.jitter_seed);
    std::uniform_real_distribution<double> u(-0.25, 0.25);
    for (int j = 1; j + 1 < o.s_count; ++j) svals[j] += u(rng) * ds;
  }
  std::vector<double> times(o.s_count);
  for (int j = 0; j < o.s_count; ++j) times[j] = std::sqrt(svals[j]);

  // Base points of the orthogonal geodesic from q at the requested times (h = 1, s = t^2).
  auto geodesic = [&](double q, double* drift) {
    SectionPoint sp;
    sp.q = q;
    sp.p = 0.0;
    FlowOptions fo;
    fo.tol = o.tol;
    fo.t_end = times.back();
    fo.record_samples = false;
    fo.output_times = times;
    const Trajectory tr = integrate(d, launch(d, sp), fo);
    if (tr.outputs.size() != times.size()) throw NormalFormError("geodesic output times were not reached");
    if (drift) *drift = tr.max_rel_drift;
    std::vector<Vec> xs;
    for (const Sample& s : tr.outputs) xs.push_back(project_to_base(s.point));
    return xs;
  };

  struct Fit {
    double k = 0.0, b0 = 0.0, residual = 0.0, drift = 0.0;
  };
  const double collar = d.collar_threshold();
  auto fit_at = [&](double q) {
    Fit f;
    const auto xm = geodesic(q - o.dq, nullptr);
    const auto x0 = geodesic(q, &f.drift);
    const auto xp = geodesic(q + o.dq, nullptr);
    Eigen::MatrixXd V(o.s_count, 3);
    Eigen::VectorXd b(o.s_count);
    for (int j = 0; j < o.s_count; ++j) {
      const double ph = d.phi(x0[j]);
      if (ph > collar) throw NormalFormError("orthogonal geodesic leaves the collar inside the s window");
      const Vec fq = (xp[j] - xm[j]) / (2.0 * o.dq);
      const Mat A = d.metric().matrix(x0[j]);
      const double s = svals[j];
      b[j] = s / ph * fq.dot(A * fq);
      V(j, 0) = 1.0;
      V(j, 1) = s;
      V(j, 2) = s * s;
    }
    const Eigen::Vector3d c = V.colPivHouseholderQr().solve(b);
    f.b0 = c[0];
    f.k = -c[1] / (c[0] * c[0]);
    f.residual = std::sqrt((V * c - b).squaredNorm() / o.s_count);
    return f;
  };

  const auto fits = parallel_map<Fit>(o.samples, [&](int i) { return fit_at(L * i / o.samples); }, o.workers);

  NormalFormData nf;
  nf.L = L;
  nf.s_min = o.s_min;
  nf.s_max = o.s_max;
  for (int i = 0; i < o.samples; ++i) {
    const Fit& f = fits[i];
    if (std::abs(f.b0 - 1.0) > o.fit_tolerance)
      throw NormalFormError("semigeodesic intercept B(q,0) = " + std::to_string(f.b0) + " is not 1 at q = " +
                            std::to_string(L * i / o.samples));
    if (f.residual > o.residual_threshold)
      throw NormalFormError("jet fit residual " + std::to_string(f.residual) + " above threshold");
    nf.q_grid.push_back(L * i / o.samples);
    nf.k_values.push_back(f.k);
    nf.b0_values.push_back(f.b0);
    nf.fit_residuals.push_back(f.residual);
    nf.s_consistency = std::max(nf.s_consistency, f.drift);
  }
  nf.k = PeriodicSpline(nf.k_values, L);
  if (o.samples % 2 == 0 && o.samples >= 16) {
    // refit on every other sample; cubic error shrinks by 16 when the step halves
    std::vector<double> half;
    for (int i = 0; i < o.samples; i += 2) half.push_back(nf.k_values[i]);
    const PeriodicSpline coarse(half, L);
    double e = 0.0;
    for (int i = 1; i < o.samples; i += 2) e = std::max(e, std::abs(coarse(nf.q_grid[i]) - nf.k_values[i]));
    nf.k_interp_error = e / 16.0;
  }
  return nf;
}

NormalFormData constant_jets(double L, double k, int samples) {
  NormalFormData nf;
  nf.L = L;
  for (int i = 0; i < samples; ++i) {
    nf.q_grid.push_back(L * i / samples);
    nf.k_values.push_back(k);
    nf.b0_values.push_back(1.0);
    nf.fit_residuals.push_back(0.0);
  }
  nf.k = PeriodicSpline(nf.k_values, L);
  return nf;
}

double averaged_hamiltonian(const NormalFormData& nf, double q, double p) {
  if (p == 0.0) throw NormalFormError("N is undefined at p = 0");
  const double a = std::abs(p);
  return -1.0 / a + 0.375 * nf.k(q) / (a * a * a);
}

double averaged_full(const NormalFormData& nf, double Q, double P, double J) {
  if (P == 0.0) throw NormalFormError("averaged Hamiltonian is undefined at P = 0");
  return J * std::abs(P) + 0.375 * J * J * nf.k(Q);
}

std::pair<double, double> flow_N(const NormalFormData& nf, double q, double p, double dphi, double tol) {
  if (p == 0.0) throw NormalFormError("flow of N started at p = 0");
  const Rhs f = [&](const State& x, State& dx, double) {
    const double a = std::abs(x[1]);
    if (!(a > 1e-300)) throw NormalFormError("p reached 0 along the flow of N");
    const double sg = x[1] > 0 ? 1.0 : -1.0;
    const double a2 = a * a;
    dx.fill(0.0);
    dx[0] = sg * (1.0 / a2 - 1.125 * nf.k(x[0]) / (a2 * a2));
    dx[1] = -0.375 * nf.k.derivative(x[0]) / (a2 * a);
  };
  State x{};
  x[0] = q;
  x[1] = p;
  const State y = integrate_to(f, x, 0.0, dphi, 2, tol);
  if ((y[1] > 0) != (p > 0)) throw NormalFormError("p changed sign along the flow of N");
  return {y[0], y[1]};
}

std::pair<Vec, Vec> model_map(const Vec& q, const Vec& p, double h, const Mat& C) {
  const Vec Cp = C * p;
  const double k2 = p.dot(Cp);
  if (!(k2 > 0.0)) throw NormalFormError("model map needs p != 0");
  return {q + kPi * h * std::pow(k2, -1.5) * Cp, p};
}

CycloidState cycloid_state(double t, const Vec& q0, const Vec& p, double h, const Mat& C) {
  const Vec Cp = C * p;
  const double k2 = p.dot(Cp);
  if (!(k2 > 0.0)) throw NormalFormError("cycloid needs p != 0");
  const double k = std::sqrt(k2);
  if (!(std::abs(t) < kPi / (2.0 * k))) throw NormalFormError("cycloid time outside (-pi/2k, pi/2k)");
  CycloidState c;
  c.q = q0 + h / k2 * (t + std::sin(2.0 * k * t) / (2.0 * k)) * Cp;
  const double ct = std::cos(k * t);
  c.s = h / k2 * ct * ct;
  c.p_s = -k * std::tan(k * t);
  return c;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw Error("slope fit needs at least two points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(x[i]);
    my += std::log(std::max(y[i], 1e-300));
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(std::max(y[i], 1e-300)) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

ComparisonTable compare_T_vs_N(const Domain& d, const NormalFormData& nf, const std::vector<double>& p_list,
                               int samples, const BilliardOptions& opts, int workers) {
  if (samples < 1) throw Error("need at least one sample per momentum");
  const int np = static_cast<int>(p_list.size());
  const double L = d.length();
  const auto errs = parallel_map<std::pair<double, double>>(
      np * samples,
      [&](int idx) {
        const double p = p_list[idx / samples];
        SectionPoint sp;
        sp.q = L * (idx % samples) / samples;
        sp.p = p;
        const BounceResult r = billiard_step(d, sp, opts);
        const auto [qn, pn] = flow_N(nf, sp.q, p, kPi, 1e-13);
        return std::pair<double, double>{std::abs(sp.q + r.dq - qn), std::abs(r.out.p - pn)};
      },
      workers);
  ComparisonTable tab;
  std::vector<double> ps, qe, pe;
  for (int i = 0; i < np; ++i) {
    ComparisonRow row;
    row.p = p_list[i];
    for (int j = 0; j < samples; ++j) {
      row.q_error = std::max(row.q_error, errs[i * samples + j].first);
      row.p_error = std::max(row.p_error, errs[i * samples + j].second);
    }
    tab.rows.push_back(row);
    ps.push_back(std::abs(row.p));
    qe.push_back(row.q_error);
    pe.push_back(row.p_error);
  }
  if (np >= 2) {
    tab.q_slope = loglog_slope(ps, qe);
    tab.p_slope = loglog_slope(ps, pe);
  }
  return tab;
}

double adiabatic_drift(const Domain& d, const NormalFormData& nf, const SectionPoint& sp, int m,
                       const BilliardOptions& opts, const DriftOptions& dopts) {
  const double pe = sp.p / std::sqrt(sp.h);
  if (m > dopts.c_floor * pe * pe) throw Error("bounce count exceeds c_floor * p^2");
  const BilliardOrbit orb = billiard_orbit(d, sp, m, opts);
  if (orb.trapped) throw TrappedOrbit(orb.message);
  const double n0 = averaged_hamiltonian(nf, orb.points[0].q, pe);
  double drift = 0.0;
  for (const SectionPoint& s : orb.points)
    drift = std::max(drift, std::abs(averaged_hamiltonian(nf, s.q, s.p / std::sqrt(s.h)) - n0));
  return drift;
}

}  // namespace degenbill
