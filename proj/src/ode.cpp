#include "degenbill/ode.hpp"

#include <algorithm>
#include <cmath>

#include <boost/numeric/odeint/stepper/runge_kutta_fehlberg78.hpp>

namespace degenbill {

namespace {

using Stepper = boost::numeric::odeint::runge_kutta_fehlberg78<State>;

// Order of the embedded error estimate is 7; exponents follow the usual PI recipe.
constexpr double kAlpha = 0.7 / 8.0;
constexpr double kBeta = 0.4 / 8.0;
constexpr double kSafety = 0.9;
constexpr double kMinFactor = 0.2;
constexpr double kMaxFactor = 5.0;

}  // namespace

AdaptiveRK::AdaptiveRK(int dim, double tol) : dim_(dim), tol_(tol) {}

State AdaptiveRK::step(const Rhs& f, const State& x, double t, double h) const {
  Stepper st;
  State out{}, err{};
  auto sys = [&f](const State& y, State& dy, double s) { f(y, dy, s); };
  st.do_step(sys, x, t, out, h, err);
  return out;
}

double AdaptiveRK::error_norm(const State& x, const State& y, const State& err) const {
  double e = 0.0;
  for (int i = 0; i < dim_; ++i) {
    const double sc = tol_ + tol_ * std::max(std::abs(x[i]), std::abs(y[i]));
    e = std::max(e, std::abs(err[i]) / sc);
  }
  return e;
}

bool AdaptiveRK::attempt(const Rhs& f, const State& x, double t, double& h, State& out) {
  Stepper st;
  State err{};
  auto sys = [&f](const State& y, State& dy, double s) { f(y, dy, s); };
  st.do_step(sys, x, t, out, h, err);
  double e = error_norm(x, out, err);
  bool finite = std::isfinite(e);
  for (int i = 0; i < dim_ && finite; ++i) finite = std::isfinite(out[i]);
  if (!finite) {
    h *= kMinFactor;
    return false;
  }
  if (e <= 1.0) {
    e = std::max(e, 1e-10);
    double fac = kSafety * std::pow(e, -kAlpha) * std::pow(err_prev_, kBeta);
    fac = std::clamp(fac, kMinFactor, kMaxFactor);
    err_prev_ = e;
    h *= fac;
    return true;
  }
  const double fac = std::max(kMinFactor, kSafety * std::pow(e, -1.0 / 8.0));
  h *= fac;
  return false;
}

double AdaptiveRK::initial_step(const Rhs& f, const State& x, double t, double direction) const {
  State f0{};
  f(x, f0, t);
  double d0 = 0.0, d1 = 0.0;
  for (int i = 0; i < dim_; ++i) {
    const double sc = tol_ + tol_ * std::abs(x[i]);
    d0 = std::max(d0, std::abs(x[i]) / sc);
    d1 = std::max(d1, std::abs(f0[i]) / sc);
  }
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  State x1 = x;
  for (int i = 0; i < dim_; ++i) x1[i] += direction * h0 * f0[i];
  State f1{};
  f(x1, f1, t + direction * h0);
  double d2 = 0.0;
  for (int i = 0; i < dim_; ++i) {
    const double sc = tol_ + tol_ * std::abs(x[i]);
    d2 = std::max(d2, std::abs(f1[i] - f0[i]) / sc);
  }
  d2 /= h0;
  const double h1 = (std::max(d1, d2) <= 1e-15) ? std::max(1e-6, h0 * 1e-3)
                                                 : std::pow(0.01 / std::max(d1, d2), 1.0 / 8.0);
  return std::min(100.0 * h0, h1);
}

State integrate_to(const Rhs& f, State x, double t0, double t1, int dim, double tol) {
  if (t1 == t0) return x;
  AdaptiveRK rk(dim, tol);
  const double dir = t1 > t0 ? 1.0 : -1.0;
  double t = t0;
  double h = dir * rk.initial_step(f, x, t, dir);
  State out{};
  int rejects = 0;
  while (dir * (t1 - t) > 0.0) {
    bool last = false;
    double step = h;
    if (dir * (t + step - t1) >= 0.0) {
      step = t1 - t;
      last = true;
    }
    double trial = step;
    if (rk.attempt(f, x, t, trial, out)) {
      t = last ? t1 : t + step;
      x = out;
      h = trial;
      rejects = 0;
    } else {
      h = trial;
      if (++rejects > 60 || std::abs(h) < 1e-14 * std::max(1.0, std::abs(t)))
        throw StepUnderflow("step size underflow at t = " + std::to_string(t));
    }
  }
  return x;
}

}  // namespace degenbill
