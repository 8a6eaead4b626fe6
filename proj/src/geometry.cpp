#include "degenbill/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Cholesky>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "degenbill/ode.hpp"

namespace degenbill {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kGuessSamples = 256;
constexpr int kTableCells = 1024;

double wrap_angle(double a) {
  a = std::fmod(a, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  return a;
}

double wrap_pm_pi(double a) {
  a = wrap_angle(a + std::numbers::pi);
  return a - std::numbers::pi;
}

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// MetricField

MetricField MetricField::euclidean(int n) {
  MetricField m;
  m.kind_ = MetricKind::Euclidean;
  m.n_ = n;
  return m;
}

MetricField MetricField::diagonal(std::vector<FieldExpr> entries) {
  MetricField m;
  m.kind_ = MetricKind::Diagonal;
  m.n_ = static_cast<int>(entries.size());
  m.entries_ = std::move(entries);
  return m;
}

MetricField MetricField::general(std::vector<FieldExpr> entries, int n) {
  if (static_cast<int>(entries.size()) != n * n)
    throw DomainError("general metric needs n*n entries");
  MetricField m;
  m.kind_ = MetricKind::General;
  m.n_ = n;
  m.entries_ = std::move(entries);
  return m;
}

Mat MetricField::matrix(const Vec& x) const {
  const int n = n_;
  Mat A = Mat::Identity(n, n);
  std::span<const double> xs(x.data(), n);
  if (kind_ == MetricKind::Diagonal) {
    for (int i = 0; i < n; ++i) A(i, i) = entries_[i].value(xs);
  } else if (kind_ == MetricKind::General) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) A(i, j) = entries_[i * n + j].value(xs);
  }
  return A;
}

MetricEval MetricField::evaluate(const Vec& x) const {
  const int n = n_;
  MetricEval ev;
  ev.A = Mat::Identity(n, n);
  for (int k = 0; k < n; ++k) ev.dA[k] = Mat::Zero(n, n);
  std::span<const double> xs(x.data(), n);
  if (kind_ == MetricKind::Euclidean) {
    ev.Ainv = ev.A;
    return ev;
  }
  if (kind_ == MetricKind::Diagonal) {
    ev.Ainv = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      const Jet j = entries_[i].jet(xs);
      if (!(j.v > 0.0))
        throw DomainError("metric not positive definite at a sampled point");
      ev.A(i, i) = j.v;
      ev.Ainv(i, i) = 1.0 / j.v;
      for (int k = 0; k < n; ++k) ev.dA[k](i, i) = j.g[k];
    }
    return ev;
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Jet jt = entries_[i * n + j].jet(xs);
      ev.A(i, j) = jt.v;
      for (int k = 0; k < n; ++k) ev.dA[k](i, j) = jt.g[k];
    }
  if ((ev.A - ev.A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + ev.A.cwiseAbs().maxCoeff()))
    throw DomainError("metric matrix is not symmetric");
  Eigen::LLT<Mat> llt(ev.A);
  if (llt.info() != Eigen::Success)
    throw DomainError("metric not positive definite at a sampled point");
  ev.Ainv = llt.solve(Mat::Identity(n, n));
  return ev;
}

bool Box::contains(const Vec& x) const {
  for (int i = 0; i < x.size(); ++i)
    if (!(x[i] >= lower[i] && x[i] <= upper[i])) return false;
  return true;
}

// ---------------------------------------------------------------------------
// ArclengthTable

ArclengthTable::ArclengthTable(const Domain& domain, int cells) : domain_(&domain) {
  dtheta_ = kTwoPi / cells;
  cum_.assign(cells + 1, 0.0);
  for (int i = 0; i < cells; ++i) cum_[i + 1] = cum_[i] + partial(i * dtheta_, (i + 1) * dtheta_);
  length_ = cum_.back();
}

double ArclengthTable::speed(double theta) const {
  const BoundaryPoint bp = domain_->boundary_point(theta);
  return std::sqrt(boundary_metric(*domain_, bp.x, bp.dx));
}

double ArclengthTable::partial(double a, double b) const {
  if (a == b) return 0.0;
  auto f = [this](double th) { return speed(th); };
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 4, 1e-14);
}

double ArclengthTable::q_of_theta(double theta) const {
  const double k = std::floor(theta / kTwoPi);
  const double r = theta - k * kTwoPi;
  int i = static_cast<int>(r / dtheta_);
  i = std::clamp(i, 0, cells() - 1);
  return k * length_ + cum_[i] + partial(i * dtheta_, r);
}

double ArclengthTable::theta_of_q(double q) const {
  const double k = std::floor(q / length_);
  const double r = q - k * length_;
  int i = static_cast<int>(std::upper_bound(cum_.begin(), cum_.end(), r) - cum_.begin()) - 1;
  i = std::clamp(i, 0, cells() - 1);
  const double t0 = i * dtheta_;
  double th = t0 + dtheta_ * (r - cum_[i]) / (cum_[i + 1] - cum_[i]);
  for (int it = 0; it < 30; ++it) {
    const double F = cum_[i] + partial(t0, th) - r;
    const double step = F / speed(th);
    th -= step;
    if (std::abs(step) < 1e-15 * (1.0 + std::abs(th))) break;
  }
  return th + k * kTwoPi;
}

// ---------------------------------------------------------------------------
// Domain

Domain::Domain(std::string name, int n, MetricField metric, FieldExpr phi, BoundarySpec boundary,
               double collar_threshold, Box box, DomainFlags flags)
    : name_(std::move(name)),
      n_(n),
      metric_(std::move(metric)),
      phi_(std::move(phi)),
      boundary_(std::move(boundary)),
      collar_(collar_threshold),
      box_(std::move(box)),
      flags_(std::move(flags)) {
  if (n_ < 1 || n_ > kMaxDim) throw DomainError("unsupported dimension " + std::to_string(n_));
  if (phi_.dim() != n_) throw DomainError("phi dimension does not match domain dimension");
  if (metric_.dim() != n_) throw DomainError("metric dimension does not match domain dimension");
  if (box_.lower.size() != n_ || box_.upper.size() != n_)
    throw DomainError("bounding box dimension does not match domain dimension");
  if (!(collar_ >= 0.0)) throw DomainError("collar threshold must be positive");
  if (!flags_.separable.empty() && static_cast<int>(flags_.separable.size()) != n_)
    throw DomainError("separable flag needs one factor per coordinate");
  if (n_ != 2) {
    if (collar_ == 0.0) collar_ = 0.05 * sampled_max_phi();
    return;
  }

  radius_guess_.assign(kGuessSamples, 0.0);
  if (boundary_.kind == BoundarySpec::Kind::Star) {
    if (boundary_.center.size() != 2) throw DomainError("boundary center must have 2 components");
    double rmax = 0.0;
    for (int c = 0; c < 4; ++c) {
      const Vec corner = vec2((c & 1) ? box_.upper[0] : box_.lower[0],
                              (c & 2) ? box_.upper[1] : box_.lower[1]);
      rmax = std::max(rmax, (corner - boundary_.center).norm());
    }
    if (!(this->phi(boundary_.center) > 0.0))
      throw DomainError("star center must lie inside the domain (phi > 0)");
    const int steps = 2048;
    for (int j = 0; j < kGuessSamples; ++j) {
      const double th = (j + 0.5) * kTwoPi / kGuessSamples;
      const Vec e = vec2(std::cos(th), std::sin(th));
      double lo = 0.0;
      double found = -1.0;
      for (int s = 1; s <= steps; ++s) {
        const double R = rmax * s / steps;
        if (inside_value(boundary_.center + R * e) <= 0.0) {
          auto f = [&](double rr) { return inside_value(boundary_.center + rr * e); };
          boost::uintmax_t iters = 100;
          auto br = boost::math::tools::toms748_solve(
              f, lo, R, boost::math::tools::eps_tolerance<double>(50), iters);
          found = 0.5 * (br.first + br.second);
          break;
        }
        lo = R;
      }
      if (found < 0.0)
        throw DomainError("boundary not found inside the bounding box along a ray");
      radius_guess_[j] = found;
    }
  } else {
    if (!(boundary_.period > 0.0)) throw DomainError("strip period must be positive");
    for (int j = 0; j < kGuessSamples; ++j) radius_guess_[j] = std::nan("");
    for (int j = 0; j < kGuessSamples; ++j) {
      const double x1 = (j + 0.5) * boundary_.period / kGuessSamples;
      radius_guess_[j] = strip_height(x1);
    }
  }
  table_.emplace(*this, kTableCells);
  if (collar_ == 0.0) collar_ = 0.05 * sampled_max_phi();
}

// For separable domains the factors vanish on Gamma without the poles of
// their harmonic combination, so they give the cleaner inside test.
double Domain::inside_value(const Vec& x) const {
  if (flags_.separable.empty()) return phi(x);
  double m = INFINITY;
  for (const FieldExpr& f : flags_.separable) m = std::min(m, f.value(std::span<const double>(x.data(), x.size())));
  return m;
}

double Domain::sampled_max_phi() const {
  double best = 0.0;
  const int m = 64;
  auto consider = [&](const Vec& x) {
    try {
      const double v = phi(x);
      if (std::isfinite(v)) best = std::max(best, v);
    } catch (const EvalError&) {
    }
  };
  if (n_ == 2 && boundary_.kind == BoundarySpec::Kind::Star) {
    for (int j = 0; j < kGuessSamples; ++j) {
      const double th = (j + 0.5) * kTwoPi / kGuessSamples;
      const Vec e = vec2(std::cos(th), std::sin(th));
      for (int k = 0; k < m; ++k) consider(boundary_.center + (radius_guess_[j] * k / m) * e);
    }
  } else if (n_ == 2) {
    for (int j = 0; j < kGuessSamples; ++j) {
      const double x1 = (j + 0.5) * boundary_.period / kGuessSamples;
      const double y0 = radius_guess_[j];
      for (int k = 1; k <= m; ++k) consider(vec2(x1, y0 + (box_.upper[1] - y0) * k / m));
    }
  } else {
    const int g = n_ == 1 ? 4096 : 24;
    long total = 1;
    for (int i = 0; i < n_; ++i) total *= (g + 1);
    Vec x(n_);
    for (long k = 0; k < total; ++k) {
      long r = k;
      for (int i = 0; i < n_; ++i) {
        x[i] = box_.lower[i] + (box_.upper[i] - box_.lower[i]) * static_cast<double>(r % (g + 1)) / g;
        r /= (g + 1);
      }
      consider(x);
    }
  }
  if (!(best > 0.0)) throw DomainError("phi is not positive anywhere inside the domain");
  return best;
}

double Domain::phi(const Vec& x) const { return phi_.value(std::span<const double>(x.data(), n_)); }

FieldJet Domain::phi_jet(const Vec& x) const { return evaluate_jet(phi_, x); }

double Domain::grad_norm_sq(const Vec& x) const {
  const FieldJet j = phi_jet(x);
  const MetricEval m = metric_.evaluate(x);
  return j.gradient.dot(m.Ainv * j.gradient);
}

namespace {

// Sign change of f bracketed around a guess; f > 0 inside, f <= 0 outside.
template <class F>
double bracketed_root(F f, double guess, double lo_limit, double hi_limit) {
  const double w = 0.02 * std::max(std::abs(guess), 1e-3);
  double lo = std::max(guess - w, lo_limit), hi = std::min(guess + w, hi_limit);
  for (int i = 0; i < 60 && !(f(lo) > 0.0); ++i) lo = std::max(lo_limit, lo - (guess - lo + w));
  for (int i = 0; i < 60 && f(hi) > 0.0; ++i) hi = std::min(hi_limit, hi + (hi - guess + w));
  if (!(f(lo) > 0.0) || f(hi) > 0.0) throw DomainError("boundary root could not be bracketed");
  boost::uintmax_t iters = 200;
  auto br = boost::math::tools::toms748_solve(f, lo, hi, boost::math::tools::eps_tolerance<double>(53), iters);
  // prefer the endpoint on the boundary side with the smaller residual
  return std::abs(f(br.first)) <= std::abs(f(br.second)) ? br.first : br.second;
}

}  // namespace

double Domain::radius(double theta) const {
  const Vec& c = boundary_.center;
  const Vec e = vec2(std::cos(theta), std::sin(theta));
  const double u = wrap_angle(theta) / kTwoPi * kGuessSamples - 0.5;
  const int j0 = static_cast<int>(std::floor(u));
  const double w = u - j0;
  const auto at = [&](int j) { return radius_guess_[((j % kGuessSamples) + kGuessSamples) % kGuessSamples]; };
  const double guess = (1.0 - w) * at(j0) + w * at(j0 + 1);
  auto f = [&](double rr) { return inside_value(c + rr * e); };
  return bracketed_root(f, guess, 0.0, 1e3 * guess);
}

double Domain::strip_height(double x1) const {
  // phi > 0 above the boundary
  auto f = [&](double yy) { return phi(vec2(x1, yy)); };
  if (!radius_guess_.empty()) {
    const double u = x1 / boundary_.period * kGuessSamples - 0.5;
    const int j0 = static_cast<int>(std::floor(u));
    const double w = u - j0;
    const auto at = [&](int j) { return radius_guess_[((j % kGuessSamples) + kGuessSamples) % kGuessSamples]; };
    const double guess = (1.0 - w) * at(j0) + w * at(j0 + 1);
    if (std::isfinite(guess)) {
      auto g = [&](double yy) { return f(-yy); };  // reflect so that g > 0 on the inner side
      return -bracketed_root(g, -guess, -box_.upper[1], -box_.lower[1]);
    }
  }
  const double lo = box_.lower[1], hi = box_.upper[1];
  const int steps = 2048;
  double prev = lo;
  double fprev = f(lo);
  for (int s = 1; s <= steps; ++s) {
    const double yy = lo + (hi - lo) * s / steps;
    const double fy = f(yy);
    if ((fprev <= 0.0) != (fy <= 0.0)) {
      boost::uintmax_t iters = 200;
      auto br = boost::math::tools::toms748_solve(f, prev, yy, boost::math::tools::eps_tolerance<double>(53), iters);
      return std::abs(f(br.first)) <= std::abs(f(br.second)) ? br.first : br.second;
    }
    prev = yy;
    fprev = fy;
  }
  throw DomainError("boundary not found in the strip bounding box");
}

BoundaryPoint Domain::boundary_point(double theta) const {
  if (n_ != 2) throw DomainError("boundary parametrization requires n = 2");
  BoundaryPoint bp;
  if (boundary_.kind == BoundarySpec::Kind::Star) {
    const Vec e = vec2(std::cos(theta), std::sin(theta));
    const Vec ep = vec2(-std::sin(theta), std::cos(theta));
    const double R = radius(theta);
    bp.x = boundary_.center + R * e;
    const FieldJet j = phi_jet(bp.x);
    const double ge = j.gradient.dot(e);
    if (ge == 0.0) throw DomainError("ray is tangent to the boundary");
    const double Rp = -R * j.gradient.dot(ep) / ge;
    bp.dx = Rp * e + R * ep;
  } else {
    const double s = boundary_.period / kTwoPi;
    const double x1 = theta * s;
    bp.x = vec2(x1, strip_height(x1));
    const FieldJet j = phi_jet(bp.x);
    if (j.gradient[1] == 0.0) throw DomainError("boundary is not a graph over x1");
    bp.dx = vec2(s, -s * j.gradient[0] / j.gradient[1]);
  }
  return bp;
}

double Domain::boundary_angle(const Vec& x) const {
  if (boundary_.kind == BoundarySpec::Kind::Star)
    return wrap_angle(std::atan2(x[1] - boundary_.center[1], x[0] - boundary_.center[0]));
  return kTwoPi * x[0] / boundary_.period;
}

double Domain::angle_step(const Vec& from, const Vec& to) const {
  if (boundary_.kind == BoundarySpec::Kind::Star)
    return wrap_pm_pi(boundary_angle(to) - boundary_angle(from));
  return kTwoPi * (to[0] - from[0]) / boundary_.period;
}

const ArclengthTable& Domain::arclength() const {
  if (!table_) throw DomainError("boundary arclength requires n = 2");
  return *table_;
}

double Domain::wrap_q(double q) const {
  const double L = length();
  double r = std::fmod(q, L);
  if (r < 0.0) r += L;
  if (r >= L) r -= L;
  return r;
}

Vec Domain::boundary_at_q(double q) const {
  return boundary_point(arclength().theta_of_q(q)).x;
}

Vec Domain::tangent_at_q(double q) const {
  const double th = arclength().theta_of_q(q);
  const BoundaryPoint bp = boundary_point(th);
  return bp.dx / arclength().speed(th);
}

double Domain::q_of_point(const Vec& x) const {
  return wrap_q(arclength().q_of_theta(boundary_angle(x)));
}

void Domain::validate(int samples) const {
  if (n_ != 2) {
    // no boundary parametrization; only the metric can be checked
    const Vec mid = 0.5 * (box_.lower + box_.upper);
    metric_.evaluate(mid);
    return;
  }
  for (int j = 0; j < samples; ++j) {
    const double th = (j + 0.5) * kTwoPi / samples;
    const BoundaryPoint bp = boundary_point(th);
    if (std::abs(phi(bp.x)) > 1e-10) throw DomainError("phi does not vanish on the boundary");
    if (!box_.contains(bp.x)) throw DomainError("boundary leaves the bounding box");
    const double g2 = grad_norm_sq(bp.x);
    if (!(g2 > 1e-12)) throw DomainError("degenerate gradient of phi on the boundary");
    Vec inner;
    if (boundary_.kind == BoundarySpec::Kind::Star)
      inner = boundary_.center + 0.5 * (bp.x - boundary_.center);
    else
      inner = bp.x + vec2(0.0, 0.1 * collar_ + 1e-3);
    if (!(phi(inner) > 0.0)) throw DomainError("phi is not positive at a sampled interior point");
    metric_.evaluate(inner);
    metric_.evaluate(bp.x);
  }
}

// ---------------------------------------------------------------------------
// Boundary metric and curvatures

double boundary_metric(const Domain& domain, const Vec& x, const Vec& v) {
  if (std::abs(domain.phi(x)) > 1e-10) throw DomainError("point is not on the boundary");
  const FieldJet j = domain.phi_jet(x);
  const MetricEval m = domain.metric().evaluate(x);
  const double g2 = j.gradient.dot(m.Ainv * j.gradient);
  if (!(g2 > 0.0)) throw DomainError("degenerate gradient of phi on the boundary");
  return v.dot(m.A * v) / g2;
}

double gauss_curvature(const Domain& domain, const Vec& x) {
  if (domain.dim() != 2) throw DomainError("Gauss curvature requires n = 2");
  if (domain.metric().kind() != MetricKind::Euclidean)
    throw DomainError("Gauss curvature formula requires a Euclidean metric g");
  const FieldJet j = domain.phi_jet(x);
  if (!(j.value > 0.0)) throw DomainError("Gauss curvature requested off the interior");
  return 0.5 * (j.hessian.trace() - j.gradient.squaredNorm() / j.value);
}

double sectional_curvature(const Domain& domain, const Vec& x, const Vec& v, const Vec& w) {
  if (domain.metric().kind() != MetricKind::Euclidean)
    throw DomainError("sectional curvature formula requires a Euclidean metric g");
  if (std::abs(v.squaredNorm() - 1.0) > 1e-8 || std::abs(w.squaredNorm() - 1.0) > 1e-8 ||
      std::abs(v.dot(w)) > 1e-8)
    throw DomainError("tangent vectors are not orthonormal");
  const FieldJet j = domain.phi_jet(x);
  const double f = j.value;
  if (!(f > 0.0)) throw DomainError("sectional curvature requested off the interior");
  const double dv = j.gradient.dot(v), dw = j.gradient.dot(w);
  return 0.5 * v.dot(j.hessian * v) + 0.5 * w.dot(j.hessian * w) - dv * dv / (4.0 * f) -
         dw * dw / (4.0 * f) - j.gradient.squaredNorm() / (4.0 * f);
}

// ---------------------------------------------------------------------------
// Collar chart

Vec gradient_flow(const Domain& domain, const Vec& x, double dr) {
  const int n = domain.dim();
  const auto direction = [&](const Vec& y, double* phi_out) {
    const FieldJet j = domain.phi_jet(y);
    const MetricEval m = domain.metric().evaluate(y);
    const Vec mv = m.Ainv * j.gradient;
    const double g2 = j.gradient.dot(mv);
    if (!(g2 > 1e-14)) throw DomainError("gradient flow reached a critical point of phi");
    if (phi_out) *phi_out = j.value;
    return Vec(mv / g2);
  };
  Rhs f = [&](const State& s, State& ds, double) {
    Vec y(n);
    for (int i = 0; i < n; ++i) y[i] = s[i];
    const Vec d = direction(y, nullptr);
    ds.fill(0.0);
    for (int i = 0; i < n; ++i) ds[i] = d[i];
  };
  State s{};
  for (int i = 0; i < n; ++i) s[i] = x[i];
  const double target = domain.phi(x) + dr;
  s = integrate_to(f, s, 0.0, dr, n, 1e-14);
  Vec y(n);
  for (int i = 0; i < n; ++i) y[i] = s[i];
  for (int it = 0; it < 3; ++it) {
    double ph = 0.0;
    const Vec d = direction(y, &ph);
    const double err = target - ph;
    if (err == 0.0) break;
    y += err * d;
  }
  if (!domain.box().contains(y)) throw DomainError("collar flow left the bounding box");
  return y;
}

CollarChart::CollarChart(const Domain& domain, double eps) : domain_(&domain), eps_(eps) {
  if (domain.dim() != 2) throw DomainError("collar chart requires n = 2");
  if (!(eps > 0.0)) throw DomainError("collar width must be positive");
}

Vec CollarChart::chi(double q, double r) const {
  if (r < -1e-15 || r > eps_ * (1.0 + 1e-12)) throw DomainError("r outside the collar");
  const Vec x0 = domain_->boundary_at_q(q);
  if (r == 0.0) return x0;
  return gradient_flow(*domain_, x0, r);
}

Vec CollarChart::chi_q(double q, double r) const {
  const double d = 1e-5;
  if (r == 0.0) return domain_->tangent_at_q(q);
  return (chi(q + d, r) - chi(q - d, r)) / (2.0 * d);
}

std::pair<double, double> CollarChart::inverse(const Vec& x) const {
  const double r = domain_->phi(x);
  if (r < -1e-12 || r > eps_ * (1.0 + 1e-9)) throw DomainError("point outside the collar");
  const Vec x0 = r > 0.0 ? gradient_flow(*domain_, x, -r) : x;
  return {domain_->q_of_point(x0), std::max(r, 0.0)};
}

CollarCoeffs CollarChart::coeffs(double q, double r) const {
  if (r < 0.0 || r > eps_ * (1.0 + 1e-12)) throw DomainError("r outside the collar");
  const Vec x = chi(q, r);
  const Vec xq = chi_q(q, r);
  const MetricEval m = domain_->metric().evaluate(x);
  const FieldJet j = domain_->phi_jet(x);
  CollarCoeffs cc;
  cc.a = j.gradient.dot(m.Ainv * j.gradient);
  cc.b = Vec::Zero(1);
  cc.c = Mat::Constant(1, 1, 1.0 / xq.dot(m.A * xq));
  return cc;
}

CollarChart::Report CollarChart::validate(int nq, int nr) const {
  Report rep;
  rep.grid_q = nq;
  rep.grid_r = nr;
  rep.min_a = 1e300;
  const double L = domain_->length();
  for (int i = 0; i < nq; ++i) {
    const double q = (i + 0.5) * L / nq;
    for (int k = 0; k < nr; ++k) {
      const double r = eps_ * k / (nr - 1);
      const Vec x = chi(q, r);
      rep.max_phi_error = std::max(rep.max_phi_error, std::abs(domain_->phi(x) - r));
      const auto [qq, rr] = inverse(x);
      double dq = std::abs(qq - q);
      dq = std::min(dq, L - dq);
      rep.max_roundtrip_error = std::max({rep.max_roundtrip_error, dq, std::abs(rr - r)});
      if (k == 0) rep.min_a = std::min(rep.min_a, domain_->grad_norm_sq(x));
    }
  }
  return rep;
}

CollarChart build_collar(const Domain& domain, double eps) {
  CollarChart chart(domain, eps);
  const auto rep = chart.validate();
  if (rep.max_phi_error > 1e-10) throw DomainError("collar chart fails phi(chi(q, r)) = r");
  if (rep.max_roundtrip_error > 1e-8) throw DomainError("collar chart round trip failed");
  if (!(rep.min_a > 0.0)) throw DomainError("collar coefficient a(q, 0) is not positive");
  return chart;
}

}  // namespace degenbill
