#pragma once

// Boundary jets from the semigeodesic form G = (ds^2 + B(q,s) dq^2)/s, the
// averaged Hamiltonian N = -K0^(-1/2) + (3/8) K1 K0^(-5/2) and its flow, the
// flat model map and the cycloid solution, and comparisons with the billiard.

#include <optional>
#include <vector>

#include "degenbill/billiard_map.hpp"

namespace degenbill {

class NormalFormError : public Error {
public:
  using Error::Error;
};

// Periodic cubic spline on a uniform grid over [0, period).
class PeriodicSpline {
public:
  PeriodicSpline() = default;
  PeriodicSpline(std::vector<double> values, double period);

  double operator()(double q) const;
  double derivative(double q) const;
  double integral() const;  // over one period
  double period() const { return period_; }

private:
  std::vector<double> y_, m_;  // values and second derivatives
  double period_ = 1.0;
  double step_ = 1.0;
};

struct JetOptions {
  int samples = 128;
  double s_min = 1e-3;
  double s_max = 1e-2;
  int s_count = 24;
  double dq = 1e-4;
  double tol = 1e-12;
  double fit_tolerance = 1e-3;      // on |B0 - 1|
  double residual_threshold = 1e-6; // rms of the fit
  std::optional<unsigned long long> jitter_seed;
  int workers = 0;
};

struct NormalFormData {
  double L = 0.0;
  std::vector<double> q_grid;
  std::vector<double> k_values;
  std::vector<double> b0_values;
  std::vector<double> fit_residuals;
  double s_min = 0.0;
  double s_max = 0.0;
  double s_consistency = 0.0;  // max |s - t^2| / s, with s from the G-length
  double k_interp_error = 0.0; // spline vs midpoint refit bound (0 if not measured)
  PeriodicSpline k;

  double K0(double /*q*/, double p) const { return p * p; }
  double K1(double q, double p) const { return k(q) * p * p; }
  double curvature(double q) const { return k(q); }
};

NormalFormData estimate_boundary_jets(const Domain& domain, const JetOptions& opts = {});
// Exact data for a constant k (the flat cylinder has k = 0).
NormalFormData constant_jets(double L, double k, int samples = 128);

double averaged_hamiltonian(const NormalFormData& nf, double q, double p);
double averaged_full(const NormalFormData& nf, double Q, double P, double J);

// phi-time flow of N.
std::pair<double, double> flow_N(const NormalFormData& nf, double q, double p, double dphi, double tol);

// T(q, p) = (q + pi h <Cp,p>^(-3/2) Cp, p).
std::pair<Vec, Vec> model_map(const Vec& q, const Vec& p, double h, const Mat& C);

struct CycloidState {
  Vec q;
  double s = 0.0;
  double p_s = 0.0;
};
CycloidState cycloid_state(double t, const Vec& q0, const Vec& p, double h, const Mat& C);

struct ComparisonRow {
  double p = 0.0;
  double q_error = 0.0;
  double p_error = 0.0;
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;
  double q_slope = 0.0;
  double p_slope = 0.0;
};

ComparisonTable compare_T_vs_N(const Domain& domain, const NormalFormData& nf, const std::vector<double>& p_list,
                               int samples, const BilliardOptions& opts, int workers = 0);

struct DriftOptions {
  double c_floor = 1.0;
};

double adiabatic_drift(const Domain& domain, const NormalFormData& nf, const SectionPoint& sp, int m,
                       const BilliardOptions& opts, const DriftOptions& dopts = {});

// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace degenbill
