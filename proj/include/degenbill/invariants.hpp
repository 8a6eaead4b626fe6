#pragma once

// Rotation numbers, Fourier fits of invariant circles p^-1 = f(q), caustics,
// action variables and the conserved quantities of the integrable presets.

#include <vector>

#include "degenbill/normal_form.hpp"

namespace degenbill {

class InvariantError : public Error {
public:
  using Error::Error;
};

// q-samples cluster: the launch looks resonant, so no fit is attempted.
class ResonanceError : public InvariantError {
public:
  using InvariantError::InvariantError;
};

struct RotationNumber {
  double value = 0.0;
  double spread = 0.0;  // std of the block averages
};

RotationNumber rotation_number(const BilliardOrbit& orbit, double L);

struct InvariantCircleFit {
  double epsilon = 0.0;        // launch value of p^-1
  double epsilon_circle = 0.0; // circle parameter from matching the mean
  double q0 = 0.0;
  int modes = 16;
  double L = 0.0;
  std::vector<double> a;  // cos coefficients, a[0] is the mean
  std::vector<double> b;  // sin coefficients, b[0] = 0
  double rotation_number = 0.0;
  double rotation_spread = 0.0;
  double residual = 0.0;   // sup |p^-1 - series(q)| over the orbit after the launch
  double deviation = 0.0;  // sup_q |series(q) - e - (3/8) k(q) e^3| with e = epsilon_circle
  double min_p = 0.0;
  int orbit_len = 0;

  double series(double q) const;
};

struct FitOptions {
  int modes = 16;
  double q0 = 0.0;
  int workers = 0;
};

InvariantCircleFit fit_invariant_circle(const Domain& domain, const NormalFormData& nf, double eps,
                                        int orbit_len, const BilliardOptions& opts, const FitOptions& fo = {});

struct CausticPoint {
  double q = 0.0;
  Vec x;
};

// Points at G-distance rho = eps along the orthogonal geodesics (s = eps^2 / 4).
std::vector<CausticPoint> caustic_curve(const Domain& domain, double eps, int m_points, double tol = 1e-12,
                                        int workers = 0);

// Semigeodesic coordinates (q, s) of an interior point near the boundary.
std::pair<double, double> semigeodesic_inverse(const Domain& domain, const Vec& x, double tol = 1e-12);

struct TangencyReport {
  int flights = 0;
  int within = 0;          // flights whose deepest rho is within 5% of the target
  double target_rho = 0.0;
  double mean_ratio = 0.0; // mean of rho_max / eps
};

// Deepest G-distance of each flight of the orbit launched from the fit, against 2 eps
// (the cycloid of p = 1/eps reaches s = eps^2, that is rho = 2 eps).
TangencyReport caustic_tangency(const Domain& domain, const InvariantCircleFit& fit, int flights,
                                const BilliardOptions& opts);

struct ActionVariables {
  double I1 = 0.0;
  double I2 = 0.0;
};

ActionVariables action_variables(const Domain& domain, const InvariantCircleFit& fit, const BilliardOptions& opts);

// Angular momenta x_i p_j - x_j p_i along a recorded trajectory.
double noether_drift(const Domain& domain, const Trajectory& tr);

struct LiouvilleReport {
  double drift = 0.0;
  int used = 0;
  int skipped_collar = 0;
  int skipped_corner = 0;
  bool corner_proximity = false;
};

// F = (chi2 p1^2 - chi1 p2^2) / (chi1 + chi2), chi_i = 1 / phi_i, interior samples only.
LiouvilleReport liouville_integral_drift(const Domain& domain, const Trajectory& tr, double corner_margin = 0.02);

double liouville_integral(const Domain& domain, const Vec& x, const Vec& p);

}  // namespace degenbill
