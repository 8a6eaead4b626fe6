#pragma once

// Poincare first-return map of the regularized flow to the section {xi = 0}.

#include <vector>

#include <Eigen/Core>

#include "degenbill/flow.hpp"

namespace degenbill {

class TrappedOrbit : public Error {
public:
  using Error::Error;
};

class NewtonDivergence : public Error {
public:
  NewtonDivergence(const std::string& what, double best)
      : Error(what + " (best residual " + std::to_string(best) + ")"), best_(best) {}
  double best_residual() const { return best_; }

private:
  double best_;
};

struct BilliardOptions {
  double tol = 1e-10;
  double max_time = 1e3;  // per flight, at h = 1
};

struct BounceResult {
  SectionPoint out;
  double flight_length = 0.0;
  double flight_time = 0.0;
  double dq = 0.0;          // lifted q advance
  double action = 0.0;      // integral of alpha^2 dt over the flight
  double eta_error = 0.0;
  double xi_dot = 0.0;      // |d xi / dt| at the return
  double energy_drift = 0.0;
};

BounceResult billiard_step(const Domain& domain, const SectionPoint& sp, const BilliardOptions& opts);

struct BilliardOrbit {
  std::vector<SectionPoint> points;   // m + 1 points for m completed bounces
  std::vector<double> flight_lengths;
  std::vector<double> dq;             // lifted q advances
  bool trapped = false;
  std::string message;
};

BilliardOrbit billiard_orbit(const Domain& domain, const SectionPoint& sp, int m, const BilliardOptions& opts);

// Central-difference Jacobian of (q, p) -> (q+, p+) with lifted q+.
Eigen::Matrix2d jacobian(const Domain& domain, const SectionPoint& sp, double delta, const BilliardOptions& opts);

struct TwoPeriodicResult {
  double q1 = 0.0;
  double q2 = 0.0;
  double residual = 0.0;
  int iterations = 0;
  BilliardOrbit orbit;
};

// Two-point shooting: T(q1, 0) = (q2, 0) and T(q2, 0) = (q1, 0).
TwoPeriodicResult find_two_periodic(const Domain& domain, double q1, double q2, double tol,
                                    const BilliardOptions& opts);

// Reversibility defect of I T I T at sp, with I(q, p) = (q, -p).
double reversibility_defect(const Domain& domain, const SectionPoint& sp, const BilliardOptions& opts);

// Signed difference a - b reduced to (-L/2, L/2].
double periodic_diff(double a, double b, double L);

}  // namespace degenbill
