#pragma once

// Geodesic flow of G = g/phi as the Hamiltonian system H = phi <A^-1 p, p>.
//
// Interior chart: (x, p_x).
// Collar chart: the Levi-Civita variables are carried in an ambient frame,
//   xi    = +-sqrt(2 phi(x))           (sign = sheet of the double cover)
//   alpha = xi <p_x, u>,  u = A^-1 grad phi / |grad phi|_g
//   w     = tangential part of p_x, <w, u> = 0
// so that p_x = (alpha/xi) grad phi/|grad phi|_g + w and
//   H = alpha^2/2 + xi^2 <A^-1 w, w>/2,
// which is regular at xi = 0. In collar coordinates (q, p, xi, eta) one has
// alpha = sqrt(a) eta and p = <w, d chi/dq>.

#include <optional>
#include <vector>

#include "degenbill/geometry.hpp"

namespace degenbill {

class FlowError : public Error {
public:
  using Error::Error;
};

class ChartError : public Error {
public:
  using Error::Error;
};

enum class Chart { Interior, Collar };

struct PhasePoint {
  Chart chart = Chart::Interior;
  Vec x;               // base point (both charts)
  Vec p;               // interior: p_x; collar: tangential covector w
  double xi = 0.0;     // collar only
  double alpha = 0.0;  // collar only
  int sheet = 1;
  double h = 1.0;      // nominal energy
};

// Point of T*Gamma on the section {xi = 0} of the energy level h (n = 2).
struct SectionPoint {
  double q = 0.0;
  double p = 0.0;
  int sheet = 1;
  double h = 1.0;
};

struct CollarCoords {
  double q = 0.0;
  double p = 0.0;
  double xi = 0.0;
  double eta = 0.0;
};

double hamiltonian(const Domain& domain, const PhasePoint& pt);
// Regularized collar Hamiltonian a eta^2/2 + <p, b> xi eta + xi^2 <c p, p>/2.
double collar_hamiltonian(const CollarCoeffs& cc, double p, double xi, double eta);

std::pair<double, double> levi_civita_forward(double r, double p_r, int sheet);
std::pair<double, double> levi_civita_back(double xi, double eta);

PhasePoint make_interior(const Domain& domain, const Vec& x, const Vec& p, int sheet = 1);
PhasePoint to_collar(const Domain& domain, const PhasePoint& pt);
PhasePoint to_interior(const Domain& domain, const PhasePoint& pt);
PhasePoint time_reversed(const PhasePoint& pt);

Vec project_to_base(const PhasePoint& pt);
// Cotangent vector p_x; throws ChartError on the section itself.
Vec cotangent(const Domain& domain, const PhasePoint& pt);

CollarCoords collar_coords(const CollarChart& chart, const PhasePoint& pt);
PhasePoint from_collar_coords(const CollarChart& chart, const CollarCoords& cc, double h);

// Phase point on the section for a boundary covector (n = 2).
PhasePoint launch(const Domain& domain, const SectionPoint& sp);

struct Event {
  enum class Type { Switch, Crossing, Turning };
  Type type = Type::Switch;
  double t = 0.0;
  PhasePoint point;
  SectionPoint section;   // crossings only
  double q_lifted = 0.0;  // crossings only
  double xi_dot = 0.0;    // crossings only
  double eta_error = 0.0; // crossings only: | |eta| / sqrt(2h/a) - 1 |
};

struct Sample {
  double t = 0.0;
  PhasePoint point;
};

struct FlowOptions {
  double tol = 1e-10;
  double t_end = 1.0;  // may be negative
  bool stop_at_crossing = false;
  bool locate_turning = false;
  bool record_samples = true;
  std::vector<double> output_times;  // hit exactly, same sign as t_end, sorted by |t|
  long max_steps = 20'000'000;
};

struct Trajectory {
  std::vector<Sample> samples;
  std::vector<Event> events;
  std::vector<Sample> outputs;
  PhasePoint final;
  double t_final = 0.0;
  double action = 0.0;       // integral of alpha^2 dt (loop integral of eta d xi)
  double theta_start = 0.0;  // boundary angle of the start point
  double angle_change = 0.0; // unwrapped boundary-angle change of the base point
  double h0 = 0.0;
  double max_rel_drift = 0.0;
  long steps = 0;
  long rejected = 0;
  bool crossed = false;
};

// Local error tolerance used internally for a requested energy tolerance.
double internal_tolerance(double tol);

Trajectory integrate(const Domain& domain, const PhasePoint& start, const FlowOptions& opts);

// Locates the crossing inside a collar segment with a sign change of xi.
Event detect_section_crossing(const Domain& domain, const Sample& a, const Sample& b, double tol);

SectionPoint section_point_at(const Domain& domain, const PhasePoint& pt, double theta_lifted,
                              double* q_lifted = nullptr);

}  // namespace degenbill
