#pragma once

// Domain (M, g, phi), its boundary parametrization for n = 2, the boundary
// arclength in g0 = g|Gamma / |grad phi|_g^2, curvature formulas and the
// gradient-flow collar chart.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "degenbill/field_dsl.hpp"

namespace degenbill {

class DomainError : public Error {
public:
  using Error::Error;
};

enum class MetricKind { Euclidean, Diagonal, General };

struct MetricEval {
  Mat A;
  Mat Ainv;
  std::array<Mat, kMaxDim> dA;  // dA[k] = dA/dx_k
};

class MetricField {
public:
  static MetricField euclidean(int n);
  static MetricField diagonal(std::vector<FieldExpr> entries);
  // Row-major n*n entries; must be symmetric.
  static MetricField general(std::vector<FieldExpr> entries, int n);

  MetricKind kind() const { return kind_; }
  int dim() const { return n_; }
  const std::vector<FieldExpr>& entries() const { return entries_; }

  Mat matrix(const Vec& x) const;
  // Throws DomainError unless A(x) is symmetric positive definite.
  MetricEval evaluate(const Vec& x) const;

private:
  MetricKind kind_ = MetricKind::Euclidean;
  int n_ = 2;
  std::vector<FieldExpr> entries_;
};

struct Box {
  Vec lower;
  Vec upper;
  bool contains(const Vec& x) const;
};

// Star: Gamma is crossed once by every ray from `center`; theta is the ray angle.
// PeriodicStrip: Gamma is a graph over x1 with the given period; theta = 2 pi x1 / period.
struct BoundarySpec {
  enum class Kind { Star, PeriodicStrip };
  Kind kind = Kind::Star;
  Vec center = Vec::Zero(2);
  double period = 2.0 * 3.14159265358979323846;
};

struct DomainFlags {
  bool so_invariant = false;
  std::vector<FieldExpr> separable;  // phi_i(x_i) with phi = 1/sum(1/phi_i)
};

struct BoundaryPoint {
  Vec x;
  Vec dx;  // derivative with respect to theta
};

class Domain;

// Monotone map theta <-> q where q is g0-arclength. Both directions accept
// lifted arguments: q(theta + 2 pi) = q(theta) + L.
class ArclengthTable {
public:
  ArclengthTable() = default;
  ArclengthTable(const Domain& domain, int cells);

  double length() const { return length_; }
  int cells() const { return static_cast<int>(cum_.size()) - 1; }
  double q_of_theta(double theta) const;
  double theta_of_q(double q) const;
  double speed(double theta) const;  // dq/dtheta

private:
  double partial(double a, double b) const;

  const Domain* domain_ = nullptr;
  std::vector<double> cum_;
  double dtheta_ = 0.0;
  double length_ = 0.0;
};

class Domain {
public:
  // collar_threshold = 0 selects 0.05 * (max of phi sampled inside the domain).
  Domain(std::string name, int n, MetricField metric, FieldExpr phi, BoundarySpec boundary,
         double collar_threshold, Box box, DomainFlags flags = {});

  Domain(const Domain&) = delete;
  Domain& operator=(const Domain&) = delete;

  const std::string& name() const { return name_; }
  int dim() const { return n_; }
  const MetricField& metric() const { return metric_; }
  const FieldExpr& phi_expr() const { return phi_; }
  const BoundarySpec& boundary() const { return boundary_; }
  const Box& box() const { return box_; }
  const DomainFlags& flags() const { return flags_; }
  double collar_threshold() const { return collar_; }
  double sampled_max_phi() const;

  double phi(const Vec& x) const;
  FieldJet phi_jet(const Vec& x) const;
  double grad_norm_sq(const Vec& x) const;  // |grad phi|_g^2 = <A^-1 dphi, dphi>

  // n = 2 only.
  bool has_boundary() const { return n_ == 2; }
  BoundaryPoint boundary_point(double theta) const;
  double boundary_angle(const Vec& x) const;
  double angle_step(const Vec& from, const Vec& to) const;
  const ArclengthTable& arclength() const;
  double length() const { return arclength().length(); }
  double wrap_q(double q) const;
  Vec boundary_at_q(double q) const;
  Vec tangent_at_q(double q) const;  // d x0 / dq, unit in g0
  double q_of_point(const Vec& x_on_boundary) const;

  // Checks the structural assumptions on sampled points; throws DomainError.
  void validate(int samples = 64) const;

private:
  double radius(double theta) const;
  double strip_height(double x1) const;
  double inside_value(const Vec& x) const;

  std::string name_;
  int n_;
  MetricField metric_;
  FieldExpr phi_;
  BoundarySpec boundary_;
  double collar_;
  Box box_;
  DomainFlags flags_;
  std::vector<double> radius_guess_;
  std::optional<ArclengthTable> table_;
};

// g0(v, v) at a boundary point x for a tangent vector v.
double boundary_metric(const Domain& domain, const Vec& x, const Vec& v);

double gauss_curvature(const Domain& domain, const Vec& x);
double sectional_curvature(const Domain& domain, const Vec& x, const Vec& v, const Vec& w);

struct CollarCoeffs {
  double a = 0.0;
  Vec b;
  Mat c;
};

class CollarChart {
public:
  CollarChart(const Domain& domain, double eps);

  const Domain& domain() const { return *domain_; }
  double eps() const { return eps_; }

  Vec chi(double q, double r) const;
  Vec chi_q(double q, double r) const;
  // Returns (q in [0, L), r) by flowing back down the gradient to Gamma.
  std::pair<double, double> inverse(const Vec& x) const;
  CollarCoeffs coeffs(double q, double r) const;

  struct Report {
    double max_phi_error = 0.0;
    double max_roundtrip_error = 0.0;
    double min_a = 0.0;
    int grid_q = 0;
    int grid_r = 0;
  };
  Report validate(int nq = 32, int nr = 8) const;

private:
  const Domain* domain_;
  double eps_;
};

CollarChart build_collar(const Domain& domain, double eps);

// Normalized gradient flow dx/dr = A^-1 grad phi / |grad phi|_g^2 from x, for r-time dr.
Vec gradient_flow(const Domain& domain, const Vec& x, double dr);

}  // namespace degenbill
