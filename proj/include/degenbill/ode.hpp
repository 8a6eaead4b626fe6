#pragma once

// Adaptive embedded Runge-Kutta driver (Fehlberg 7(8) tableau from Boost.Odeint)
// with a PI step-size controller. State vectors are fixed-size arrays; only the
// first `dim` components take part in error control.

#include <array>
#include <functional>
#include <stdexcept>

namespace degenbill {

using State = std::array<double, 9>;
using Rhs = std::function<void(const State&, State&, double)>;

class StepUnderflow : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class AdaptiveRK {
public:
  AdaptiveRK(int dim, double tol);

  int dim() const { return dim_; }
  double tol() const { return tol_; }

  // Plain step of size h with no control; used for event location.
  State step(const Rhs& f, const State& x, double t, double h) const;

  // One controlled attempt. On acceptance writes the new state into `out`
  // and returns true. Either way `h` is replaced by the proposed next step.
  bool attempt(const Rhs& f, const State& x, double t, double& h, State& out);

  double initial_step(const Rhs& f, const State& x, double t, double direction) const;

  void reset() { err_prev_ = 1.0; }

private:
  double error_norm(const State& x, const State& y, const State& err) const;

  int dim_;
  double tol_;
  double err_prev_ = 1.0;
};

// Integrates to t1 exactly without events. Returns the final state.
State integrate_to(const Rhs& f, State x, double t0, double t1, int dim, double tol);

}  // namespace degenbill
