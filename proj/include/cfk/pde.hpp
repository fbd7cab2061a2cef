#pragma once

// Deterministic solver for the linear first-order complex PDE
//   U_t + (beta*sigma + theta*gamma) U_x + alpha U + g_tilde = 0,
//   U(T, x) = h(x),
// by integrating along complex characteristics. With piecewise-constant
// coefficients and polynomial data the solution at any t is itself a
// polynomial in x, assembled cell by cell in closed form; pde_residual
// certifies the construction independently via a time finite difference.

#include "cfk/poly.hpp"
#include "cfk/scenario.hpp"
#include "cfk/types.hpp"

namespace cfk {

// Stable evaluation of the moments integral(0..dt) exp(a*u) u^j du.
// Segments are split so |a| * piece <= 1 before the series is summed, so
// the result is accurate for any coefficient magnitude.
Complex exp_moment(Complex a, double dt, int j);

class PdeSolution {
 public:
  explicit PdeSolution(Scenario scenario);

  const Scenario& scenario() const { return scenario_; }

  // U(t, .) as an exact polynomial; poly_at(T) returns h itself.
  Poly poly_at(double t) const;

  Complex u(double t, Complex x) const;
  Complex ux(double t, Complex x) const;

 private:
  Scenario scenario_;
};

// |FD_t U + g_tilde + alpha U + (beta sigma + theta gamma) U_x| at (t, x),
// divided by the magnitude of the largest term, i.e. a relative defect of
// the equation. t must sit inside a cell, step_t away from its knots.
double pde_residual(const PdeSolution& sol, double t, Complex x, double step_t);

}  // namespace cfk
