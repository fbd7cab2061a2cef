#pragma once

#include <vector>

#include "cfk/grid.hpp"
#include "cfk/types.hpp"

namespace cfk {

// Piecewise-constant deterministic coefficients, one complex value per grid
// cell: sigma/gamma drive the forward process, alpha/beta/theta the linear
// driver g = g_tilde + alpha*y + beta*z + theta*tau.
struct CoefficientTable {
  std::vector<Complex> sigma;
  std::vector<Complex> gamma;
  std::vector<Complex> alpha;
  std::vector<Complex> beta;
  std::vector<Complex> theta;

  static CoefficientTable broadcast(Complex sigma, Complex gamma, Complex alpha,
                                    Complex beta, Complex theta, int cells);

  int cells() const { return static_cast<int>(sigma.size()); }
  void validate(const TimeGrid& grid) const;

  // True iff sigma_k * gamma_k == 0 for every cell: the regime in which the
  // first-order Ito identity needs no second-order correction.
  bool sigma_gamma_zero() const;

  CoefficientTable restricted(int k0, int k1) const;
};

}  // namespace cfk
