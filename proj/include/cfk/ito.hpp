#pragma once

// Monte Carlo check of the first-order complex Ito identity
//   dF(t, X_t) = F_t dt + F_x (sigma dB + gamma dBbar)
// against the ground-truth expansion, which carries the second-order term
// 2 sigma gamma F_xx dt coming from the pairing dB dBbar = 2 dt. The
// residual is oriented reconstruction-minus-change: with the correction
// disabled it converges to -integral 2 sigma gamma E[F_xx] dt, so a zero
// residual certifies the first-order identity and a nonzero one measures
// exactly the missing term.

#include <cstdint>

#include "cfk/parallel.hpp"
#include "cfk/paths.hpp"
#include "cfk/poly.hpp"
#include "cfk/scenario.hpp"
#include "cfk/types.hpp"

namespace cfk {

struct ItoReport {
  Complex mean_residual{0.0, 0.0};
  double se = 0.0;
  // Sample mean of sum_k |2 sigma_k gamma_k F''(t_k, X_k)| dt_k.
  double correction_magnitude = 0.0;
  std::size_t n_paths = 0;
  bool include_correction = false;
};

// F is piecewise constant in time (one polynomial per cell); its time
// derivative enters as the exact sum of cell-boundary jumps.
ItoReport ito_residual(const PiecewisePoly& f, const CoefficientTable& coeffs, Complex x0,
                       const TimeGrid& grid, std::size_t n_paths, std::uint64_t seed,
                       bool include_correction);

// Mean of h(X_T) - h(x0): zero for conformal-martingale regimes
// (sigma*gamma = 0), the size of the Ito gap otherwise.
ComplexMeanStderr martingale_gap(const Poly& h, const CoefficientTable& coeffs, Complex x0,
                                 const TimeGrid& grid, std::size_t n_paths, std::uint64_t seed);

}  // namespace cfk
