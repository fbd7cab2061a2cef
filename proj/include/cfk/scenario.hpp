#pragma once

// One fully specified instance: grid, coefficient tables, analytic data
// h and g_tilde, start point and Monte Carlo settings. Parsing/echo of the
// JSON form lives in config.hpp; solvers consume this struct directly.

#include <cstdint>
#include <string>

#include "cfk/coeffs.hpp"
#include "cfk/grid.hpp"
#include "cfk/poly.hpp"
#include "cfk/types.hpp"

namespace cfk {

inline constexpr int kMaxDataDegree = 8;

struct McSettings {
  std::size_t n_paths = 100000;
  std::uint64_t seed = 1;
  int basis_degree = 0;  // 0 = auto: max(deg h, deg g_tilde) + 1
};

struct Scenario {
  std::string id;
  TimeGrid grid{{0.0, 1.0}};
  CoefficientTable coeffs;
  Poly h;
  PiecewisePoly g_tilde;
  Complex x0{0.0, 0.0};
  McSettings mc;
  double fd_step = 1e-5;  // step for Cauchy-Riemann / derivative probes

  void validate() const;
  bool sigma_gamma_zero() const { return coeffs.sigma_gamma_zero(); }
  int auto_basis_degree() const;
  int basis_degree() const { return mc.basis_degree > 0 ? mc.basis_degree : auto_basis_degree(); }

  // Sub-scenario on knots [k0, cells] with a replacement terminal condition.
  Scenario tail(int k0, const Poly& terminal) const;
  Scenario tail(int k0) const { return tail(k0, h); }
  // Sub-scenario on knots [0, k1] with terminal data at t_{k1}.
  Scenario head(int k1, const Poly& terminal) const;
};

}  // namespace cfk
