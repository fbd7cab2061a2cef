#pragma once

// The 2-D real view of the complex triple (Y, Z, Tau): Y becomes a real
// pair and (Z, Tau) a single 2x2 matrix with block entries
//   [[Z1 + G1, G2 + Z2], [G2 - Z2, Z1 - G1]]   (Z = Z1 + iZ2, Tau = G1 + iG2).
// The matrix splits into a [[a,-b],[b,a]]-shaped part carrying Z and a
// symmetric traceless part carrying Tau, which is what the degenerate
// constraint checks measure.

#include <array>
#include <cstdint>

#include "cfk/bsde.hpp"
#include "cfk/scenario.hpp"
#include "cfk/types.hpp"

namespace cfk {

struct RealTriple {
  std::array<double, 2> y{0.0, 0.0};
  std::array<double, 4> zmat{0.0, 0.0, 0.0, 0.0};  // row-major z11 z12 z21 z22
};

struct ComplexTriple {
  Complex y{0.0, 0.0};
  Complex z{0.0, 0.0};
  Complex tau{0.0, 0.0};
};

RealTriple to_real(Complex y, Complex z, Complex tau);
ComplexTriple from_real(const RealTriple& rt);

// Magnitude of the [[a,-b],[b,a]]-shaped part (carries Z)...
double cl_part_magnitude(const std::array<double, 4>& zmat);
// ...and of the symmetric traceless part (carries Tau).
double anti_cl_part_magnitude(const std::array<double, 4>& zmat);

// Real driver pair (f1, f2) of the equivalent 2-D system, evaluated from
// the complex driver through the half-sum/half-difference recombination of
// the z-matrix entries.
struct RealDriverPoint {
  int cell = 0;
  std::array<double, 2> x{0.0, 0.0};
  std::array<double, 2> y{0.0, 0.0};
  std::array<double, 4> zmat{0.0, 0.0, 0.0, 0.0};
};

std::array<double, 2> eval_real_driver(const Scenario& scn, const RealDriverPoint& p);

// Max Cauchy-Riemann defect of (f1, f2) over the variable pairs (x1, x2),
// (y1, y2) and the two z-matrix rows, by central differences.
double driver_cr_residual(const Scenario& scn, const RealDriverPoint& p, double step);

enum class ConstrainedSystem { SigmaSystem, GammaSystem };

struct ConstraintReport {
  double max_violation = 0.0;
  double scale = 0.0;  // max magnitude of the admissible part over probes
};

// Structural constraint of the regression z-matrix on degenerate
// scenarios: gamma == 0 forces the symmetric traceless part to vanish,
// sigma == 0 the [[a,-b],[b,a]] part. Preconditions are enforced.
ConstraintReport check_constraint_structure(const Scenario& scn, const EulerSolution& euler,
                                            ConstrainedSystem which);

}  // namespace cfk
