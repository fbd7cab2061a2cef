#pragma once

// Monte Carlo solvers for the linear complex BSDE
//   Y_s = h(X_T) + int_s^T [g_tilde + alpha Y + beta Z + theta Tau] dr
//         - int_s^T Z dB - int_s^T Tau dBbar.
//
// Two independent routes:
//  * an adjoint (integrating-factor) estimator, whose exponential weight
//    solves dM = M (alpha dt + (theta/2) dB + (beta/2) dBbar) in closed
//    form per cell, turning Y and dY/dx into plain expectations;
//  * a backward-Euler projection scheme recovering (Y, Z, Tau) fields by
//    least-squares regression on a complex monomial basis, using the
//    pairings E[dB dBbar] = 2 dt and E[dB dB] = 0.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cfk/parallel.hpp"
#include "cfk/paths.hpp"
#include "cfk/pde.hpp"
#include "cfk/poly.hpp"
#include "cfk/scenario.hpp"
#include "cfk/types.hpp"

namespace cfk {

struct BsdeEstimate {
  Complex y{0.0, 0.0};
  double y_se = 0.0;
  std::optional<Complex> z;
  std::optional<Complex> tau;
  double z_se = 0.0;
  double tau_se = 0.0;
  std::size_t n_paths = 0;
  std::string scheme;
};

// M_{j,k} at every knot of the batch grid, M_{j,0} = 1.
class AdjointWeights {
 public:
  AdjointWeights(std::size_t n_paths, int cells, std::vector<Complex> m);

  std::size_t n_paths() const { return n_paths_; }
  int cells() const { return cells_; }
  Complex at(std::size_t j, int k) const { return m_[j * stride() + static_cast<std::size_t>(k)]; }

 private:
  std::size_t stride() const { return static_cast<std::size_t>(cells_) + 1; }

  std::size_t n_paths_;
  int cells_;
  std::vector<Complex> m_;
};

// Exact per-cell exponential update
//   M_{k+1} = M_k exp{(alpha - beta theta / 2) dt + (theta/2) dB + (beta/2) dBbar};
// the -beta theta/2 drift correction comes from the pairing dB dBbar = 2dt.
AdjointWeights adjoint_weights(const CoefficientTable& coeffs, const PathBatch& batch);

// Y_t at (t, x); t must be a grid knot. The g_tilde time integral is
// accumulated with the trapezoidal rule, keeping the estimator's time bias
// at O(dt^2) (the terminal term is exact).
BsdeEstimate solve_y_adjoint(const Scenario& scn, double t, Complex x, std::size_t n_paths,
                             std::uint64_t seed);

// dY/dx at (t, x): same weight against h' and g_tilde'.
BsdeEstimate gradient_adjoint(const Scenario& scn, double t, Complex x, std::size_t n_paths,
                              std::uint64_t seed);

// Central difference of the adjoint Y estimator along the real axis with
// common random numbers; the stderr is that of the per-path difference
// quotients, which is what the noise-cancelling pairing makes small.
BsdeEstimate fd_gradient_adjoint(const Scenario& scn, double t, Complex x, double fd_step,
                                 std::size_t n_paths, std::uint64_t seed);

struct EulerCell {
  // Fitted conditional-expectation fields in the original variable.
  Poly y_fit;
  Poly z_fit;
  Poly tau_fit;
  int degree = 0;        // effective basis degree (0 on degenerate cells)
  double condition = 1;  // condition number of the normal equations
};

struct EulerSolution {
  BsdeEstimate y0;
  std::vector<EulerCell> cells;  // index k = 0 .. N-1, fields at time t_k
  int basis_degree = 0;
};

EulerSolution solve_euler_regression(const Scenario& scn, int basis_degree, std::size_t n_paths,
                                     std::uint64_t seed);

// Deterministic probe set for the fitted fields at cell k: the forward
// cloud's center x0 plus its 1-RMS ring (closed form; the forward process
// is driftless).
std::vector<Complex> field_probes(const Scenario& scn, int cell);

// Max deviation of the regression fields from the gradient representation
// Z = U_x sigma, Tau = U_x gamma, over the field probes.
struct GradientRepReport {
  double max_z_dev = 0.0;
  double max_tau_dev = 0.0;
  double scale = 0.0;  // max |U_x|*max(|sigma|, |gamma|) over the probes
};

GradientRepReport verify_gradient_representation(const Scenario& scn, const EulerSolution& euler,
                                                 const PdeSolution& pde);

// Cauchy-Riemann structure of x -> Y_t^{t,x}: distance of the common-noise
// finite-difference Jacobian of (Re Y, Im Y) from the nearest matrix of the
// form [[a,-b],[b,a]], with the Monte Carlo error of that distance.
struct AnalyticityReport {
  double residual = 0.0;
  double se = 0.0;  // combined standard error of the residual parts
};

AnalyticityReport verify_y_analyticity(const Scenario& scn, double t, Complex x, double fd_step,
                                       std::size_t n_paths, std::uint64_t seed);

}  // namespace cfk
