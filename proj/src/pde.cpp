#include "cfk/pde.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cfk {

Complex exp_moment(Complex a, double dt, int j) {
  if (!(dt >= 0.0)) throw ConfigError("exp_moment: dt must be >= 0");
  if (dt == 0.0) return {0.0, 0.0};
  const double mag = std::abs(a) * dt;
  const int pieces = std::max(1, static_cast<int>(std::ceil(mag)));
  if (pieces > 1) {
    // integral(0..dt) = sum_i exp(a*u_i) * integral(0..w) e^{a v}(u_i + v)^j dv
    // expanded binomially; every piece then has |a|*w <= 1.
    const double w = dt / pieces;
    Complex total{0.0, 0.0};
    for (int i = 0; i < pieces; ++i) {
      const double u0 = i * w;
      const Complex scale = std::exp(a * u0);
      std::vector<double> u0_powers(static_cast<std::size_t>(j) + 1);
      u0_powers[0] = 1.0;
      for (int m = 1; m <= j; ++m) u0_powers[static_cast<std::size_t>(m)] = u0_powers[static_cast<std::size_t>(m - 1)] * u0;
      double binom = 1.0;
      Complex piece{0.0, 0.0};
      for (int m = 0; m <= j; ++m) {
        piece += binom * u0_powers[static_cast<std::size_t>(j - m)] * exp_moment(a, w, m);
        binom = binom * static_cast<double>(j - m) / static_cast<double>(m + 1);
      }
      total += scale * piece;
    }
    return total;
  }
  // Power series: dt^{j+1} * sum_m (a dt)^m / (m! (j+m+1)); all terms decay
  // like 1/m! once m > |a dt|, and |a dt| <= 1 here.
  const Complex adt = a * dt;
  Complex term{1.0, 0.0};
  Complex sum = term / static_cast<double>(j + 1);
  for (int m = 1; m <= 60; ++m) {
    term *= adt / static_cast<double>(m);
    const Complex add = term / static_cast<double>(j + m + 1);
    sum += add;
    if (std::abs(add) <= 1e-18 * std::abs(sum)) break;
  }
  return sum * std::pow(dt, j + 1);
}

PdeSolution::PdeSolution(Scenario scenario) : scenario_(std::move(scenario)) {
  scenario_.coeffs.validate(scenario_.grid);
  if (scenario_.g_tilde.cells() != scenario_.grid.cells()) {
    throw GridMismatchError("PdeSolution: g_tilde cell count does not match grid");
  }
}

Poly PdeSolution::poly_at(double t) const {
  const TimeGrid& grid = scenario_.grid;
  const CoefficientTable& cf = scenario_.coeffs;
  if (t < grid.t0() - 1e-12 || t > grid.t_end() + 1e-12) {
    std::ostringstream msg;
    msg << "PdeSolution: t = " << t << " outside [" << grid.t0() << ", " << grid.t_end() << "]";
    throw GridMismatchError(msg.str());
  }
  t = std::clamp(t, grid.t0(), grid.t_end());
  if (t == grid.t_end()) return scenario_.h;

  // March the accumulated drift integral A and characteristic shift C from
  // t up to T, collecting the source contribution of each (partial) cell:
  //   integral e^{A(t,s)} g_k(x + C(t,s)) ds
  //     = e^{A0} sum_j (c_k^j / j!) g_k^(j)(x + C0) * exp_moment(alpha_k, w, j).
  const int first_cell = grid.cell_of(t);
  Complex big_a{0.0, 0.0};
  Complex big_c{0.0, 0.0};
  Poly result;

  for (int k = first_cell; k < grid.cells(); ++k) {
    const double seg_start = (k == first_cell) ? t : grid.knot(k);
    const double w = grid.knot(k + 1) - seg_start;
    const std::size_t ku = static_cast<std::size_t>(k);
    const Complex alpha = cf.alpha[ku];
    const Complex drift = cf.beta[ku] * cf.sigma[ku] + cf.theta[ku] * cf.gamma[ku];
    const Poly& g_cell = scenario_.g_tilde.at(k);

    if (!g_cell.is_zero()) {
      const Complex scale = std::exp(big_a);
      Poly shifted_g = g_cell.shifted(big_c);
      Complex drift_pow{1.0, 0.0};
      double factorial = 1.0;
      Poly deriv = shifted_g;
      for (int j = 0; j <= g_cell.degree(); ++j) {
        if (j > 0) {
          deriv = deriv.derivative();
          drift_pow *= drift;
          factorial *= static_cast<double>(j);
        }
        const Complex weight = scale * drift_pow / factorial * exp_moment(alpha, w, j);
        if (weight != Complex{0.0, 0.0}) result += weight * deriv;
      }
    }

    big_a += alpha * w;
    big_c += drift * w;
  }

  result += std::exp(big_a) * scenario_.h.shifted(big_c);
  return result;
}

Complex PdeSolution::u(double t, Complex x) const { return poly_at(t)(x); }

Complex PdeSolution::ux(double t, Complex x) const { return poly_at(t).derivative()(x); }

double pde_residual(const PdeSolution& sol, double t, Complex x, double step_t) {
  if (!(step_t > 0.0)) throw ConfigError("pde_residual: step_t must be positive");
  const Scenario& scn = sol.scenario();
  const TimeGrid& grid = scn.grid;
  const int k = grid.cell_of(t);
  if (t - step_t < grid.knot(k) || t + step_t > grid.knot(k + 1)) {
    throw GridMismatchError("pde_residual: [t - step, t + step] must stay inside one cell");
  }
  const std::size_t ku = static_cast<std::size_t>(k);
  const Complex fd_t = (sol.u(t + step_t, x) - sol.u(t - step_t, x)) / (2.0 * step_t);
  const Complex u_val = sol.u(t, x);
  const Complex ux_val = sol.ux(t, x);
  const Complex source = scn.g_tilde.at(k)(x);
  const Complex drift = scn.coeffs.beta[ku] * scn.coeffs.sigma[ku] +
                        scn.coeffs.theta[ku] * scn.coeffs.gamma[ku];
  const Complex defect = fd_t + source + scn.coeffs.alpha[ku] * u_val + drift * ux_val;
  const double scale = std::max({1.0, std::abs(fd_t), std::abs(source),
                                 std::abs(scn.coeffs.alpha[ku] * u_val), std::abs(drift * ux_val)});
  return std::abs(defect) / scale;
}

}  // namespace cfk
