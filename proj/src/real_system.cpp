#include "cfk/real_system.hpp"

#include <algorithm>
#include <cmath>

namespace cfk {

RealTriple to_real(Complex y, Complex z, Complex tau) {
  if (!is_finite(y) || !is_finite(z) || !is_finite(tau)) {
    throw ConfigError("to_real: non-finite input");
  }
  RealTriple rt;
  rt.y = {y.real(), y.imag()};
  const double z1 = z.real(), z2 = z.imag();
  const double g1 = tau.real(), g2 = tau.imag();
  rt.zmat = {z1 + g1, g2 + z2, g2 - z2, z1 - g1};
  return rt;
}

ComplexTriple from_real(const RealTriple& rt) {
  const auto& m = rt.zmat;
  ComplexTriple ct;
  ct.y = {rt.y[0], rt.y[1]};
  ct.z = {0.5 * (m[0] + m[3]), 0.5 * (m[1] - m[2])};
  ct.tau = {0.5 * (m[0] - m[3]), 0.5 * (m[1] + m[2])};
  return ct;
}

double cl_part_magnitude(const std::array<double, 4>& m) {
  return std::hypot(0.5 * (m[0] + m[3]), 0.5 * (m[1] - m[2]));
}

double anti_cl_part_magnitude(const std::array<double, 4>& m) {
  return std::hypot(0.5 * (m[0] - m[3]), 0.5 * (m[1] + m[2]));
}

std::array<double, 2> eval_real_driver(const Scenario& scn, const RealDriverPoint& p) {
  const std::size_t k = static_cast<std::size_t>(p.cell);
  if (p.cell < 0 || p.cell >= scn.grid.cells()) {
    throw GridMismatchError("eval_real_driver: cell index out of range");
  }
  const ComplexTriple ct = from_real(RealTriple{p.y, p.zmat});
  const Complex x{p.x[0], p.x[1]};
  const Complex g = scn.g_tilde.at(p.cell)(x) + scn.coeffs.alpha[k] * ct.y +
                    scn.coeffs.beta[k] * ct.z + scn.coeffs.theta[k] * ct.tau;
  return {g.real(), g.imag()};
}

double driver_cr_residual(const Scenario& scn, const RealDriverPoint& p, double step) {
  if (!(step > 0.0)) throw ConfigError("driver_cr_residual: step must be positive");

  // Central difference of (f1, f2) in one real slot.
  auto diff = [&](auto&& bump) {
    RealDriverPoint plus = p, minus = p;
    bump(plus, step);
    bump(minus, -step);
    const auto fp = eval_real_driver(scn, plus);
    const auto fm = eval_real_driver(scn, minus);
    return std::array<double, 2>{(fp[0] - fm[0]) / (2.0 * step), (fp[1] - fm[1]) / (2.0 * step)};
  };

  double residual = 0.0;
  auto cr_pair = [&](const std::array<double, 2>& d_first, const std::array<double, 2>& d_second) {
    // d f1 / d first = d f2 / d second, d f1 / d second = -d f2 / d first.
    residual = std::max(residual, std::abs(d_first[0] - d_second[1]));
    residual = std::max(residual, std::abs(d_second[0] + d_first[1]));
  };

  cr_pair(diff([](RealDriverPoint& q, double h) { q.x[0] += h; }),
          diff([](RealDriverPoint& q, double h) { q.x[1] += h; }));
  cr_pair(diff([](RealDriverPoint& q, double h) { q.y[0] += h; }),
          diff([](RealDriverPoint& q, double h) { q.y[1] += h; }));
  cr_pair(diff([](RealDriverPoint& q, double h) { q.zmat[0] += h; }),
          diff([](RealDriverPoint& q, double h) { q.zmat[1] += h; }));
  cr_pair(diff([](RealDriverPoint& q, double h) { q.zmat[2] += h; }),
          diff([](RealDriverPoint& q, double h) { q.zmat[3] += h; }));
  return residual;
}

ConstraintReport check_constraint_structure(const Scenario& scn, const EulerSolution& euler,
                                            ConstrainedSystem which) {
  const bool gamma_zero = std::all_of(scn.coeffs.gamma.begin(), scn.coeffs.gamma.end(),
                                      [](Complex g) { return g == Complex{0.0, 0.0}; });
  const bool sigma_zero = std::all_of(scn.coeffs.sigma.begin(), scn.coeffs.sigma.end(),
                                      [](Complex s) { return s == Complex{0.0, 0.0}; });
  if (which == ConstrainedSystem::SigmaSystem && !gamma_zero) {
    throw ConfigError("check_constraint_structure: sigma system requires gamma == 0");
  }
  if (which == ConstrainedSystem::GammaSystem && !sigma_zero) {
    throw ConfigError("check_constraint_structure: gamma system requires sigma == 0");
  }

  const int cells = scn.grid.cells();
  ConstraintReport rep;
  const std::vector<int> probe_cells = {0, cells / 4, cells / 2, (3 * cells) / 4, cells - 1};
  for (int k : probe_cells) {
    if (k < 0 || k >= cells) continue;
    const EulerCell& cell = euler.cells[static_cast<std::size_t>(k)];
    for (const Complex& x : field_probes(scn, k)) {
      const RealTriple rt = to_real(cell.y_fit(x), cell.z_fit(x), cell.tau_fit(x));
      const double forbidden = (which == ConstrainedSystem::SigmaSystem)
                                   ? anti_cl_part_magnitude(rt.zmat)
                                   : cl_part_magnitude(rt.zmat);
      const double admissible = (which == ConstrainedSystem::SigmaSystem)
                                    ? cl_part_magnitude(rt.zmat)
                                    : anti_cl_part_magnitude(rt.zmat);
      rep.max_violation = std::max(rep.max_violation, forbidden);
      rep.scale = std::max(rep.scale, admissible);
    }
  }
  return rep;
}

}  // namespace cfk
