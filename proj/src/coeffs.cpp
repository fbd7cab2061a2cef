#include "cfk/coeffs.hpp"

namespace cfk {

CoefficientTable CoefficientTable::broadcast(Complex sigma, Complex gamma, Complex alpha,
                                             Complex beta, Complex theta, int cells) {
  if (cells < 1) throw ConfigError("CoefficientTable: cells must be >= 1");
  const std::size_t n = static_cast<std::size_t>(cells);
  return {std::vector<Complex>(n, sigma), std::vector<Complex>(n, gamma),
          std::vector<Complex>(n, alpha), std::vector<Complex>(n, beta),
          std::vector<Complex>(n, theta)};
}

void CoefficientTable::validate(const TimeGrid& grid) const {
  const std::size_t n = static_cast<std::size_t>(grid.cells());
  if (sigma.size() != n || gamma.size() != n || alpha.size() != n || beta.size() != n ||
      theta.size() != n) {
    throw GridMismatchError("CoefficientTable: table length does not match grid cells");
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (!is_finite(sigma[k]) || !is_finite(gamma[k]) || !is_finite(alpha[k]) ||
        !is_finite(beta[k]) || !is_finite(theta[k])) {
      throw ConfigError("CoefficientTable: non-finite coefficient");
    }
  }
}

bool CoefficientTable::sigma_gamma_zero() const {
  for (std::size_t k = 0; k < sigma.size(); ++k) {
    if (sigma[k] * gamma[k] != Complex{0.0, 0.0}) return false;
  }
  return true;
}

CoefficientTable CoefficientTable::restricted(int k0, int k1) const {
  auto slice = [&](const std::vector<Complex>& v) {
    return std::vector<Complex>(v.begin() + k0, v.begin() + k1);
  };
  return {slice(sigma), slice(gamma), slice(alpha), slice(beta), slice(theta)};
}

}  // namespace cfk
