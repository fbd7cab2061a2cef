#include "cfk/ito.hpp"

#include <cmath>
#include <vector>

#include "cfk/parallel.hpp"

namespace cfk {

ItoReport ito_residual(const PiecewisePoly& f, const CoefficientTable& coeffs, Complex x0,
                       const TimeGrid& grid, std::size_t n_paths, std::uint64_t seed,
                       bool include_correction) {
  coeffs.validate(grid);
  if (f.cells() != grid.cells()) {
    throw GridMismatchError("ito_residual: F cell count does not match grid");
  }
  const int cells = grid.cells();

  std::vector<Poly> fx(static_cast<std::size_t>(cells));
  std::vector<Poly> fxx(static_cast<std::size_t>(cells));
  for (int k = 0; k < cells; ++k) {
    fx[static_cast<std::size_t>(k)] = f.at(k).derivative();
    fxx[static_cast<std::size_t>(k)] = f.at(k).derivative(2);
  }

  const PathBatch batch = sample_increments(seed, n_paths, grid);
  const ForwardPaths paths = simulate_forward(x0, coeffs, batch);

  std::vector<Complex> residual(n_paths);
  std::vector<double> corr_mag(n_paths);
  exec::for_blocks(n_paths, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) {
      Complex recon{0.0, 0.0};
      double mag = 0.0;
      for (int k = 0; k < cells; ++k) {
        const std::size_t ku = static_cast<std::size_t>(k);
        const Complex xk = paths.at(j, k);
        if (k > 0) recon += f.at(k)(xk) - f.at(k - 1)(xk);  // time term: boundary jumps
        recon += fx[ku](xk) * (coeffs.sigma[ku] * batch.db(j, k) +
                               coeffs.gamma[ku] * batch.db_bar(j, k));
        const Complex pair = 2.0 * coeffs.sigma[ku] * coeffs.gamma[ku];
        if (pair != Complex{0.0, 0.0}) {
          const Complex corr = pair * fxx[ku](xk) * grid.dt(k);
          mag += std::abs(corr);
          if (include_correction) recon += corr;
        }
      }
      const Complex change = f.at(cells - 1)(paths.at(j, cells)) - f.at(0)(x0);
      residual[j] = recon - change;
      corr_mag[j] = mag;
    }
  });

  const ComplexMeanStderr ms = mean_stderr(std::span<const Complex>(residual));
  const MeanStderr mag = mean_stderr(std::span<const double>(corr_mag));
  return {ms.mean, ms.se, mag.mean, n_paths, include_correction};
}

ComplexMeanStderr martingale_gap(const Poly& h, const CoefficientTable& coeffs, Complex x0,
                                 const TimeGrid& grid, std::size_t n_paths, std::uint64_t seed) {
  coeffs.validate(grid);
  const PathBatch batch = sample_increments(seed, n_paths, grid);
  const ForwardPaths paths = simulate_forward(x0, coeffs, batch);
  const int cells = grid.cells();
  const Complex h0 = h(x0);

  std::vector<Complex> gap(n_paths);
  exec::for_blocks(n_paths, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) gap[j] = h(paths.at(j, cells)) - h0;
  });
  return mean_stderr(std::span<const Complex>(gap));
}

}  // namespace cfk
