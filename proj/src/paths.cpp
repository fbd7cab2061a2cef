#include "cfk/paths.hpp"

#include <cmath>
#include <sstream>

#include "cfk/parallel.hpp"
#include "cfk/rng.hpp"

namespace cfk {

PathBatch::PathBatch(TimeGrid grid, std::uint64_t seed, std::size_t n_paths,
                     std::vector<double> db1, std::vector<double> db2)
    : grid_(std::move(grid)), seed_(seed), n_paths_(n_paths), db1_(std::move(db1)), db2_(std::move(db2)) {
  const std::size_t expected = n_paths_ * static_cast<std::size_t>(grid_.cells());
  if (db1_.size() != expected || db2_.size() != expected) {
    throw GridMismatchError("PathBatch: increment storage does not match n_paths * cells");
  }
}

PathBatch sample_increments(std::uint64_t seed, std::size_t n_paths, const TimeGrid& grid,
                            std::size_t max_increments) {
  if (n_paths < 1) throw ConfigError("sample_increments: n_paths must be >= 1");
  const std::size_t cells = static_cast<std::size_t>(grid.cells());
  if (n_paths > max_increments / cells) {
    std::ostringstream msg;
    msg << "sample_increments: n_paths * cells = " << n_paths * cells
        << " exceeds the increment budget " << max_increments;
    throw ResourceError(msg.str());
  }

  std::vector<double> sqrt_dt(cells);
  for (std::size_t k = 0; k < cells; ++k) sqrt_dt[k] = std::sqrt(grid.dt(static_cast<int>(k)));

  std::vector<double> db1(n_paths * cells);
  std::vector<double> db2(n_paths * cells);
  exec::for_blocks(n_paths, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) {
      SplitMix64 gen{substream_seed(seed, j)};
      const std::size_t base = j * cells;
      for (std::size_t k = 0; k < cells; ++k) {
        const GaussianPair z = box_muller(gen);
        db1[base + k] = sqrt_dt[k] * z.z0;
        db2[base + k] = sqrt_dt[k] * z.z1;
      }
    }
  });
  return PathBatch{grid, seed, n_paths, std::move(db1), std::move(db2)};
}

ForwardPaths::ForwardPaths(std::size_t n_paths, int cells, std::vector<Complex> x)
    : n_paths_(n_paths), cells_(cells), x_(std::move(x)) {
  if (x_.size() != n_paths_ * (static_cast<std::size_t>(cells_) + 1)) {
    throw GridMismatchError("ForwardPaths: state storage does not match n_paths * (cells + 1)");
  }
}

ForwardPaths simulate_forward(Complex x0, const CoefficientTable& coeffs, const PathBatch& batch) {
  coeffs.validate(batch.grid());
  if (!is_finite(x0)) throw ConfigError("simulate_forward: non-finite x0");
  const std::size_t n = batch.n_paths();
  const int cells = batch.cells();
  const std::size_t stride = static_cast<std::size_t>(cells) + 1;

  std::vector<Complex> x(n * stride);
  exec::for_blocks(n, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) {
      Complex cur = x0;
      x[j * stride] = cur;
      for (int k = 0; k < cells; ++k) {
        cur += coeffs.sigma[static_cast<std::size_t>(k)] * batch.db(j, k) +
               coeffs.gamma[static_cast<std::size_t>(k)] * batch.db_bar(j, k);
        x[j * stride + static_cast<std::size_t>(k) + 1] = cur;
      }
    }
  });
  return ForwardPaths{n, cells, std::move(x)};
}

std::vector<Complex> ito_integral(std::span<const Complex> f_per_cell, const PathBatch& batch,
                                  Against against) {
  if (f_per_cell.size() != static_cast<std::size_t>(batch.cells())) {
    throw GridMismatchError("ito_integral: integrand length does not match grid cells");
  }
  const std::size_t n = batch.n_paths();
  const int cells = batch.cells();
  std::vector<Complex> out(n);
  exec::for_blocks(n, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) {
      Complex acc{0.0, 0.0};
      for (int k = 0; k < cells; ++k) {
        const Complex inc = (against == Against::dB) ? batch.db(j, k) : batch.db_bar(j, k);
        acc += f_per_cell[static_cast<std::size_t>(k)] * inc;
      }
      out[j] = acc;
    }
  });
  return out;
}

std::vector<Complex> ito_integral(const std::function<Complex(int, Complex)>& f_left,
                                  const ForwardPaths& paths, const PathBatch& batch,
                                  Against against) {
  if (paths.cells() != batch.cells() || paths.n_paths() != batch.n_paths()) {
    throw GridMismatchError("ito_integral: paths and batch shape mismatch");
  }
  const std::size_t n = batch.n_paths();
  const int cells = batch.cells();
  std::vector<Complex> out(n);
  exec::for_blocks(n, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) {
      Complex acc{0.0, 0.0};
      for (int k = 0; k < cells; ++k) {
        const Complex inc = (against == Against::dB) ? batch.db(j, k) : batch.db_bar(j, k);
        acc += f_left(k, paths.at(j, k)) * inc;
      }
      out[j] = acc;
    }
  });
  return out;
}

}  // namespace cfk
