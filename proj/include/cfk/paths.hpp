#pragma once

// Complex Brownian increments and the exact forward process
//   X_{k+1} = X_k + sigma_k dB_k + gamma_k conj(dB_k).
// Piecewise-constant coefficients make the forward recursion free of
// discretization error; every backward-scheme bias is then its own.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "cfk/coeffs.hpp"
#include "cfk/grid.hpp"
#include "cfk/types.hpp"

namespace cfk {

// n_paths * cells <= this unless the caller raises the budget explicitly.
inline constexpr std::size_t kDefaultIncrementBudget = std::size_t{1} << 27;

class PathBatch {
 public:
  PathBatch(TimeGrid grid, std::uint64_t seed, std::size_t n_paths,
            std::vector<double> db1, std::vector<double> db2);

  const TimeGrid& grid() const { return grid_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t n_paths() const { return n_paths_; }
  int cells() const { return grid_.cells(); }

  double db1(std::size_t j, int k) const { return db1_[idx(j, k)]; }
  double db2(std::size_t j, int k) const { return db2_[idx(j, k)]; }
  Complex db(std::size_t j, int k) const { return {db1_[idx(j, k)], db2_[idx(j, k)]}; }
  Complex db_bar(std::size_t j, int k) const { return {db1_[idx(j, k)], -db2_[idx(j, k)]}; }

  const std::vector<double>& raw_db1() const { return db1_; }
  const std::vector<double>& raw_db2() const { return db2_; }

 private:
  std::size_t idx(std::size_t j, int k) const {
    return j * static_cast<std::size_t>(grid_.cells()) + static_cast<std::size_t>(k);
  }

  TimeGrid grid_;
  std::uint64_t seed_;
  std::size_t n_paths_;
  std::vector<double> db1_;
  std::vector<double> db2_;
};

PathBatch sample_increments(std::uint64_t seed, std::size_t n_paths, const TimeGrid& grid,
                            std::size_t max_increments = kDefaultIncrementBudget);

// Forward states at every knot, X[j * (cells + 1) + k].
class ForwardPaths {
 public:
  ForwardPaths(std::size_t n_paths, int cells, std::vector<Complex> x);

  std::size_t n_paths() const { return n_paths_; }
  int cells() const { return cells_; }
  Complex at(std::size_t j, int k) const { return x_[j * stride() + static_cast<std::size_t>(k)]; }
  const std::vector<Complex>& raw() const { return x_; }

 private:
  std::size_t stride() const { return static_cast<std::size_t>(cells_) + 1; }

  std::size_t n_paths_;
  int cells_;
  std::vector<Complex> x_;
};

ForwardPaths simulate_forward(Complex x0, const CoefficientTable& coeffs, const PathBatch& batch);

enum class Against { dB, dBbar };

// Per-path sum of f_k * dB_k (or conj(dB_k)) for a deterministic step
// integrand; adapted by construction.
std::vector<Complex> ito_integral(std::span<const Complex> f_per_cell, const PathBatch& batch,
                                  Against against);

// Integrand evaluated at the cell's left endpoint state, f(k, X_{j,k});
// values depend only on increments before cell k, so adaptedness again
// holds by construction.
std::vector<Complex> ito_integral(const std::function<Complex(int, Complex)>& f_left,
                                  const ForwardPaths& paths, const PathBatch& batch,
                                  Against against);

}  // namespace cfk
