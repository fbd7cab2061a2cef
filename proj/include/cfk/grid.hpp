#pragma once

#include <vector>

#include "cfk/types.hpp"

namespace cfk {

// Strictly increasing knots t_0 < ... < t_N; N >= 1 cells, fixed up front.
class TimeGrid {
 public:
  explicit TimeGrid(std::vector<double> knots);
  static TimeGrid uniform(double t0, double t_end, int cells);

  int cells() const { return static_cast<int>(knots_.size()) - 1; }
  double knot(int k) const { return knots_.at(static_cast<std::size_t>(k)); }
  double dt(int k) const { return knots_.at(static_cast<std::size_t>(k) + 1) - knots_.at(static_cast<std::size_t>(k)); }
  double t0() const { return knots_.front(); }
  double t_end() const { return knots_.back(); }
  double horizon() const { return t_end() - t0(); }
  const std::vector<double>& knots() const { return knots_; }

  // Cell index containing t, with t in [t0, T); cells() - 1 for t == T.
  int cell_of(double t) const;
  // Index of a knot equal to t (within tol); throws GridMismatchError if t
  // is not grid-aligned.
  int knot_index(double t, double tol = 1e-12) const;

  // Sub-grid over knots [k0, k1].
  TimeGrid restricted(int k0, int k1) const;

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

 private:
  std::vector<double> knots_;
};

}  // namespace cfk
