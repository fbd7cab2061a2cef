#include "cfk/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cfk {

TimeGrid::TimeGrid(std::vector<double> knots) : knots_(std::move(knots)) {
  if (knots_.size() < 2) throw ConfigError("TimeGrid: need at least two knots");
  if (!(knots_.front() >= 0.0)) throw ConfigError("TimeGrid: t0 must be >= 0");
  for (std::size_t k = 0; k + 1 < knots_.size(); ++k) {
    if (!is_finite(knots_[k]) || !(knots_[k] < knots_[k + 1])) {
      throw ConfigError("TimeGrid: knots must be finite and strictly increasing");
    }
  }
  if (!is_finite(knots_.back())) throw ConfigError("TimeGrid: knots must be finite");
}

TimeGrid TimeGrid::uniform(double t0, double t_end, int cells) {
  if (cells < 1) throw ConfigError("TimeGrid: cells must be >= 1");
  std::vector<double> knots(static_cast<std::size_t>(cells) + 1);
  for (int k = 0; k <= cells; ++k) {
    const double w = static_cast<double>(k) / static_cast<double>(cells);
    knots[static_cast<std::size_t>(k)] = t0 + w * (t_end - t0);
  }
  knots.back() = t_end;
  return TimeGrid{std::move(knots)};
}

int TimeGrid::cell_of(double t) const {
  if (t < t0() || t > t_end()) {
    std::ostringstream msg;
    msg << "TimeGrid: t = " << t << " outside [" << t0() << ", " << t_end() << "]";
    throw GridMismatchError(msg.str());
  }
  if (t >= knots_[knots_.size() - 2]) return cells() - 1;
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
  return static_cast<int>(it - knots_.begin()) - 1;
}

int TimeGrid::knot_index(double t, double tol) const {
  const double scale = std::max(1.0, std::abs(t_end()));
  for (std::size_t k = 0; k < knots_.size(); ++k) {
    if (std::abs(knots_[k] - t) <= tol * scale) return static_cast<int>(k);
  }
  std::ostringstream msg;
  msg << "TimeGrid: t = " << t << " is not a grid knot";
  throw GridMismatchError(msg.str());
}

TimeGrid TimeGrid::restricted(int k0, int k1) const {
  if (k0 < 0 || k1 <= k0 || k1 > cells()) throw GridMismatchError("TimeGrid::restricted: bad knot range");
  return TimeGrid{std::vector<double>(knots_.begin() + k0, knots_.begin() + k1 + 1)};
}

}  // namespace cfk
