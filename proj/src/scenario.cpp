#include "cfk/scenario.hpp"

#include <algorithm>
#include <sstream>

namespace cfk {

void Scenario::validate() const {
  coeffs.validate(grid);
  if (g_tilde.cells() != grid.cells()) {
    throw GridMismatchError("Scenario: g_tilde cell count does not match grid");
  }
  if (!is_finite(x0)) throw ConfigError("Scenario: non-finite x0");
  if (h.degree() > kMaxDataDegree || g_tilde.max_degree() > kMaxDataDegree) {
    std::ostringstream msg;
    msg << "Scenario '" << id << "': data degree exceeds the maximum " << kMaxDataDegree;
    throw ConfigError(msg.str());
  }
  if (mc.n_paths < 1) throw ConfigError("Scenario: n_paths must be >= 1");
  if (!(fd_step > 0.0)) throw ConfigError("Scenario: fd_step must be positive");
}

int Scenario::auto_basis_degree() const {
  return std::max(h.degree(), g_tilde.max_degree()) + 1;
}

namespace {

PiecewisePoly slice_cells(const PiecewisePoly& src, int k0, int k1) {
  std::vector<Poly> cells;
  cells.reserve(static_cast<std::size_t>(k1 - k0));
  for (int k = k0; k < k1; ++k) cells.push_back(src.at(k));
  return PiecewisePoly{std::move(cells)};
}

}  // namespace

Scenario Scenario::tail(int k0, const Poly& terminal) const {
  const int cells = grid.cells();
  if (k0 < 0 || k0 >= cells) throw GridMismatchError("Scenario::tail: knot index out of range");
  Scenario out = *this;
  out.grid = grid.restricted(k0, cells);
  out.coeffs = coeffs.restricted(k0, cells);
  out.g_tilde = slice_cells(g_tilde, k0, cells);
  out.h = terminal;
  return out;
}

Scenario Scenario::head(int k1, const Poly& terminal) const {
  if (k1 < 1 || k1 > grid.cells()) throw GridMismatchError("Scenario::head: knot index out of range");
  Scenario out = *this;
  out.grid = grid.restricted(0, k1);
  out.coeffs = coeffs.restricted(0, k1);
  out.g_tilde = slice_cells(g_tilde, 0, k1);
  out.h = terminal;
  return out;
}

}  // namespace cfk
