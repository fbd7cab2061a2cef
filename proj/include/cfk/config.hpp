#pragma once

// JSON scenario files. A file holds either a single scenario object or a
// pack {"scenarios": [...], "convergence": {...}}. Coefficients are [re, im]
// pairs, broadcast from a scalar or given per cell; polynomials are arrays
// of [re, im] pairs, lowest degree first. parse errors carry the key path.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cfk/scenario.hpp"

namespace cfk {

struct ConvergenceSpec {
  // Either inline in the config or resolved from the scenarios list by id.
  Scenario scenario;
  int levels = 3;
  std::size_t n_paths = 0;  // 0 = use the scenario's own
};

struct ScenarioPack {
  std::vector<Scenario> scenarios;
  std::optional<ConvergenceSpec> convergence;

  const Scenario& by_id(const std::string& id) const;
};

Scenario parse_scenario_json(const std::string& text, const std::string& where = "<config>");
ScenarioPack parse_pack_json(const std::string& text, const std::string& where = "<config>");
ScenarioPack load_pack(const std::string& path);

// Canonical normalized echo: explicit knots, per-cell tables, resolved
// basis degree and the sampling scheme labels. Runs are self-describing.
std::string echo_scenario_json(const Scenario& scn);
std::string echo_pack_json(const ScenarioPack& pack);

}  // namespace cfk
