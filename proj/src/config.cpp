#include "cfk/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace cfk {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& key, const std::string& what) {
  throw ConfigError(where + ": key '" + key + "': " + what);
}

Complex parse_complex(const json& j, const std::string& where, const std::string& key) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    return {j[0].get<double>(), j[1].get<double>()};
  }
  fail(where, key, "expected a number or an [re, im] pair");
}

std::vector<Complex> parse_coeff_table(const json& j, const std::string& where,
                                       const std::string& key, int cells) {
  // Scalar (number or [re, im]) broadcasts; otherwise one entry per cell.
  if (j.is_number() || (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())) {
    return std::vector<Complex>(static_cast<std::size_t>(cells), parse_complex(j, where, key));
  }
  if (!j.is_array()) fail(where, key, "expected a scalar or an array of [re, im] pairs");
  if (static_cast<int>(j.size()) != cells) {
    fail(where, key, "table length " + std::to_string(j.size()) + " does not match " +
                         std::to_string(cells) + " grid cells");
  }
  std::vector<Complex> out;
  out.reserve(j.size());
  for (std::size_t k = 0; k < j.size(); ++k) {
    out.push_back(parse_complex(j[k], where, key + "[" + std::to_string(k) + "]"));
  }
  return out;
}

Poly parse_poly(const json& j, const std::string& where, const std::string& key) {
  if (!j.is_array()) fail(where, key, "expected an array of [re, im] coefficient pairs");
  std::vector<Complex> coeffs;
  coeffs.reserve(j.size());
  for (std::size_t k = 0; k < j.size(); ++k) {
    coeffs.push_back(parse_complex(j[k], where, key + "[" + std::to_string(k) + "]"));
  }
  if (coeffs.empty()) coeffs.push_back(Complex{0.0, 0.0});
  return Poly{std::move(coeffs)};
}

bool looks_like_poly(const json& j) {
  // A polynomial is an array of pairs/numbers; a per-cell list is an array
  // of arrays of pairs.
  if (!j.is_array() || j.empty()) return true;
  const json& first = j[0];
  if (first.is_number()) return true;
  if (first.is_array() && first.size() == 2 && first[0].is_number()) return true;
  return false;
}

PiecewisePoly parse_piecewise_poly(const json& j, const std::string& where, const std::string& key,
                                   int cells) {
  if (looks_like_poly(j)) return PiecewisePoly{parse_poly(j, where, key), cells};
  if (static_cast<int>(j.size()) != cells) {
    fail(where, key, "per-cell polynomial list length does not match grid cells");
  }
  std::vector<Poly> per_cell;
  per_cell.reserve(j.size());
  for (std::size_t k = 0; k < j.size(); ++k) {
    per_cell.push_back(parse_poly(j[k], where, key + "[" + std::to_string(k) + "]"));
  }
  return PiecewisePoly{std::move(per_cell)};
}

TimeGrid parse_grid(const json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "grid", "expected an object");
  try {
    if (j.contains("knots")) {
      std::vector<double> knots = j.at("knots").get<std::vector<double>>();
      return TimeGrid{std::move(knots)};
    }
    const double t0 = j.value("t0", 0.0);
    if (!j.contains("T")) fail(where, "grid.T", "missing");
    const double t_end = j.at("T").get<double>();
    const int cells = j.value("cells", 64);
    return TimeGrid::uniform(t0, t_end, cells);
  } catch (const json::exception& e) {
    fail(where, "grid", e.what());
  }
}

Scenario parse_scenario(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": scenario must be an object");
  Scenario scn;
  try {
    scn.id = j.value("id", "scenario");
    scn.grid = parse_grid(j.value("grid", json{{"T", 1.0}}), where);
    const int cells = scn.grid.cells();
    const std::string w = where + " scenario '" + scn.id + "'";
    auto table = [&](const char* key) {
      return j.contains(key)
                 ? parse_coeff_table(j.at(key), w, key, cells)
                 : std::vector<Complex>(static_cast<std::size_t>(cells), Complex{0.0, 0.0});
    };
    scn.coeffs.sigma = table("sigma");
    scn.coeffs.gamma = table("gamma");
    scn.coeffs.alpha = table("alpha");
    scn.coeffs.beta = table("beta");
    scn.coeffs.theta = table("theta");
    scn.h = j.contains("h") ? parse_poly(j.at("h"), w, "h") : Poly{};
    scn.g_tilde = j.contains("g_tilde") ? parse_piecewise_poly(j.at("g_tilde"), w, "g_tilde", cells)
                                        : PiecewisePoly{Poly{}, cells};
    scn.x0 = j.contains("x0") ? parse_complex(j.at("x0"), w, "x0") : Complex{0.0, 0.0};
    if (j.contains("mc")) {
      const json& mc = j.at("mc");
      scn.mc.n_paths = mc.value("n_paths", scn.mc.n_paths);
      scn.mc.seed = mc.value("seed", scn.mc.seed);
      scn.mc.basis_degree = mc.value("basis_degree", 0);
    }
    scn.fd_step = j.value("fd_step", 1e-5);
  } catch (const json::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
  scn.validate();
  return scn;
}

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

json table_json(const std::vector<Complex>& v) {
  json out = json::array();
  for (Complex z : v) out.push_back(complex_json(z));
  return out;
}

json poly_json(const Poly& p) {
  json out = json::array();
  for (Complex c : p.coeffs()) out.push_back(complex_json(c));
  return out;
}

json scenario_json(const Scenario& scn) {
  json j;
  j["id"] = scn.id;
  j["grid"]["knots"] = scn.grid.knots();
  j["sigma"] = table_json(scn.coeffs.sigma);
  j["gamma"] = table_json(scn.coeffs.gamma);
  j["alpha"] = table_json(scn.coeffs.alpha);
  j["beta"] = table_json(scn.coeffs.beta);
  j["theta"] = table_json(scn.coeffs.theta);
  j["h"] = poly_json(scn.h);
  json gt = json::array();
  for (int k = 0; k < scn.g_tilde.cells(); ++k) gt.push_back(poly_json(scn.g_tilde.at(k)));
  j["g_tilde"] = gt;
  j["x0"] = complex_json(scn.x0);
  j["mc"] = {{"n_paths", scn.mc.n_paths},
             {"seed", scn.mc.seed},
             {"basis_degree", scn.basis_degree()}};
  j["fd_step"] = scn.fd_step;
  j["sampling"] = {{"rng", "splitmix64"},
                   {"substreams", "per-path splitmix of (seed, path index)"},
                   {"gaussian_transform", "box-muller"}};
  return j;
}

}  // namespace

const Scenario& ScenarioPack::by_id(const std::string& id) const {
  for (const Scenario& s : scenarios) {
    if (s.id == id) return s;
  }
  throw ConfigError("scenario pack: no scenario with id '" + id + "'");
}

Scenario parse_scenario_json(const std::string& text, const std::string& where) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
  return parse_scenario(j, where);
}

ScenarioPack parse_pack_json(const std::string& text, const std::string& where) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
  ScenarioPack pack;
  if (j.is_object() && j.contains("scenarios")) {
    const json& list = j.at("scenarios");
    if (!list.is_array() || list.empty()) {
      throw ConfigError(where + ": key 'scenarios': expected a non-empty array");
    }
    for (const json& s : list) pack.scenarios.push_back(parse_scenario(s, where));
    for (std::size_t a = 0; a < pack.scenarios.size(); ++a) {
      for (std::size_t b = a + 1; b < pack.scenarios.size(); ++b) {
        if (pack.scenarios[a].id == pack.scenarios[b].id) {
          throw ConfigError(where + ": duplicate scenario id '" + pack.scenarios[a].id + "'");
        }
      }
    }
    if (j.contains("convergence")) {
      const json& c = j.at("convergence");
      ConvergenceSpec spec;
      try {
        const json& target = c.at("scenario");
        if (target.is_string()) {
          spec.scenario = pack.by_id(target.get<std::string>());
        } else {
          spec.scenario = parse_scenario(target, where + " convergence");
        }
        spec.levels = c.value("levels", 3);
        spec.n_paths = c.value("n_paths", std::size_t{0});
      } catch (const json::exception& e) {
        throw ConfigError(where + ": key 'convergence': " + e.what());
      }
      if (spec.levels < 2) throw ConfigError(where + ": key 'convergence.levels': need >= 2");
      pack.convergence = spec;
    }
  } else {
    pack.scenarios.push_back(parse_scenario(j, where));
  }
  return pack;
}

ScenarioPack load_pack(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_pack_json(buf.str(), path);
}

std::string echo_scenario_json(const Scenario& scn) { return scenario_json(scn).dump(2) + "\n"; }

std::string echo_pack_json(const ScenarioPack& pack) {
  json j;
  j["scenarios"] = json::array();
  for (const Scenario& s : pack.scenarios) j["scenarios"].push_back(scenario_json(s));
  if (pack.convergence) {
    j["convergence"] = {{"scenario", scenario_json(pack.convergence->scenario)},
                        {"levels", pack.convergence->levels},
                        {"n_paths", pack.convergence->n_paths}};
  }
  return j.dump(2) + "\n";
}

}  // namespace cfk
