#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "cfk/config.hpp"
#include "cfk/report.hpp"
#include "cfk/suite.hpp"
#include "test_support.hpp"

using namespace cfk;

namespace {

const char* kMinimalScenario = R"({
  "id": "mini",
  "grid": {"t0": 0.0, "T": 1.0, "cells": 4},
  "sigma": [1.0, 0.0],
  "alpha": [0.25, -0.1],
  "g_tilde": [[0.5, 0.25], [0.3, 0]],
  "h": [[0, 0], [1, 0], [0.5, 0]],
  "x0": [0.5, 0.2],
  "mc": {"n_paths": 5000, "seed": 7}
})";

}  // namespace

TEST_CASE("scenario parsing: broadcast, tables, defaults") {
  const Scenario scn = parse_scenario_json(kMinimalScenario);
  CHECK(scn.id == "mini");
  CHECK(scn.grid.cells() == 4);
  CHECK(scn.coeffs.sigma == std::vector<Complex>(4, Complex{1, 0}));
  CHECK(scn.coeffs.gamma == std::vector<Complex>(4, Complex{0, 0}));
  CHECK(scn.coeffs.alpha.front() == Complex{0.25, -0.1});
  CHECK(scn.h.degree() == 2);
  CHECK(scn.g_tilde.cells() == 4);
  CHECK(scn.x0 == Complex{0.5, 0.2});
  CHECK(scn.mc.n_paths == 5000);
  CHECK(scn.basis_degree() == 3);  // max(deg h, deg g) + 1
  CHECK(scn.sigma_gamma_zero());
}

TEST_CASE("config errors carry the key path") {
  SUBCASE("bad coefficient shape") {
    CHECK_THROWS_WITH_AS(
        parse_scenario_json(R"({"grid": {"T": 1.0, "cells": 2}, "sigma": [[1, 2], [3]]})"),
        doctest::Contains("sigma"), ConfigError);
  }
  SUBCASE("table length mismatch") {
    CHECK_THROWS_WITH_AS(
        parse_scenario_json(
            R"({"grid": {"T": 1.0, "cells": 3}, "sigma": [[1, 0], [0, 0]], "h": [[1, 0]]})"),
        doctest::Contains("sigma"), ConfigError);
  }
  SUBCASE("degree cap") {
    CHECK_THROWS_AS(
        parse_scenario_json(
            R"({"grid": {"T": 1.0, "cells": 2},
               "h": [[1,0],[1,0],[1,0],[1,0],[1,0],[1,0],[1,0],[1,0],[1,0],[1,0]]})"),
        ConfigError);
  }
  SUBCASE("invalid grid") {
    CHECK_THROWS_AS(parse_scenario_json(R"({"grid": {"T": -1.0, "cells": 2}})"), ConfigError);
    CHECK_THROWS_AS(parse_scenario_json(R"({"grid": {"knots": [0.0, 0.5, 0.5]}})"), ConfigError);
  }
  SUBCASE("malformed JSON") {
    CHECK_THROWS_AS(parse_scenario_json("{"), ConfigError);
  }
}

TEST_CASE("pack parsing and convergence section") {
  const std::string pack_text = std::string(R"({"scenarios": [)") + kMinimalScenario +
                                R"(], "convergence": {"scenario": "mini", "levels": 4}})";
  const ScenarioPack pack = parse_pack_json(pack_text);
  CHECK(pack.scenarios.size() == 1);
  REQUIRE(pack.convergence.has_value());
  CHECK(pack.convergence->scenario.id == "mini");
  CHECK(pack.convergence->levels == 4);
  CHECK_THROWS_AS(pack.by_id("missing"), ConfigError);

  // Unknown reference fails at parse time.
  CHECK_THROWS_AS(parse_pack_json(std::string(R"({"scenarios": [)") + kMinimalScenario +
                                  R"(], "convergence": {"scenario": "nope"}})"),
                  ConfigError);

  // Duplicate ids are rejected: per-scenario artifacts are keyed by id.
  CHECK_THROWS_AS(parse_pack_json(std::string(R"({"scenarios": [)") + kMinimalScenario + "," +
                                  kMinimalScenario + "]}"),
                  ConfigError);
}

TEST_CASE("echo is canonical and reparses to the same scenario") {
  const Scenario scn = parse_scenario_json(kMinimalScenario);
  const std::string echo = echo_scenario_json(scn);
  CHECK(echo.find("\"knots\"") != std::string::npos);
  CHECK(echo.find("box-muller") != std::string::npos);
  const Scenario back = parse_scenario_json(echo);
  CHECK(back.grid == scn.grid);
  CHECK(back.coeffs.sigma == scn.coeffs.sigma);
  CHECK(back.h == scn.h);
  CHECK(back.mc.seed == scn.mc.seed);
  // Echo of the echo is byte-stable.
  CHECK(echo_scenario_json(back) == echo);
}

TEST_CASE("csv formatting: round-trip doubles, quoting, header-only") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1.0) == "1");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);

  CsvTable t({"a", "b"});
  CHECK(t.to_string() == "a,b\n");
  t.add_row({std::string("x,\"y\""), 2.5});
  CHECK(t.to_string() == "a,b\n\"x,\"\"y\"\"\",2.5\n");
  CHECK_THROWS_AS(t.add_row({1.0}), ConfigError);
}

TEST_CASE("compare and convergence drivers produce the documented shapes") {
  const ScenarioPack pack = parse_pack_json(kMinimalScenario);
  const CsvTable cmp = compare_csv(pack, 2000, 5);
  const std::string header = cmp.to_string().substr(0, cmp.to_string().find('\n'));
  CHECK(header ==
        "scenario_id,re_u_ref,im_u_ref,re_y_adj,im_y_adj,re_y_eur,im_y_eur,stderr_adj,stderr_eur,"
        "gap_adj,gap_eur");
  CHECK(cmp.rows() == 1);

  const ConvergenceResult conv = convergence_study(pack.scenarios[0], 3, 4000, 5);
  CHECK(conv.levels.size() == 3);
  const CsvTable ct = convergence_csv(conv);
  CHECK(ct.rows() == 4);  // 3 data rows + fitted ratio row
  CHECK(ct.to_string().substr(0, ct.to_string().find('\n')) == "dt,abs_error,stderr");
}

TEST_CASE("convergence refuses non-refinable tables") {
  Scenario scn = parse_scenario_json(kMinimalScenario);
  scn.coeffs.sigma[2] = Complex{2, 0};
  CHECK_THROWS_AS(convergence_study(scn, 3, 1000, 5), ConfigError);
}

TEST_CASE("end-to-end determinism of the emitted bytes") {
  const ScenarioPack pack = parse_pack_json(kMinimalScenario);
  const CsvTable a = compare_csv(pack, 3000, 11);
  const CsvTable b = compare_csv(pack, 3000, 11);
  CHECK(a.to_string() == b.to_string());

  const CsvTable c = verify_ito_csv(pack, 11, std::nullopt);
  const CsvTable d = verify_ito_csv(pack, 11, std::nullopt);
  CHECK(c.to_string() == d.to_string());
  CHECK(c.rows() == 2);  // both correction flags

  const CsvTable e = verify_ito_csv(pack, 11, true);
  CHECK(e.rows() == 1);
}

TEST_CASE("bsde and pde csv emission") {
  const ScenarioPack pack = parse_pack_json(kMinimalScenario);
  const CsvTable bsde = solve_bsde_csv(pack.scenarios[0], 3000, 13);
  CHECK(bsde.rows() >= 2);  // one adjoint row + euler rows
  const CsvTable pde = solve_pde_csv(pack.scenarios[0]);
  CHECK(pde.rows() > 0);
  const CsvTable dump = path_dump_csv(pack.scenarios[0], 3, 13);
  CHECK(dump.rows() == 3 * 5);  // (cells + 1) rows per path
}

TEST_CASE("verify_algebra family reports all checks passing") {
  RunReport report;
  const CsvTable csv = verify_algebra_csv(123, &report);
  CHECK(csv.rows() == 5);
  CHECK(report.all_pass());
}
