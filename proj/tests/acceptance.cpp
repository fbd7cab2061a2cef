// Acceptance battery: runs every criterion on the shipped scenario pack at
// a pinned master seed and prints one PASS/FAIL line per check. Exits
// nonzero if any check fails. Artifacts (CSV files plus the normalized
// config echo) land in the output directory.
//
//   acceptance <config.json> [out_dir] [master_seed]

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <string>

#include "cfk/config.hpp"
#include "cfk/report.hpp"
#include "cfk/suite.hpp"

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <config.json> [out_dir] [master_seed]\n";
    return 2;
  }
  const std::string config_path = argv[1];
  const std::string out_dir = (argc > 2) ? argv[2] : "acceptance_out";
  const std::uint64_t seed = (argc > 3) ? std::strtoull(argv[3], nullptr, 10) : 2026;

  try {
    const cfk::ScenarioPack pack = cfk::load_pack(config_path);
    const cfk::SuiteOutputs out = cfk::run_suite(pack, seed);
    cfk::write_outputs(out, pack, out_dir);

    std::size_t failed = 0;
    for (const cfk::CheckRow& row : out.report.rows) {
      std::cout << (row.pass ? "PASS" : "FAIL") << ' ' << row.check_id;
      if (row.scenario_id != "-") std::cout << " [" << row.scenario_id << "]";
      std::cout << " value=" << cfk::format_double(row.value)
                << " tol=" << cfk::format_double(row.tolerance);
      if (!row.note.empty()) std::cout << " (" << row.note << ")";
      std::cout << '\n';
      if (!row.pass) ++failed;
    }
    std::cout << (failed ? "FAILED " : "PASSED ") << (out.report.rows.size() - failed) << "/"
              << out.report.rows.size() << " checks; artifacts in " << out_dir << '\n';
    return failed ? 1 : 0;
  } catch (const std::exception& e) {
    std::cerr << "acceptance: " << e.what() << '\n';
    return 2;
  }
}
