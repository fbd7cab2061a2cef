// Command-line front end: scenario configs in, CSV artifacts out.
// Exit codes: 0 ok, 1 config error, 2 tolerance failure, 3 resource limit,
// 4 internal/numeric error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cfk/config.hpp"
#include "cfk/parallel.hpp"
#include "cfk/report.hpp"
#include "cfk/suite.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 1;
  std::size_t paths = 0;  // 0 = per-scenario setting
  bool serial = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool needs_config = true) {
  auto* c = cmd->add_option("--config", opts.config_path, "scenario config (JSON)");
  if (needs_config) c->required();
  cmd->add_option("--seed", opts.seed, "master seed (per-check substreams are derived from it)");
  cmd->add_option("--paths", opts.paths, "override n_paths for every scenario");
  cmd->add_option("--out", opts.out_dir, "output directory");
  cmd->add_flag("--serial", opts.serial, "run the serial reference kernels (results identical)");
}

cfk::ScenarioPack load(const CommonOpts& opts) {
  cfk::ScenarioPack pack = cfk::load_pack(opts.config_path);
  if (opts.paths > 0) {
    for (cfk::Scenario& s : pack.scenarios) s.mc.n_paths = opts.paths;
  }
  return pack;
}

void write_csv(const CommonOpts& opts, const std::string& name, const cfk::CsvTable& table) {
  std::filesystem::create_directories(opts.out_dir);
  const std::string path = (std::filesystem::path(opts.out_dir) / name).string();
  table.write(path);
  std::cout << "wrote " << path << "\n";
}

void write_echo(const CommonOpts& opts, const cfk::ScenarioPack& pack) {
  std::filesystem::create_directories(opts.out_dir);
  const std::string path = (std::filesystem::path(opts.out_dir) / "config_echo.json").string();
  std::ofstream f(path, std::ios::binary);
  f << cfk::echo_pack_json(pack);
  std::cout << "wrote " << path << "\n";
}

int report_failures(const cfk::RunReport& report) {
  std::size_t failed = 0;
  for (const cfk::CheckRow& r : report.rows) {
    std::cout << (r.pass ? "PASS " : "FAIL ") << r.check_id;
    if (r.scenario_id != "-") std::cout << " [" << r.scenario_id << "]";
    std::cout << "  value=" << cfk::format_double(r.value)
              << " tol=" << cfk::format_double(r.tolerance);
    if (!r.note.empty()) std::cout << "  (" << r.note << ")";
    std::cout << "\n";
    if (!r.pass) ++failed;
  }
  if (failed) {
    std::cout << failed << " check(s) failed\n";
    return 2;
  }
  std::cout << "all " << report.rows.size() << " checks passed\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo and characteristics solvers for linear complex BSDEs and the "
               "associated first-order complex PDE"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::optional<bool> include_correction;
  int dt_levels = 3;
  std::size_t dump_paths = 0;

  auto* verify_algebra = app.add_subcommand("verify-algebra", "field-isomorphism checks");
  add_common(verify_algebra, opts, false);

  auto* verify_ito = app.add_subcommand("verify-ito", "Ito identity residuals per scenario");
  add_common(verify_ito, opts);
  verify_ito->add_option("--include-correction", include_correction,
                         "run only the given correction flag (default: both)");

  auto* solve_pde = app.add_subcommand("solve-pde", "evaluate U and U_x on a probe lattice");
  add_common(solve_pde, opts);

  auto* solve_bsde = app.add_subcommand("solve-bsde", "run both BSDE schemes, emit estimates");
  add_common(solve_bsde, opts);
  solve_bsde->add_option("--dump-paths", dump_paths, "also dump the first n forward paths");

  auto* compare = app.add_subcommand("compare", "both BSDE schemes against the PDE reference");
  add_common(compare, opts);

  auto* convergence = app.add_subcommand("convergence", "Euler error over dyadic dt levels");
  add_common(convergence, opts);
  convergence->add_option("--dt-levels", dt_levels, "number of dyadic levels");

  auto* real_equiv = app.add_subcommand("real-equiv", "2-D real system structure report");
  add_common(real_equiv, opts);

  auto* suite = app.add_subcommand("suite", "full acceptance battery");
  add_common(suite, opts);

  CLI11_PARSE(app, argc, argv);

  if (opts.serial) cfk::exec::set_policy(cfk::exec::Policy::Serial);

  try {
    if (verify_algebra->parsed()) {
      cfk::RunReport report;
      write_csv(opts, "algebra.csv", cfk::verify_algebra_csv(opts.seed, &report));
      return report_failures(report);
    }
    const cfk::ScenarioPack pack = load(opts);
    write_echo(opts, pack);

    if (verify_ito->parsed()) {
      write_csv(opts, "ito.csv", cfk::verify_ito_csv(pack, opts.seed, include_correction));
    } else if (solve_pde->parsed()) {
      for (const cfk::Scenario& s : pack.scenarios) {
        write_csv(opts, "pde_" + s.id + ".csv", cfk::solve_pde_csv(s));
      }
    } else if (solve_bsde->parsed()) {
      for (const cfk::Scenario& s : pack.scenarios) {
        const std::size_t n = opts.paths ? opts.paths : s.mc.n_paths;
        write_csv(opts, "bsde_" + s.id + ".csv", cfk::solve_bsde_csv(s, n, opts.seed));
        if (dump_paths > 0) {
          write_csv(opts, "paths_" + s.id + ".csv", cfk::path_dump_csv(s, dump_paths, opts.seed));
        }
      }
    } else if (compare->parsed()) {
      write_csv(opts, "compare.csv", cfk::compare_csv(pack, opts.paths, opts.seed));
    } else if (convergence->parsed()) {
      if (!pack.convergence && pack.scenarios.size() != 1) {
        throw cfk::ConfigError("convergence: config needs a 'convergence' section or exactly one scenario");
      }
      const cfk::Scenario& base =
          pack.convergence ? pack.convergence->scenario : pack.scenarios.front();
      const int levels = pack.convergence && dt_levels == 3 ? pack.convergence->levels : dt_levels;
      std::size_t n = opts.paths ? opts.paths : base.mc.n_paths;
      if (pack.convergence && pack.convergence->n_paths && !opts.paths) {
        n = pack.convergence->n_paths;
      }
      const cfk::ConvergenceResult res = cfk::convergence_study(base, levels, n, opts.seed);
      write_csv(opts, "convergence.csv", cfk::convergence_csv(res));
      std::cout << "fitted error ratio per dt halving: " << cfk::format_double(res.fitted_ratio)
                << "\n";
    } else if (real_equiv->parsed()) {
      cfk::RunReport report;
      write_csv(opts, "real_equiv.csv", cfk::real_equiv_csv(pack, opts.seed, &report));
      return report_failures(report);
    } else if (suite->parsed()) {
      const cfk::SuiteOutputs out = cfk::run_suite(pack, opts.seed);
      cfk::write_outputs(out, pack, opts.out_dir);
      std::cout << "wrote " << out.files.size() << " files to " << opts.out_dir << "\n";
      return report_failures(out.report);
    }
  } catch (const cfk::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const cfk::GridMismatchError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const cfk::ResourceError& e) {
    std::cerr << "resource error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
