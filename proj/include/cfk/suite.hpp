#pragma once

// Experiment drivers (compare, convergence) and the acceptance battery.
// Every tolerance is pinned here as a named constant; the battery emits one
// CheckRow per assertion plus the CSV artifacts of each check family, and
// the `suite` entry point reruns itself to certify byte determinism.

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "cfk/bsde.hpp"
#include "cfk/config.hpp"
#include "cfk/report.hpp"
#include "cfk/scenario.hpp"

namespace cfk {

namespace tol {

inline constexpr double kAlgebraRel = 1e-12;       // field isomorphism, componentwise
inline constexpr double kMomentSigmas = 5.0;       // raw moment checks
inline constexpr double kMeanSigmas = 3.0;         // mean-level Monte Carlo checks
inline constexpr double kDtSlack = 4.0;            // C in "... + C * dt * scale"
inline constexpr double kFdOfMcFloor = 1e-4;       // FD-of-MC absolute floor
inline constexpr double kRoundingFloor = 1e-9;     // exact-degenerate rounding floor
inline constexpr double kFieldRel = 0.05;          // Z/Tau field agreement
inline constexpr double kPdeResidualRel = 1e-5;    // characteristics certifier
inline constexpr double kFlowRel = 1e-10;          // semigroup property
inline constexpr double kCrResidual = 1e-6;        // FD Cauchy-Riemann checks
inline constexpr double kRoundtrip = 1e-12;        // linear bijections
inline constexpr double kRatioLo = 1.7;            // Euler order window per halving
inline constexpr double kRatioHi = 2.3;

}  // namespace tol

struct CompareResult {
  Complex u_ref{0.0, 0.0};
  BsdeEstimate adjoint;
  BsdeEstimate euler;
  double gap_adjoint = 0.0;
  double gap_euler = 0.0;
};

CompareResult compare_scenario(const Scenario& scn, std::size_t n_paths, std::uint64_t seed);

struct ConvergenceLevel {
  double dt = 0.0;
  double abs_error = 0.0;
  double se = 0.0;
};

struct ConvergenceResult {
  std::vector<ConvergenceLevel> levels;
  double fitted_ratio = 0.0;  // geometric mean error ratio per dt halving
};

// Dyadic refinements of a constant-coefficient scenario; throws ConfigError
// if the tables are not refinable.
ConvergenceResult convergence_study(const Scenario& scn, int levels, std::size_t n_paths,
                                    std::uint64_t master_seed);

struct SuiteOutputs {
  RunReport report;
  std::map<std::string, std::string> files;  // relative name -> bytes
};

// Criteria 1..11 with artifacts; `run_suite` additionally reruns the battery
// and appends the byte-determinism criterion.
SuiteOutputs run_battery(const ScenarioPack& pack, std::uint64_t master_seed);
SuiteOutputs run_suite(const ScenarioPack& pack, std::uint64_t master_seed);

void write_outputs(const SuiteOutputs& out, const ScenarioPack& pack, const std::string& out_dir);

// CLI check families.
CsvTable verify_algebra_csv(std::uint64_t seed, RunReport* report = nullptr);
CsvTable verify_ito_csv(const ScenarioPack& pack, std::uint64_t master_seed,
                        std::optional<bool> include_correction);
CsvTable solve_pde_csv(const Scenario& scn);
CsvTable solve_bsde_csv(const Scenario& scn, std::size_t n_paths, std::uint64_t seed);
CsvTable compare_csv(const ScenarioPack& pack, std::size_t n_paths_override,
                     std::uint64_t master_seed);
CsvTable convergence_csv(const ConvergenceResult& result);
CsvTable real_equiv_csv(const ScenarioPack& pack, std::uint64_t master_seed,
                        RunReport* report = nullptr);

// First-n-paths dump: (path_id, k, t_k, Re X, Im X).
CsvTable path_dump_csv(const Scenario& scn, std::size_t n_dump, std::uint64_t seed);

}  // namespace cfk
