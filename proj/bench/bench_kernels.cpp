// Timing comparison of the serial reference kernels against the OpenMP
// policy on the hot paths: increment generation, forward simulation,
// adjoint weights + estimator, and the Euler regression solve. Both
// policies must produce bit-identical results; this binary also asserts
// that while it measures.

#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "cfk/bsde.hpp"
#include "cfk/parallel.hpp"
#include "cfk/paths.hpp"
#include "cfk/scenario.hpp"

using namespace cfk;

namespace {

Scenario bench_scenario(int cells) {
  Scenario scn;
  scn.id = "bench";
  scn.grid = TimeGrid::uniform(0.0, 1.0, cells);
  scn.coeffs = CoefficientTable::broadcast(Complex{1.0, 0.0}, Complex{0.0, 0.0}, Complex{0.5, 0.1},
                                           Complex{0.4, 0.0}, Complex{0.2, 0.0}, cells);
  scn.h = Poly{{Complex{0.0, 0.0}, Complex{1.0, 0.0}, Complex{0.0, 0.0}, Complex{0.25, 0.0}}};
  scn.g_tilde = PiecewisePoly{Poly{{Complex{0.3, 0.1}, Complex{0.5, 0.0}}}, cells};
  scn.x0 = Complex{0.8, 0.3};
  return scn;
}

template <typename Fn>
double time_ms(Fn&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

void row(const char* name, double serial_ms, double parallel_ms, bool identical) {
  std::printf("%-24s %10.1f ms %10.1f ms   x%.2f   %s\n", name, serial_ms, parallel_ms,
              serial_ms / parallel_ms, identical ? "bit-identical" : "MISMATCH");
  if (!identical) std::exit(1);
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t n_paths = (argc > 1) ? std::strtoull(argv[1], nullptr, 10) : 200000;
  const int cells = 64;
  const Scenario scn = bench_scenario(cells);
  const std::uint64_t seed = 42;

  std::printf("n_paths = %zu, cells = %d\n", n_paths, cells);
  std::printf("%-24s %13s %13s %7s\n", "kernel", "serial", "openmp", "speedup");

  exec::set_policy(exec::Policy::Serial);
  double s_ms = time_ms([&] { sample_increments(seed, n_paths, scn.grid); });
  exec::set_policy(exec::Policy::Parallel);
  double p_ms = time_ms([&] { sample_increments(seed, n_paths, scn.grid); });
  exec::set_policy(exec::Policy::Serial);
  const PathBatch batch_s = sample_increments(seed, n_paths, scn.grid);
  exec::set_policy(exec::Policy::Parallel);
  const PathBatch batch_p = sample_increments(seed, n_paths, scn.grid);
  row("sample_increments", s_ms, p_ms,
      batch_s.raw_db1() == batch_p.raw_db1() && batch_s.raw_db2() == batch_p.raw_db2());

  exec::set_policy(exec::Policy::Serial);
  s_ms = time_ms([&] { simulate_forward(scn.x0, scn.coeffs, batch_s); });
  const ForwardPaths fwd_s = simulate_forward(scn.x0, scn.coeffs, batch_s);
  exec::set_policy(exec::Policy::Parallel);
  p_ms = time_ms([&] { simulate_forward(scn.x0, scn.coeffs, batch_p); });
  const ForwardPaths fwd_p = simulate_forward(scn.x0, scn.coeffs, batch_p);
  row("simulate_forward", s_ms, p_ms, fwd_s.raw() == fwd_p.raw());

  exec::set_policy(exec::Policy::Serial);
  BsdeEstimate y_s;
  s_ms = time_ms([&] { y_s = solve_y_adjoint(scn, 0.0, scn.x0, n_paths, seed); });
  exec::set_policy(exec::Policy::Parallel);
  BsdeEstimate y_p;
  p_ms = time_ms([&] { y_p = solve_y_adjoint(scn, 0.0, scn.x0, n_paths, seed); });
  row("solve_y_adjoint", s_ms, p_ms, y_s.y == y_p.y && y_s.y_se == y_p.y_se);

  exec::set_policy(exec::Policy::Serial);
  EulerSolution e_s;
  s_ms = time_ms([&] { e_s = solve_euler_regression(scn, scn.basis_degree(), n_paths, seed); });
  exec::set_policy(exec::Policy::Parallel);
  EulerSolution e_p;
  p_ms = time_ms([&] { e_p = solve_euler_regression(scn, scn.basis_degree(), n_paths, seed); });
  row("solve_euler_regression", s_ms, p_ms,
      e_s.y0.y == e_p.y0.y && e_s.y0.y_se == e_p.y0.y_se);

  return 0;
}
