#include <doctest.h>

#include <cmath>

#include "cfk/parallel.hpp"
#include "cfk/paths.hpp"
#include "test_support.hpp"

using namespace cfk;

namespace {

CoefficientTable coeffs_sg(Complex sigma, Complex gamma, int cells) {
  return CoefficientTable::broadcast(sigma, gamma, {0, 0}, {0, 0}, {0, 0}, cells);
}

}  // namespace

TEST_CASE("same (seed, n, grid) regenerates bitwise") {
  const TimeGrid grid = TimeGrid::uniform(0.0, 1.0, 8);
  const PathBatch a = sample_increments(7, 500, grid);
  const PathBatch b = sample_increments(7, 500, grid);
  CHECK(a.raw_db1() == b.raw_db1());
  CHECK(a.raw_db2() == b.raw_db2());

  const PathBatch c = sample_increments(8, 500, grid);
  CHECK(a.raw_db1() != c.raw_db1());
}

TEST_CASE("increment moments: Gaussian standard-error oracles") {
  const int cells = 64;
  const std::size_t n = 100000;
  const TimeGrid grid = TimeGrid::uniform(0.0, 1.0, cells);
  const double dt = 1.0 / cells;
  const PathBatch batch = sample_increments(2024, n, grid);

  // Component mean at a fixed cell: stderr = sqrt(dt / n).
  std::vector<double> db1(n);
  for (std::size_t j = 0; j < n; ++j) db1[j] = batch.db1(j, 12);
  const MeanStderr m1 = mean_stderr(std::span<const double>(db1));
  CHECK(std::abs(m1.mean) <= 5.0 * std::sqrt(dt / static_cast<double>(n)));

  // Complex pairing at a fixed cell: E[dB dBbar] = 2 dt, E[dB dB] = 0.
  std::vector<Complex> pair(n), sq(n);
  for (std::size_t j = 0; j < n; ++j) {
    pair[j] = batch.db(j, 40) * batch.db_bar(j, 40) - Complex{2.0 * dt, 0.0};
    sq[j] = batch.db(j, 40) * batch.db(j, 40);
  }
  const ComplexMeanStderr mp = mean_stderr(std::span<const Complex>(pair));
  CHECK(std::abs(mp.mean) <= 5.0 * mp.se);
  const ComplexMeanStderr msq = mean_stderr(std::span<const Complex>(sq));
  CHECK(std::abs(msq.mean) <= 5.0 * msq.se);
}

TEST_CASE("memory budget is enforced") {
  const TimeGrid grid = TimeGrid::uniform(0.0, 1.0, 64);
  CHECK_THROWS_AS(sample_increments(1, 1000, grid, 100), ResourceError);
}

TEST_CASE("forward process: degenerate, direct and conjugate noise") {
  const int cells = 32;
  const std::size_t n = 100000;
  const TimeGrid grid = TimeGrid::uniform(0.0, 1.0, cells);
  const PathBatch batch = sample_increments(55, n, grid);
  const Complex x0{0.3, -0.7};

  SUBCASE("sigma = gamma = 0 keeps X at x0") {
    const ForwardPaths paths = simulate_forward(x0, coeffs_sg({0, 0}, {0, 0}, cells), batch);
    for (std::size_t j = 0; j < 50; ++j) {
      CHECK(paths.at(j, cells) == x0);
      CHECK(paths.at(j, cells / 2) == x0);
    }
  }

  auto terminal_component_variances = [&](const ForwardPaths& paths) {
    std::vector<double> re(n), im(n);
    for (std::size_t j = 0; j < n; ++j) {
      const Complex d = paths.at(j, cells) - x0;
      re[j] = d.real();
      im[j] = d.imag();
    }
    auto var = [&](std::span<const double> xs) {
      const MeanStderr ms = mean_stderr(xs);
      double ss = 0.0;
      for (double x : xs) ss += (x - ms.mean) * (x - ms.mean);
      return ss / static_cast<double>(xs.size() - 1);
    };
    return std::pair<double, double>{var(re), var(im)};
  };

  // Sample variance of a Gaussian: stderr ~ var * sqrt(2/n).
  const double var_tol = 5.0 * std::sqrt(2.0 / static_cast<double>(n));

  SUBCASE("sigma = 1: both components have variance T") {
    const ForwardPaths paths = simulate_forward(x0, coeffs_sg({1, 0}, {0, 0}, cells), batch);
    const auto [vre, vim] = terminal_component_variances(paths);
    CHECK(std::abs(vre - 1.0) <= var_tol);
    CHECK(std::abs(vim - 1.0) <= var_tol);
  }

  SUBCASE("gamma = 1: conjugation preserves component variances") {
    const ForwardPaths paths = simulate_forward(x0, coeffs_sg({0, 0}, {1, 0}, cells), batch);
    const auto [vre, vim] = terminal_component_variances(paths);
    CHECK(std::abs(vre - 1.0) <= var_tol);
    CHECK(std::abs(vim - 1.0) <= var_tol);
    // X - x0 = conj(B): check a path identity exactly.
    Complex b{0, 0};
    for (int k = 0; k < cells; ++k) b += batch.db(17, k);
    test::check_close(paths.at(17, cells) - x0, std::conj(b), 1e-13);
  }

  SUBCASE("grid mismatch is rejected") {
    CHECK_THROWS_AS(simulate_forward(x0, coeffs_sg({1, 0}, {0, 0}, cells + 1), batch),
                    GridMismatchError);
  }
}

TEST_CASE("ito_integral: trivial, telescoping and isometry") {
  const int cells = 32;
  const std::size_t n = 100000;
  const TimeGrid grid = TimeGrid::uniform(0.0, 1.0, cells);
  const PathBatch batch = sample_increments(77, n, grid);

  SUBCASE("zero integrand") {
    const std::vector<Complex> zero(cells, Complex{0, 0});
    const auto values = ito_integral(std::span<const Complex>(zero), batch, Against::dB);
    for (std::size_t j = 0; j < 20; ++j) CHECK(values[j] == Complex{0, 0});
  }

  SUBCASE("unit integrand telescopes to the terminal increment sum") {
    const std::vector<Complex> one(cells, Complex{1, 0});
    const auto values = ito_integral(std::span<const Complex>(one), batch, Against::dB);
    for (std::size_t j = 0; j < 20; ++j) {
      Complex direct{0, 0};
      for (int k = 0; k < cells; ++k) direct += batch.db(j, k);
      test::check_close(values[j], direct, 1e-13);
    }
  }

  SUBCASE("isometry with the complex factor 2") {
    const Complex c{0.8, -0.6};
    const std::vector<Complex> f(cells, c);
    const auto values = ito_integral(std::span<const Complex>(f), batch, Against::dB);
    std::vector<double> sq(n);
    for (std::size_t j = 0; j < n; ++j) sq[j] = std::norm(values[j]);
    const MeanStderr ms = mean_stderr(std::span<const double>(sq));
    const double ref = 2.0 * std::norm(c) * 1.0;
    CHECK(std::abs(ms.mean - ref) <= 5.0 * ms.se);
  }

  SUBCASE("left-endpoint functor receives adapted states") {
    const ForwardPaths paths =
        simulate_forward({0.1, 0.2}, coeffs_sg({1, 0}, {0, 0}, cells), batch);
    const auto values = ito_integral([](int, Complex x) { return x; }, paths, batch, Against::dBbar);
    for (std::size_t j = 0; j < 10; ++j) {
      Complex direct{0, 0};
      for (int k = 0; k < cells; ++k) direct += paths.at(j, k) * batch.db_bar(j, k);
      test::check_close(values[j], direct, 1e-12);
    }
  }
}
