#include <doctest.h>

#include <cmath>

#include "cfk/pde.hpp"
#include "test_support.hpp"

using namespace cfk;

namespace {

// Test-only oracle: explicit backward time-stepping of the transport
// equation with the spatial dependence kept exact (polynomial coefficient
// vector), RK4 in time. Independent of the closed-form characteristics
// construction; shares only polynomial arithmetic.
Poly oracle_poly(const Scenario& scn, double t_query, int substeps_per_cell = 200) {
  const TimeGrid& grid = scn.grid;
  Poly u = scn.h;
  auto rhs = [&](const Poly& v, int cell) {
    const std::size_t k = static_cast<std::size_t>(cell);
    Poly d = scn.g_tilde.at(cell);
    d += scn.coeffs.alpha[k] * v;
    const Complex drift =
        scn.coeffs.beta[k] * scn.coeffs.sigma[k] + scn.coeffs.theta[k] * scn.coeffs.gamma[k];
    d += drift * v.derivative();
    return d;
  };
  for (int cell = grid.cells() - 1; cell >= 0; --cell) {
    const double lo = std::max(grid.knot(cell), t_query);
    const double hi = grid.knot(cell + 1);
    if (hi <= t_query) break;
    const double width = hi - lo;
    const int m = substeps_per_cell;
    const double h = width / m;
    for (int i = 0; i < m; ++i) {
      // dV/dtau = rhs(V) marching tau = T - t upward.
      const Poly k1 = rhs(u, cell);
      const Poly k2 = rhs(u + Complex{0.5 * h, 0} * k1, cell);
      const Poly k3 = rhs(u + Complex{0.5 * h, 0} * k2, cell);
      const Poly k4 = rhs(u + Complex{h, 0} * k3, cell);
      Poly incr = k1;
      incr += Complex{2, 0} * k2;
      incr += Complex{2, 0} * k3;
      incr += k4;
      u += Complex{h / 6.0, 0} * incr;
    }
    if (lo == t_query) break;
  }
  return u;
}

Scenario make_scenario(int cells, Complex sigma, Complex gamma, Complex alpha, Complex beta,
                       Complex theta, Poly h, Poly g) {
  Scenario scn;
  scn.id = "test";
  scn.grid = TimeGrid::uniform(0.0, 1.0, cells);
  scn.coeffs = CoefficientTable::broadcast(sigma, gamma, alpha, beta, theta, cells);
  scn.h = std::move(h);
  scn.g_tilde = PiecewisePoly{std::move(g), cells};
  scn.x0 = Complex{0.4, 0.1};
  return scn;
}

Scenario random_scenario(std::mt19937_64& rng) {
  const int cells = 4 + static_cast<int>(rng() % 12);
  Scenario scn;
  scn.id = "random";
  scn.grid = TimeGrid::uniform(0.0, 1.0, cells);
  auto table = [&](double mag) {
    std::vector<Complex> t(static_cast<std::size_t>(cells));
    for (Complex& v : t) v = test::uniform_complex(rng, -mag, mag);
    return t;
  };
  scn.coeffs.sigma = table(1.0);
  scn.coeffs.gamma = table(1.0);
  scn.coeffs.alpha = table(1.0);
  scn.coeffs.beta = table(1.0);
  scn.coeffs.theta = table(1.0);
  auto poly = [&](int max_degree) {
    std::vector<Complex> c;
    const int d = 1 + static_cast<int>(rng() % static_cast<unsigned>(max_degree));
    for (int k = 0; k <= d; ++k) c.push_back(test::uniform_complex(rng, -1, 1));
    return Poly{std::move(c)};
  };
  scn.h = poly(4);
  std::vector<Poly> gt;
  for (int k = 0; k < cells; ++k) gt.push_back(poly(3));
  scn.g_tilde = PiecewisePoly{std::move(gt)};
  scn.x0 = test::uniform_complex(rng, -1, 1);
  return scn;
}

const Poly kX2{{Complex{0, 0}, Complex{0, 0}, Complex{1, 0}}};
const Poly kX{{Complex{0, 0}, Complex{1, 0}}};

}  // namespace

TEST_CASE("exp_moment against composite Simpson quadrature") {
  auto simpson = [](Complex a, double dt, int j) {
    const int m = 2000;
    const double h = dt / m;
    Complex acc{0, 0};
    auto f = [&](double u) { return std::exp(a * u) * std::pow(u, j); };
    for (int i = 0; i < m; i += 2) {
      acc += f(i * h) + 4.0 * f((i + 1) * h) + f((i + 2) * h);
    }
    return acc * (h / 3.0);
  };
  for (Complex a : {Complex{0, 0}, Complex{1e-9, 0}, Complex{1, 2}, Complex{-3, 5}, Complex{-8, 0}}) {
    for (double dt : {0.015625, 0.2, 1.0}) {
      for (int j : {0, 1, 3, 8}) {
        const Complex got = exp_moment(a, dt, j);
        const Complex want = simpson(a, dt, j);
        CHECK(std::abs(got - want) <= 1e-9 * std::max(1.0, std::abs(want)));
      }
    }
  }
}

TEST_CASE("trivial coefficients: U is h at every t") {
  const Scenario scn = make_scenario(16, {1, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}, kX2, Poly{});
  const PdeSolution sol{scn};
  for (double t : {0.0, 0.25, 0.7, 1.0}) {
    test::check_close(sol.u(t, {1.5, -0.5}), kX2(Complex{1.5, -0.5}), 1e-14);
  }
}

TEST_CASE("constant alpha: exponential integrating factor") {
  const Complex a{0.8, -0.3};
  const Scenario scn = make_scenario(16, {1, 0}, {0, 0}, a, {0, 0}, {0, 0}, kX2, Poly{});
  const PdeSolution sol{scn};
  for (double t : {0.0, 0.5, 0.9375}) {
    const Complex x{0.7, 0.2};
    const Complex want = std::exp(a * (1.0 - t)) * kX2(x);
    test::check_rel(sol.u(t, x), want, 1e-12);
  }
}

TEST_CASE("constant source: direct time integration") {
  const Scenario scn =
      make_scenario(8, {1, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}, kX2, Poly::constant({1, 0}));
  const PdeSolution sol{scn};
  for (double t : {0.0, 0.375, 1.0}) {
    const Complex x{-0.4, 1.1};
    test::check_rel(sol.u(t, x), kX2(x) + Complex{1.0 - t, 0}, 1e-13);
  }
}

TEST_CASE("solve_ux: analytic derivative and finite-difference crosscheck") {
  SUBCASE("trivial coefficients, h = x^2") {
    const Scenario scn = make_scenario(8, {1, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}, kX2, Poly{});
    const PdeSolution sol{scn};
    test::check_close(sol.ux(0.3, {0.9, -1.2}), 2.0 * Complex{0.9, -1.2}, 1e-13);
  }

  SUBCASE("alpha = a, h = x: U_x = exp(a (T - t))") {
    const Complex a{0.5, 0.25};
    const Scenario scn = make_scenario(8, {1, 0}, {0, 0}, a, {0, 0}, {0, 0}, kX, Poly{});
    const PdeSolution sol{scn};
    test::check_rel(sol.ux(0.25, {2.0, 1.0}), std::exp(a * 0.75), 1e-12);
  }

  SUBCASE("finite-difference oracle on a random scenario") {
    auto rng = test::make_rng(41);
    const Scenario scn = random_scenario(rng);
    const PdeSolution sol{scn};
    const double h = 1e-5;
    for (int i = 0; i < 10; ++i) {
      const Complex x = test::uniform_complex(rng, -2, 2);
      const double t = test::uniform(rng, 0.0, 1.0);
      const Complex fd = (sol.u(t, x + Complex{h, 0}) - sol.u(t, x - Complex{h, 0})) / (2 * h);
      CHECK(std::abs(fd - sol.ux(t, x)) <= 1e-6 * std::max(1.0, std::abs(sol.ux(t, x))));
    }
  }
}

TEST_CASE("pde_residual certifies the construction") {
  SUBCASE("trivial coefficients") {
    const Scenario scn = make_scenario(8, {1, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}, kX2, Poly{});
    const PdeSolution sol{scn};
    CHECK(pde_residual(sol, 0.45, {1.0, 1.0}, 1e-5) <= 1e-6);
  }
  SUBCASE("alpha = 1 at mid horizon") {
    const Scenario scn =
        make_scenario(8, {1, 0}, {0, 0}, {1, 0}, {0, 0}, {0, 0}, kX2, Poly{});
    const PdeSolution sol{scn};
    CHECK(pde_residual(sol, 0.5 + 0.03, {0.8, -0.6}, 1e-5) <= 1e-6);
  }
  SUBCASE("step outside the cell is rejected") {
    const Scenario scn = make_scenario(8, {1, 0}, {0, 0}, {1, 0}, {0, 0}, {0, 0}, kX2, Poly{});
    const PdeSolution sol{scn};
    CHECK_THROWS_AS(pde_residual(sol, 0.125, {0, 0}, 1e-5), GridMismatchError);
  }
}

TEST_CASE("randomized suite against the RK4 time-stepping oracle") {
  auto rng = test::make_rng(42);
  for (int rep = 0; rep < 10; ++rep) {
    const Scenario scn = random_scenario(rng);
    const PdeSolution sol{scn};
    double max_rel = 0.0;
    for (int i = 0; i < 10; ++i) {
      const double t = test::uniform(rng, 0.0, 1.0);
      const Poly want = oracle_poly(scn, t);
      for (int p = 0; p < 2; ++p) {
        const Complex x = test::uniform_complex(rng, -2, 2);
        const Complex u_want = want(x);
        const double rel = std::abs(sol.u(t, x) - u_want) / std::max(1.0, std::abs(u_want));
        max_rel = std::max(max_rel, rel);
      }
    }
    CHECK(max_rel <= 1e-5);

    // Residual certifier on the same scenario, probing cell interiors.
    double max_residual = 0.0;
    for (int i = 0; i < 20; ++i) {
      const int cell = static_cast<int>(rng() % static_cast<unsigned>(scn.grid.cells()));
      const double t = scn.grid.knot(cell) + 0.5 * scn.grid.dt(cell);
      const double step = std::min(1e-5, 0.25 * scn.grid.dt(cell));
      const Complex x = test::uniform_complex(rng, -2, 2);
      max_residual = std::max(max_residual, pde_residual(sol, t, x, step));
    }
    CHECK(max_residual <= 1e-5);
  }
}

TEST_CASE("terminal identity is exact and the flow property holds") {
  auto rng = test::make_rng(43);
  const Scenario scn = random_scenario(rng);
  const PdeSolution sol{scn};

  CHECK(sol.poly_at(scn.grid.t_end()) == scn.h);

  const int mid = scn.grid.cells() / 2;
  const PdeSolution head{scn.head(std::max(1, mid), sol.poly_at(scn.grid.knot(std::max(1, mid))))};
  for (int i = 0; i < 10; ++i) {
    const Complex x = test::uniform_complex(rng, -2, 2);
    const Complex direct = sol.u(0.0, x);
    const Complex composed = head.u(0.0, x);
    CHECK(std::abs(direct - composed) <= 1e-10 * std::max(1.0, std::abs(direct)));
  }
}

TEST_CASE("U(t, .) satisfies the Cauchy-Riemann equations") {
  auto rng = test::make_rng(44);
  const Scenario scn = random_scenario(rng);
  const PdeSolution sol{scn};
  for (int i = 0; i < 10; ++i) {
    const double t = test::uniform(rng, 0.0, 1.0);
    const Complex x = test::uniform_complex(rng, -2, 2);
    CHECK(cr_residual([&](Complex z) { return sol.u(t, z); }, x, 1e-5) <= 1e-6);
  }
}
