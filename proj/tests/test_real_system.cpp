#include <doctest.h>

#include "cfk/real_system.hpp"
#include "test_support.hpp"

using namespace cfk;

namespace {

const Poly kX{{Complex{0, 0}, Complex{1, 0}}};
const Poly kX2{{Complex{0, 0}, Complex{0, 0}, Complex{1, 0}}};

Scenario make_scenario(int cells, Complex sigma, Complex gamma, Complex alpha, Complex beta,
                       Complex theta, Poly h, Poly g, Complex x0) {
  Scenario scn;
  scn.id = "test";
  scn.grid = TimeGrid::uniform(0.0, 1.0, cells);
  scn.coeffs = CoefficientTable::broadcast(sigma, gamma, alpha, beta, theta, cells);
  scn.h = std::move(h);
  scn.g_tilde = PiecewisePoly{std::move(g), cells};
  scn.x0 = x0;
  return scn;
}

}  // namespace

TEST_CASE("z-matrix block layout on the pinned example") {
  const RealTriple rt = to_real({0, 0}, {1, 2}, {3, 4});
  CHECK(rt.zmat[0] == 4.0);
  CHECK(rt.zmat[1] == 6.0);
  CHECK(rt.zmat[2] == 2.0);
  CHECK(rt.zmat[3] == -2.0);
}

TEST_CASE("tau = 0 gives the [[a,-b],[b,a]] shape") {
  const RealTriple rt = to_real({0, 0}, {1.5, -2.5}, {0, 0});
  CHECK(rt.zmat[0] == rt.zmat[3]);
  CHECK(rt.zmat[1] == -rt.zmat[2]);
  CHECK(anti_cl_part_magnitude(rt.zmat) == 0.0);

  // Symmetric traceless when z = 0.
  const RealTriple rg = to_real({0, 0}, {0, 0}, {0.7, -0.1});
  CHECK(rg.zmat[1] == rg.zmat[2]);
  CHECK(rg.zmat[0] == -rg.zmat[3]);
  CHECK(cl_part_magnitude(rg.zmat) == 0.0);
}

TEST_CASE("roundtrip is an exact linear bijection") {
  auto rng = test::make_rng(81);
  for (int i = 0; i < 10000; ++i) {
    const Complex y = test::uniform_complex(rng, -10, 10);
    const Complex z = test::uniform_complex(rng, -10, 10);
    const Complex tau = test::uniform_complex(rng, -10, 10);
    const ComplexTriple back = from_real(to_real(y, z, tau));
    CHECK(std::abs(back.y - y) <= 1e-12);
    CHECK(std::abs(back.z - z) <= 1e-12);
    CHECK(std::abs(back.tau - tau) <= 1e-12);
  }
}

TEST_CASE("real driver recombination on pinned cases") {
  SUBCASE("zero driver") {
    const Scenario scn =
        make_scenario(4, {1, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}, kX2, Poly{}, {0, 0});
    RealDriverPoint p;
    p.cell = 1;
    p.x = {0.3, -0.2};
    p.y = {1.0, 2.0};
    p.zmat = {1.0, 2.0, 3.0, 4.0};
    const auto f = eval_real_driver(scn, p);
    CHECK(f[0] == 0.0);
    CHECK(f[1] == 0.0);
  }

  SUBCASE("g = z (beta = 1): half-sum / half-difference") {
    const Scenario scn =
        make_scenario(4, {1, 0}, {0, 0}, {0, 0}, {1, 0}, {0, 0}, kX2, Poly{}, {0, 0});
    RealDriverPoint p;
    p.cell = 0;
    p.zmat = {1.0, 2.0, 3.0, 4.0};
    const auto f = eval_real_driver(scn, p);
    CHECK(f[0] == doctest::Approx(0.5 * (1.0 + 4.0)));
    CHECK(f[1] == doctest::Approx(0.5 * (2.0 - 3.0)));
    CHECK(driver_cr_residual(scn, p, 1e-5) <= 1e-8);
  }
}

TEST_CASE("driver Cauchy-Riemann structure on random linear scenarios") {
  auto rng = test::make_rng(82);
  for (int rep = 0; rep < 5; ++rep) {
    const Scenario scn = make_scenario(
        4, test::uniform_complex(rng, -1, 1), test::uniform_complex(rng, -1, 1),
        test::uniform_complex(rng, -1, 1), test::uniform_complex(rng, -1, 1),
        test::uniform_complex(rng, -1, 1),
        Poly{{test::uniform_complex(rng, -1, 1), test::uniform_complex(rng, -1, 1),
              test::uniform_complex(rng, -1, 1)}},
        Poly{{test::uniform_complex(rng, -1, 1), test::uniform_complex(rng, -1, 1),
              test::uniform_complex(rng, -1, 1)}},
        {0, 0});
    for (int i = 0; i < 4; ++i) {
      RealDriverPoint p;
      p.cell = static_cast<int>(rng() % 4);
      p.x = {test::uniform(rng, -2, 2), test::uniform(rng, -2, 2)};
      p.y = {test::uniform(rng, -2, 2), test::uniform(rng, -2, 2)};
      for (double& v : p.zmat) v = test::uniform(rng, -2, 2);
      CHECK(driver_cr_residual(scn, p, 1e-5) <= 1e-6);
    }
  }
}

TEST_CASE("constraint structure on degenerate scenarios") {
  SUBCASE("gamma = 0: anti part vanishes at regression accuracy") {
    const Scenario scn =
        make_scenario(16, {1, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}, kX, Poly{}, {0.5, 0.1});
    const EulerSolution eur = solve_euler_regression(scn, scn.basis_degree(), 50000, 91);
    const ConstraintReport rep = check_constraint_structure(scn, eur, ConstrainedSystem::SigmaSystem);
    CHECK(rep.max_violation <= 0.05 * std::max(rep.scale, 1.0));
  }

  SUBCASE("sigma = 0, h = x^2: cl part vanishes") {
    const Scenario scn =
        make_scenario(16, {0, 0}, {1, 0}, {0, 0}, {0, 0}, {0, 0}, kX2, Poly{}, {0.5, 0.1});
    const EulerSolution eur = solve_euler_regression(scn, scn.basis_degree(), 50000, 92);
    const ConstraintReport rep = check_constraint_structure(scn, eur, ConstrainedSystem::GammaSystem);
    CHECK(rep.max_violation <= 0.05 * rep.scale);
  }

  SUBCASE("sigma = gamma = 0: the whole z-matrix is zero") {
    const Scenario scn =
        make_scenario(16, {0, 0}, {0, 0}, {0.5, 0}, {0, 0}, {0, 0}, kX2,
                      Poly{{Complex{0.1, 0}, Complex{0.2, 0}}}, {0.5, 0.1});
    const EulerSolution eur = solve_euler_regression(scn, scn.basis_degree(), 1000, 93);
    const ConstraintReport sig = check_constraint_structure(scn, eur, ConstrainedSystem::SigmaSystem);
    const ConstraintReport gam = check_constraint_structure(scn, eur, ConstrainedSystem::GammaSystem);
    CHECK(sig.max_violation == 0.0);
    CHECK(gam.max_violation == 0.0);
  }

  SUBCASE("preconditions are enforced") {
    const Scenario scn =
        make_scenario(8, {1, 0}, {1, 0}, {0, 0}, {0, 0}, {0, 0}, kX, Poly{}, {0, 0});
    const EulerSolution eur = solve_euler_regression(scn, 2, 5000, 94);
    CHECK_THROWS_AS(check_constraint_structure(scn, eur, ConstrainedSystem::SigmaSystem),
                    ConfigError);
    CHECK_THROWS_AS(check_constraint_structure(scn, eur, ConstrainedSystem::GammaSystem),
                    ConfigError);
  }
}

TEST_CASE("non-finite inputs are rejected") {
  CHECK_THROWS_AS(to_real({std::nan(""), 0}, {0, 0}, {0, 0}), ConfigError);
}
