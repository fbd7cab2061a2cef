#include <doctest.h>

#include "cfk/cl2.hpp"
#include "test_support.hpp"

using namespace cfk;

TEST_CASE("cl2 addition matches the componentwise formula") {
  const Cl2 sum = cl_add({1, 2}, {3, 4});
  CHECK(sum.a == 4.0);
  CHECK(sum.b == 6.0);

  CHECK(cl_add({-2.5, 7.0}, {0, 0}) == Cl2{-2.5, 7.0});
  CHECK(cl_add({1, -1}, {-1, 1}) == Cl2{0, 0});
}

TEST_CASE("cl2 multiplication: product formula, identity, i^2 = -1") {
  const Cl2 prod = cl_mul({1, 2}, {3, 4});
  CHECK(prod.a == -5.0);
  CHECK(prod.b == 10.0);

  CHECK(cl_mul({-3.25, 0.5}, {1, 0}) == Cl2{-3.25, 0.5});
  CHECK(cl_mul({0, 1}, {0, 1}) == Cl2{-1, 0});
}

TEST_CASE("cl2 inverse: closed form and the singular case") {
  const Cl2 inv = cl_inv({3, 4});
  CHECK(inv.a == doctest::Approx(0.12).epsilon(1e-14));
  CHECK(inv.b == doctest::Approx(-0.16).epsilon(1e-14));

  CHECK(cl_inv({1, 0}) == Cl2{1, 0});
  CHECK_THROWS_AS(cl_inv({0, 0}), SingularMatrixError);

  // x * x^-1 = identity within a few ulps.
  auto rng = test::make_rng(11);
  for (int i = 0; i < 1000; ++i) {
    const Cl2 x{test::uniform(rng, -10, 10), test::uniform(rng, -10, 10)};
    const Cl2 unit = cl_mul(x, cl_inv(x));
    CHECK(std::abs(unit.a - 1.0) <= 1e-12);
    CHECK(std::abs(unit.b) <= 1e-12);
  }
}

TEST_CASE("conversions are mutually inverse and definitional") {
  const Cl2 m = cl_from_complex({1, 2});
  CHECK(m == Cl2{1, 2});

  auto rng = test::make_rng(12);
  for (int i = 0; i < 1000; ++i) {
    const Complex z = test::uniform_complex(rng, -10, 10);
    CHECK(cl_to_complex(cl_from_complex(z)) == z);
  }
}

TEST_CASE("field isomorphism with std::complex on random pairs") {
  // Oracle: std::complex arithmetic on the same operands.
  auto rng = test::make_rng(13);
  for (int i = 0; i < 10000; ++i) {
    const Complex z1 = test::uniform_complex(rng, -10, 10);
    const Complex z2 = test::uniform_complex(rng, -10, 10);
    const Cl2 x = cl_from_complex(z1);
    const Cl2 y = cl_from_complex(z2);

    test::check_rel(cl_to_complex(cl_add(x, y)), z1 + z2, 1e-12);
    test::check_rel(cl_to_complex(cl_mul(x, y)), z1 * z2, 1e-12);
    if (z1 != Complex{0, 0}) test::check_rel(cl_to_complex(cl_inv(x)), 1.0 / z1, 1e-12);
  }
}

TEST_CASE("multiplication commutes exactly and the class is closed") {
  auto rng = test::make_rng(14);
  for (int i = 0; i < 10000; ++i) {
    const Cl2 x{test::uniform(rng, -10, 10), test::uniform(rng, -10, 10)};
    const Cl2 y{test::uniform(rng, -10, 10), test::uniform(rng, -10, 10)};
    CHECK(cl_mul(x, y) == cl_mul(y, x));

    // Expand a compound expression and assert the [[a,-b],[b,a]] shape.
    const auto m = cl_expand(cl_add(cl_mul(x, y), cl_scale(-1.75, y)));
    CHECK(m[0] == m[3]);
    CHECK(m[1] == -m[2]);
  }
}
