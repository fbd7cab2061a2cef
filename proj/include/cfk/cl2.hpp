#pragma once

// Real 2x2 matrices of the form [[a, -b], [b, a]], stored by their two
// defining reals. Storing only (a, b) makes the shape a type invariant:
// sums, products, real scalings and inverses cannot leave the class.
// (a, b) <-> a + ib is a field isomorphism with the complex numbers.

#include <array>

#include "cfk/types.hpp"

namespace cfk {

struct Cl2 {
  double a = 0.0;
  double b = 0.0;

  friend bool operator==(const Cl2&, const Cl2&) = default;
};

inline Cl2 cl_add(Cl2 x, Cl2 y) { return {x.a + y.a, x.b + y.b}; }

inline Cl2 cl_mul(Cl2 x, Cl2 y) {
  return {x.a * y.a - x.b * y.b, x.a * y.b + x.b * y.a};
}

inline Cl2 cl_scale(double lambda, Cl2 x) { return {lambda * x.a, lambda * x.b}; }

inline Cl2 cl_inv(Cl2 x) {
  const double det = x.a * x.a + x.b * x.b;
  if (det == 0.0) {
    throw SingularMatrixError("cl_inv: matrix (0, 0) has determinant 0");
  }
  return {x.a / det, -x.b / det};
}

inline Cl2 cl_from_complex(Complex z) { return {z.real(), z.imag()}; }

inline Complex cl_to_complex(Cl2 x) { return {x.a, x.b}; }

// Row-major expansion to the full matrix; debug view for shape assertions.
inline std::array<double, 4> cl_expand(Cl2 x) { return {x.a, -x.b, x.b, x.a}; }

}  // namespace cfk
