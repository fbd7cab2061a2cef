#pragma once

// Polynomials in one complex variable, the admissible class for terminal
// data and driver inhomogeneities: entire, with exact derivatives of every
// order and finite Gaussian moments of every power.

#include <functional>
#include <vector>

#include "cfk/types.hpp"

namespace cfk {

class Poly {
 public:
  Poly() : coeffs_(1, Complex{0.0, 0.0}) {}
  explicit Poly(std::vector<Complex> coeffs);

  static Poly constant(Complex c) { return Poly{{c}}; }
  // c * x^degree
  static Poly monomial(int degree, Complex c = Complex{1.0, 0.0});

  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  const std::vector<Complex>& coeffs() const { return coeffs_; }
  Complex coeff(int k) const;
  bool is_zero() const;

  // Horner evaluation; throws OverflowError if the result leaves the
  // double range.
  Complex operator()(Complex x) const;

  // Formal complex derivative of the given order (>= 1).
  Poly derivative(int order = 1) const;

  // q with q(x) = p(x + c), by binomial recombination. shifted(0) is exact.
  Poly shifted(Complex c) const;

  Poly& operator+=(const Poly& rhs);
  friend Poly operator+(Poly lhs, const Poly& rhs) { return lhs += rhs; }
  Poly& operator*=(Complex c);
  friend Poly operator*(Complex c, Poly p) { return p *= c; }

  friend bool operator==(const Poly&, const Poly&) = default;

 private:
  std::vector<Complex> coeffs_;  // lowest degree first, at least one entry
};

// One polynomial per grid cell, piecewise constant in time.
class PiecewisePoly {
 public:
  PiecewisePoly() = default;
  // The same polynomial on every cell.
  PiecewisePoly(const Poly& p, int cells) : per_cell_(cells, p) {}
  explicit PiecewisePoly(std::vector<Poly> per_cell) : per_cell_(std::move(per_cell)) {}

  int cells() const { return static_cast<int>(per_cell_.size()); }
  const Poly& at(int k) const { return per_cell_.at(k); }
  int max_degree() const;
  bool is_zero() const;

 private:
  std::vector<Poly> per_cell_;
};

// Max Cauchy-Riemann defect of f = u + iv at x, by central differences of
// step h in each real direction: max(|u_x1 - v_x2|, |u_x2 + v_x1|).
double cr_residual(const std::function<Complex(Complex)>& f, Complex x, double step);

}  // namespace cfk
