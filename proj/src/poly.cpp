#include "cfk/poly.hpp"

#include <algorithm>
#include <sstream>

namespace cfk {

namespace {

void trim_trailing_zeros(std::vector<Complex>& c) {
  while (c.size() > 1 && c.back() == Complex{0.0, 0.0}) c.pop_back();
}

}  // namespace

Poly::Poly(std::vector<Complex> coeffs) : coeffs_(std::move(coeffs)) {
  if (coeffs_.empty()) coeffs_.assign(1, Complex{0.0, 0.0});
  for (const Complex& c : coeffs_) {
    if (!is_finite(c)) throw ConfigError("Poly: non-finite coefficient");
  }
  trim_trailing_zeros(coeffs_);
}

Poly Poly::monomial(int degree, Complex c) {
  std::vector<Complex> coeffs(static_cast<std::size_t>(degree) + 1, Complex{0.0, 0.0});
  coeffs.back() = c;
  return Poly{std::move(coeffs)};
}

Complex Poly::coeff(int k) const {
  if (k < 0 || k > degree()) return Complex{0.0, 0.0};
  return coeffs_[static_cast<std::size_t>(k)];
}

bool Poly::is_zero() const {
  return coeffs_.size() == 1 && coeffs_[0] == Complex{0.0, 0.0};
}

Complex Poly::operator()(Complex x) const {
  Complex acc = coeffs_.back();
  for (auto it = coeffs_.rbegin() + 1; it != coeffs_.rend(); ++it) {
    acc = acc * x + *it;
  }
  if (!is_finite(acc)) {
    std::ostringstream msg;
    msg << "Poly: evaluation overflowed at x = (" << x.real() << ", " << x.imag() << ")";
    throw OverflowError(msg.str());
  }
  return acc;
}

Poly Poly::derivative(int order) const {
  if (order < 1) throw ConfigError("Poly::derivative: order must be >= 1");
  std::vector<Complex> c = coeffs_;
  for (int r = 0; r < order; ++r) {
    if (c.size() == 1) {
      c.assign(1, Complex{0.0, 0.0});
      continue;
    }
    std::vector<Complex> d(c.size() - 1);
    for (std::size_t k = 1; k < c.size(); ++k) {
      d[k - 1] = static_cast<double>(k) * c[k];
    }
    c = std::move(d);
  }
  return Poly{std::move(c)};
}

Poly Poly::shifted(Complex c) const {
  if (c == Complex{0.0, 0.0}) return *this;
  // Taylor shift by repeated synthetic division by (x - c). After the inner
  // loop, a[j] carries the remainder (the next output coefficient) and
  // a[j+1..] the quotient. O(d^2).
  std::vector<Complex> a = coeffs_;
  const std::size_t n = a.size();
  std::vector<Complex> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = n - 1; k > j; --k) a[k - 1] += c * a[k];
    out[j] = a[j];
  }
  return Poly{std::move(out)};
}

Poly& Poly::operator+=(const Poly& rhs) {
  if (rhs.coeffs_.size() > coeffs_.size()) coeffs_.resize(rhs.coeffs_.size(), Complex{0.0, 0.0});
  for (std::size_t k = 0; k < rhs.coeffs_.size(); ++k) coeffs_[k] += rhs.coeffs_[k];
  trim_trailing_zeros(coeffs_);
  return *this;
}

Poly& Poly::operator*=(Complex c) {
  for (Complex& ck : coeffs_) ck *= c;
  trim_trailing_zeros(coeffs_);
  return *this;
}

int PiecewisePoly::max_degree() const {
  int d = 0;
  for (const Poly& p : per_cell_) d = std::max(d, p.degree());
  return d;
}

bool PiecewisePoly::is_zero() const {
  return std::all_of(per_cell_.begin(), per_cell_.end(),
                     [](const Poly& p) { return p.is_zero(); });
}

double cr_residual(const std::function<Complex(Complex)>& f, Complex x, double step) {
  if (!(step > 0.0)) throw ConfigError("cr_residual: step must be positive");
  const Complex e1{step, 0.0};
  const Complex e2{0.0, step};
  const Complex d1 = (f(x + e1) - f(x - e1)) / (2.0 * step);  // (u_x1, v_x1)
  const Complex d2 = (f(x + e2) - f(x - e2)) / (2.0 * step);  // (u_x2, v_x2)
  return std::max(std::abs(d1.real() - d2.imag()), std::abs(d2.real() + d1.imag()));
}

}  // namespace cfk
