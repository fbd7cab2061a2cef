#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

namespace cfk {

using Complex = std::complex<double>;

inline bool is_finite(double x) { return std::isfinite(x); }
inline bool is_finite(const Complex& z) {
  return std::isfinite(z.real()) && std::isfinite(z.imag());
}

// Error taxonomy. The CLI maps these onto distinct exit codes, so keep the
// hierarchy flat and the messages self-contained.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SingularMatrixError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct GridMismatchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct OverflowError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct RegressionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace cfk
