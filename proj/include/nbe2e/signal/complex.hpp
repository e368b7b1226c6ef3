#pragma once

#include <cmath>

namespace nbe2e::signal {

// A complex number held as two reals. The frontend works entirely in this
// representation so every gradient is an ordinary real derivative.
struct ComplexPair {
  double re = 0.0;
  double im = 0.0;

  friend bool operator==(const ComplexPair&, const ComplexPair&) = default;
};

inline ComplexPair complex_mul_as_real(ComplexPair a, ComplexPair b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}

// log(|z| + eps)
inline double log_magnitude(ComplexPair z, double eps) {
  return std::log(std::hypot(z.re, z.im) + eps);
}

// d log(|z| + eps) / d(re, im). Zero at the origin, where the magnitude has no
// derivative.
inline ComplexPair log_magnitude_grad(ComplexPair z, double eps) {
  const double m = std::hypot(z.re, z.im);
  if (m == 0.0) return {};
  const double s = 1.0 / (m * (m + eps));
  return {z.re * s, z.im * s};
}

}  // namespace nbe2e::signal
