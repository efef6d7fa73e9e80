#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>

#include "cqsim/compressors/quantizers.hpp"
#include "cqsim/numkit/linalg.hpp"

namespace cqsim::mselab {

/// c(x) = (x - floor x)(floor x + 1 - x); zero at integers, at most 1/4.
inline double cq_error_coefficient(double x) {
  const double f = std::floor(x);
  return (x - f) * (f + 1.0 - x);
}

/// n clients quantize the same scalar a in [l, r] with CQ:
/// MSE = (r - l)^2 c(n y) / n^2, y = (a - l)/(r - l).
inline double cq_scalar_exact_mse(std::size_t n, double a, double l, double r) {
  if (n == 0) throw std::invalid_argument("cq_scalar_exact_mse: n must be positive");
  if (l == r) return 0.0;
  const double nn = static_cast<double>(n);
  const double y = compressors::unit_position(a, l, r);
  return (r - l) * (r - l) * cq_error_coefficient(nn * y) / (nn * nn);
}

/// Same with independent quantizers: (r - a)(a - l) / n.
inline double iq_scalar_exact_mse(std::size_t n, double a, double l, double r) {
  if (n == 0) throw std::invalid_argument("iq_scalar_exact_mse: n must be positive");
  return (r - a) * (a - l) / static_cast<double>(n);
}

/// Vector CQ on n copies of a, coordinate range [-R, R] with R the
/// transmitted (rounded-up) norm.
inline double cq_vector_exact_mse(std::span<const double> a, std::size_t n) {
  const double R = compressors::round_up_f32(numkit::norm2(a));
  double s = 0.0;
  for (double v : a) s += cq_scalar_exact_mse(n, v, -R, R);
  return s;
}

inline double iq_vector_exact_mse(std::span<const double> a, std::size_t n) {
  const double R = compressors::round_up_f32(numkit::norm2(a));
  double s = 0.0;
  for (double v : a) s += iq_scalar_exact_mse(n, v, -R, R);
  return s;
}

}  // namespace cqsim::mselab
