#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "cqsim/numkit/random.hpp"

namespace cqsim::compressors {

/// Smallest float32 that is >= v. Used for transmitted norms so that the
/// decoded range always covers every coordinate.
inline float round_up_f32(double v) {
  if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument("round_up_f32: needs a finite nonnegative value");
  if (v > static_cast<double>(std::numeric_limits<float>::max()))
    throw std::overflow_error("round_up_f32: value exceeds float32 range");
  float f = static_cast<float>(v);
  if (static_cast<double>(f) < v) f = std::nextafter(f, std::numeric_limits<float>::infinity());
  return f;
}

/// Position of y in [l, r], clamped to [0, 1] against rounding.
inline double unit_position(double a, double l, double r) {
  const double y = (a - l) / (r - l);
  return y < 0.0 ? 0.0 : (y > 1.0 ? 1.0 : y);
}

/// One correlated-quantizer decision. `slot` is the client's entry of the
/// shared permutation, `u` = m * gamma is uniform on [0, 1), m the group size.
/// Returns 1{slot/m + gamma < y}, evaluated as slot + u < m*y.
inline bool cq_bit(double y, std::uint32_t slot, double u, std::size_t m) {
  const double t = static_cast<double>(m) * y;
  const double fl = std::floor(t);
  const double s = static_cast<double>(slot);
  if (s < fl) return true;
  if (s > fl) return false;
  return u < t - fl;
}

inline void check_range(std::span<const double> a, double l, double r) {
  if (!(l <= r) || !std::isfinite(l) || !std::isfinite(r)) throw std::invalid_argument("quantizer: need finite l <= r");
  for (double v : a)
    if (!(v >= l && v <= r)) throw std::invalid_argument("quantizer: input outside [l, r]");
}

/// Correlated scalar quantizers with explicit shared randomness.
/// perm is a permutation of {0..n-1}; u[i] = n * gamma_i.
inline std::vector<double> cq_scalar(std::span<const double> a, double l, double r, std::span<const std::uint32_t> perm,
                                     std::span<const double> u) {
  check_range(a, l, r);
  const std::size_t n = a.size();
  if (perm.size() != n || u.size() != n) throw std::invalid_argument("cq_scalar: randomness size mismatch");
  std::vector<double> out(n, l);
  if (l == r) return out;
  for (std::size_t i = 0; i < n; ++i)
    if (cq_bit(unit_position(a[i], l, r), perm[i], u[i], n)) out[i] = r;
  return out;
}

/// Draws the shared permutation and the per-client offsets from `rng`.
inline std::vector<double> cq_scalar(std::span<const double> a, double l, double r, numkit::RandomStream& rng) {
  check_range(a, l, r);
  const std::size_t n = a.size();
  if (n == 0) return {};
  if (l == r) return std::vector<double>(n, l);
  std::vector<std::uint32_t> perm(n);
  numkit::sample_permutation_into(perm, rng);
  std::vector<double> u(n);
  for (auto& v : u) v = rng.uniform01();
  return cq_scalar(a, l, r, perm, u);
}

inline double iq_scalar(double a, double l, double r, double u) {
  const double one[1] = {a};
  check_range(one, l, r);
  if (l == r) return l;
  return u < unit_position(a, l, r) ? r : l;
}

inline std::vector<double> iq_scalar(std::span<const double> a, double l, double r, numkit::RandomStream& rng) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = iq_scalar(a[i], l, r, rng.uniform01());
  return out;
}

// Dithering ladders. A magnitude index v in [0, k] names a level value:
// standard v/k, natural 2^(v-k) for v >= 1 and 0 for v = 0.
enum class Ladder { kStandard, kNatural };

inline double level_value(Ladder ladder, std::uint32_t k, std::uint32_t v) {
  if (ladder == Ladder::kStandard) return static_cast<double>(v) / static_cast<double>(k);
  if (v == 0) return 0.0;
  return std::ldexp(1.0, static_cast<int>(v) - static_cast<int>(k));
}

/// Two-point randomization of y in [0, 1] between its neighbouring levels.
inline std::uint32_t dither_magnitude(Ladder ladder, std::uint32_t k, double y, double u) {
  if (y <= 0.0) return 0;
  if (y >= 1.0) return k;
  std::uint32_t lo = 0, hi = 0;
  if (ladder == Ladder::kStandard) {
    const double t = y * static_cast<double>(k);
    const double fl = std::floor(t);
    if (fl >= static_cast<double>(k)) return k;
    lo = static_cast<std::uint32_t>(fl);
    hi = lo + 1;
  } else {
    int e = 0;
    (void)std::frexp(y, &e);  // y in [2^(e-1), 2^e)
    const long v_hi = static_cast<long>(k) + e;
    if (v_hi <= 1) {
      lo = 0;
      hi = 1;
    } else {
      hi = static_cast<std::uint32_t>(v_hi);
      lo = hi - 1;
    }
  }
  const double l_lo = level_value(ladder, k, lo), l_hi = level_value(ladder, k, hi);
  return u < (y - l_lo) / (l_hi - l_lo) ? hi : lo;
}

}  // namespace cqsim::compressors
