#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>

#include "cqsim/compressors/spec.hpp"
#include "cqsim/numkit/bits.hpp"

namespace cqsim::compressors {

struct ABConstants {
  double A = 0.0;
  double B = 0.0;
};

/// Accounted client-to-server bits for one round.
inline std::uint64_t bits_per_client(const CompressorSpec& spec, bool compressed_round) {
  spec.validate();
  const std::uint64_t d = spec.d;
  if (!compressed_round) return 32 * d;
  switch (spec.kind) {
    case Kind::kIdentity: return 32 * d;
    case Kind::kIQ:
    case Kind::kCQ: return 32 + d;
    case Kind::kStdDither:
    case Kind::kNatDither:
    case Kind::kTernary: return 31 + numkit::mixed_radix_bits(spec.d, 2 * spec.k + 1);
    case Kind::kPermK: return 32 * (d / spec.tau);
    case Kind::kPermKCQ: return 32 + d / spec.tau;
  }
  return 32 * d;
}

/// Reference rotation-based quantizer: constants only.
inline std::uint64_t drive_reference_bits(std::size_t d) { return 32 + std::bit_ceil(static_cast<std::uint64_t>(d)); }
inline ABConstants drive_reference_ab(std::size_t n) {
  return {(std::numbers::pi / 2.0 - 1.0) / static_cast<double>(n), 0.0};
}

/// Variance parameter of a single client's compressor:
/// E||Q(a) - a||^2 <= omega ||a||^2.
inline double omega(const CompressorSpec& spec) {
  spec.validate();
  const double d = static_cast<double>(spec.d);
  const double k = static_cast<double>(spec.k);
  switch (spec.kind) {
    case Kind::kIdentity: return 0.0;
    case Kind::kIQ:
    case Kind::kCQ: return d - 1.0;
    case Kind::kTernary: return std::sqrt(d) - 1.0;
    case Kind::kStdDither:
      if (spec.q < 2.0) break;
      if (spec.k == 1 && std::isinf(spec.q)) return std::sqrt(d) - 1.0;
      return std::min(d / (4.0 * k * k), std::sqrt(d) / k);
    case Kind::kNatDither:
      if (spec.q < 2.0) break;
      return 0.125 + std::min(std::sqrt(d) * std::ldexp(1.0, 1 - static_cast<int>(spec.k)),
                              d * std::ldexp(1.0, -2 * static_cast<int>(spec.k)));
    case Kind::kPermK:
    case Kind::kPermKCQ: break;
  }
  throw UnsupportedScheme("omega: no variance parameter for " + describe(spec));
}

/// Reference (A, B) table values used by the complexity analyzer.
inline ABConstants ab_constants(const CompressorSpec& spec) {
  spec.validate();
  const double n = static_cast<double>(spec.n), d = static_cast<double>(spec.d);
  switch (spec.kind) {
    case Kind::kIdentity: return {0.0, 0.0};
    case Kind::kIQ: return {d / (4.0 * n), 0.0};
    case Kind::kCQ: return {d / (4.0 * n * n), 0.0};
    case Kind::kPermKCQ: {
      const double t = static_cast<double>(spec.tau);
      return {d * t * t / (n * n), 0.0};
    }
    case Kind::kPermK:
      if (spec.tau == spec.n) return {1.0, 1.0};
      break;
    default: return {omega(spec) / n, 0.0};
  }
  throw UnsupportedScheme("ab_constants: no constants for " + describe(spec));
}

/// Worst-case valid (A, B) on homogeneous inputs; used for stepsizes that must
/// carry a guarantee and for the Monte-Carlo certificates.
inline ABConstants ab_certified(const CompressorSpec& spec) {
  spec.validate();
  const double n = static_cast<double>(spec.n), d = static_cast<double>(spec.d);
  switch (spec.kind) {
    case Kind::kIQ: return {d / n, 0.0};
    case Kind::kCQ: return {d / (n * n), 0.0};
    default: return ab_constants(spec);
  }
}

}  // namespace cqsim::compressors
