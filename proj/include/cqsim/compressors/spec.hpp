#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

#include "cqsim/numkit/format.hpp"

namespace cqsim::compressors {

enum class Kind : std::uint8_t {
  kIdentity = 0,
  kIQ = 1,
  kCQ = 2,
  kStdDither = 3,
  kNatDither = 4,
  kTernary = 5,
  kPermK = 6,
  kPermKCQ = 7,
};

class UnsupportedScheme : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CompressorSpec {
  Kind kind = Kind::kIdentity;
  std::size_t n = 1;
  std::size_t d = 1;
  double q = 2.0;          // dithering norm index
  std::uint32_t k = 1;     // dithering levels
  std::size_t tau = 1;     // PermK block count

  static CompressorSpec identity(std::size_t n, std::size_t d) { return {Kind::kIdentity, n, d}; }
  static CompressorSpec iq(std::size_t n, std::size_t d) { return {Kind::kIQ, n, d}; }
  static CompressorSpec cq(std::size_t n, std::size_t d) { return {Kind::kCQ, n, d}; }
  static CompressorSpec std_dither(std::size_t n, std::size_t d, double q, std::uint32_t k) {
    return {Kind::kStdDither, n, d, q, k};
  }
  static CompressorSpec nat_dither(std::size_t n, std::size_t d, double q, std::uint32_t k) {
    return {Kind::kNatDither, n, d, q, k};
  }
  static CompressorSpec ternary(std::size_t n, std::size_t d) {
    return {Kind::kTernary, n, d, std::numeric_limits<double>::infinity(), 1};
  }
  static CompressorSpec permk(std::size_t n, std::size_t d, std::size_t tau) {
    return {Kind::kPermK, n, d, 2.0, 1, tau};
  }
  static CompressorSpec permk_cq(std::size_t n, std::size_t d, std::size_t tau) {
    return {Kind::kPermKCQ, n, d, 2.0, 1, tau};
  }

  bool is_dither() const { return kind == Kind::kStdDither || kind == Kind::kNatDither || kind == Kind::kTernary; }
  bool is_permk() const { return kind == Kind::kPermK || kind == Kind::kPermKCQ; }

  void validate() const {
    if (n == 0 || d == 0) throw std::invalid_argument("CompressorSpec: n and d must be positive");
    if (is_dither()) {
      if (k < 1) throw std::invalid_argument("CompressorSpec: dithering needs k >= 1");
      if (!(q >= 1.0)) throw std::invalid_argument("CompressorSpec: dithering needs q in [1, inf]");
      if (k > (1u << 30)) throw std::invalid_argument("CompressorSpec: too many dithering levels");
    }
    if (kind == Kind::kTernary && (k != 1 || !std::isinf(q)))
      throw std::invalid_argument("CompressorSpec: ternary is q=inf, k=1");
    if (is_permk()) {
      if (tau == 0 || n % tau != 0 || d % tau != 0)
        throw std::invalid_argument("CompressorSpec: tau must divide both n and d");
    }
  }
};

inline std::string kind_name(Kind k) {
  switch (k) {
    case Kind::kIdentity: return "identity";
    case Kind::kIQ: return "iq";
    case Kind::kCQ: return "cq";
    case Kind::kStdDither: return "std_dither";
    case Kind::kNatDither: return "nat_dither";
    case Kind::kTernary: return "ternary";
    case Kind::kPermK: return "permk";
    case Kind::kPermKCQ: return "permk_cq";
  }
  return "?";
}

inline std::string describe(const CompressorSpec& s) {
  std::string out = kind_name(s.kind);
  if (s.kind == Kind::kStdDither || s.kind == Kind::kNatDither) {
    out += "(q=" + numkit::format_double(s.q) + ",k=" + std::to_string(s.k) + ")";
  }
  if (s.is_permk()) out += "(tau=" + std::to_string(s.tau) + ")";
  return out;
}

}  // namespace cqsim::compressors
