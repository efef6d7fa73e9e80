#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cqsim::numkit {

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

// Path labels used by the library. Anything else (round index, client index,
// trial index) is appended as a raw integer after one of these.
namespace label {
inline constexpr std::uint64_t kProblem = 0x70726f62;     // "prob"
inline constexpr std::uint64_t kCompressor = 0x636f6d70;  // "comp"
inline constexpr std::uint64_t kFlags = 0x666c6167;       // "flag"
inline constexpr std::uint64_t kOutput = 0x6f757470;      // "outp"
inline constexpr std::uint64_t kTrial = 0x7472696c;       // "tril"
inline constexpr std::uint64_t kInputs = 0x696e7074;      // "inpt"
inline constexpr std::uint64_t kSampler = 0x73616d70;     // "samp"
}  // namespace label

/// Deterministic, splittable random stream.
///
/// A stream is identified by a root seed and a derivation path of 64-bit
/// labels. The key is a hash of (root_seed, path); draws are SplitMix64 over a
/// counter, so identical (root_seed, path) give identical sequences on every
/// platform. Child streams extend the path and start a fresh counter; the
/// parent's position is not consumed.
///
/// Streams are single-owner. Parallel consumers must each take a child.
class RandomStream {
 public:
  using result_type = std::uint64_t;
  static constexpr std::size_t kMaxDepth = 12;

  explicit RandomStream(std::uint64_t root_seed)
      : root_seed_(root_seed), key_(detail::mix64(root_seed ^ 0x5851f42d4c957f2dULL)) {}

  RandomStream child(std::uint64_t label) const {
    if (depth_ == kMaxDepth) throw std::length_error("RandomStream: derivation path too deep");
    RandomStream c(*this);
    c.path_[c.depth_++] = label;
    c.key_ = detail::mix64(key_ ^ detail::mix64(label + detail::kGolden * c.depth_));
    c.counter_ = 0;
    return c;
  }

  template <typename... Labels>
  RandomStream child(std::uint64_t first, Labels... rest) const {
    if constexpr (sizeof...(rest) == 0) {
      return child(first);
    } else {
      return child(first).child(static_cast<std::uint64_t>(rest)...);
    }
  }

  std::uint64_t root_seed() const { return root_seed_; }
  std::span<const std::uint64_t> path() const { return {path_.data(), depth_}; }
  std::uint64_t draws() const { return counter_; }

  std::string describe() const {
    std::ostringstream os;
    os << "seed=" << root_seed_ << " path=[";
    for (std::size_t i = 0; i < depth_; ++i) os << (i ? "," : "") << path_[i];
    os << "]";
    return os.str();
  }

  std::uint64_t next_u64() { return detail::mix64(key_ + detail::kGolden * ++counter_); }

  // UniformRandomBitGenerator
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return next_u64(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound). Lemire's multiply-shift with rejection.
  std::uint64_t uniform_below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("uniform_below: bound must be positive");
    unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<unsigned __int128>(next_u64()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  bool bernoulli(double p) { return uniform01() < p; }

  /// Standard normal (Box-Muller, one value per call).
  double normal() {
    const double u1 = 1.0 - uniform01();  // (0, 1]
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Exponential with rate 1.
  double exponential() { return -std::log1p(-uniform01()); }

 private:
  std::uint64_t root_seed_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::array<std::uint64_t, kMaxDepth> path_{};
  std::size_t depth_ = 0;
};

/// Fisher-Yates: uniformly random permutation of {0, ..., n-1}.
inline void sample_permutation_into(std::span<std::uint32_t> out, RandomStream& rng) {
  const std::size_t n = out.size();
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<std::uint32_t>(i);
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_below(i));
    std::swap(out[i - 1], out[j]);
  }
}

inline std::vector<std::uint32_t> sample_permutation(std::size_t n, RandomStream& rng) {
  if (n == 0) throw std::invalid_argument("sample_permutation: n must be >= 1");
  std::vector<std::uint32_t> perm(n);
  sample_permutation_into(perm, rng);
  return perm;
}

/// Index drawn from a discrete distribution given by its cumulative sums.
inline std::size_t sample_categorical(std::span<const double> cumulative, RandomStream& rng) {
  const double u = rng.uniform01() * cumulative.back();
  std::size_t lo = 0, hi = cumulative.size() - 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (u < cumulative[mid]) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo;
}

}  // namespace cqsim::numkit
