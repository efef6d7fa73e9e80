#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "cqsim/compressors/inputs.hpp"
#include "cqsim/compressors/quantizers.hpp"
#include "cqsim/compressors/spec.hpp"
#include "cqsim/numkit/bits.hpp"
#include "cqsim/numkit/linalg.hpp"
#include "cqsim/numkit/random.hpp"

namespace cqsim::compressors {

// Derivation paths below a round stream R:
//   CQ family      R/j          -> permutation of the group, then one uniform per group slot
//   IQ, dithering  R/i          -> one uniform per coordinate of client i
//   PermK family   R/kBlocks    -> row permutation (n), then column permutation (d); only when tau > 1
//   aggregate-only R/kAggregate -> one uniform per coordinate (homogeneous CQ shortcut)
namespace stream {
inline constexpr std::uint64_t kBlocks = 0x626c6b73;     // "blks"
inline constexpr std::uint64_t kAggregate = 0x61676772;  // "aggr"
}  // namespace stream

/// All randomness one round of a compressor consumes, materialized up front so
/// clients can be encoded and decoded independently.
class RoundRandomness {
 public:
  static RoundRandomness draw(const CompressorSpec& spec, const numkit::RandomStream& round) {
    spec.validate();
    RoundRandomness rr;
    rr.kind_ = spec.kind;
    rr.n_ = spec.n;
    rr.d_ = spec.d;
    rr.tau_ = spec.is_permk() ? spec.tau : 1;
    rr.m_ = spec.n / rr.tau_;
    if (spec.is_permk() && rr.tau_ > 1) {
      auto blocks = round.child(stream::kBlocks);
      rr.rows_.resize(spec.n);
      rr.cols_.resize(spec.d);
      numkit::sample_permutation_into(rr.rows_, blocks);
      numkit::sample_permutation_into(rr.cols_, blocks);
    }
    switch (spec.kind) {
      case Kind::kCQ:
      case Kind::kPermKCQ: {
        rr.slots_.resize(spec.d * rr.m_);
        rr.u_.resize(spec.d * rr.m_);
        for (std::size_t j = 0; j < spec.d; ++j) {
          auto s = round.child(j);
          numkit::sample_permutation_into({rr.slots_.data() + j * rr.m_, rr.m_}, s);
          for (std::size_t p = 0; p < rr.m_; ++p) rr.u_[j * rr.m_ + p] = s.uniform01();
        }
        break;
      }
      case Kind::kIQ:
      case Kind::kStdDither:
      case Kind::kNatDither:
      case Kind::kTernary: {
        rr.u_.resize(spec.n * spec.d);
        for (std::size_t i = 0; i < spec.n; ++i) {
          auto s = round.child(i);
          for (std::size_t j = 0; j < spec.d; ++j) rr.u_[i * spec.d + j] = s.uniform01();
        }
        break;
      }
      case Kind::kIdentity:
      case Kind::kPermK:
        break;
    }
    return rr;
  }

  Kind kind() const { return kind_; }
  std::size_t n() const { return n_; }
  std::size_t d() const { return d_; }
  /// Clients sharing one permutation per coordinate (n for CQ, n/tau for PermK+CQ).
  std::size_t group_size() const { return m_; }

  std::size_t row_block(std::size_t client) const { return tau_ == 1 ? 0 : rows_[client] / m_; }
  std::size_t col_block(std::size_t coord) const { return tau_ == 1 ? 0 : cols_[coord] / (d_ / tau_); }
  bool selected(std::size_t client, std::size_t coord) const { return row_block(client) == col_block(coord); }

  /// Coordinates client i transmits, ascending.
  std::vector<std::size_t> support(std::size_t client) const {
    std::vector<std::size_t> s;
    s.reserve(d_ / tau_);
    for (std::size_t j = 0; j < d_; ++j)
      if (selected(client, j)) s.push_back(j);
    return s;
  }

  /// CQ family: the shared permutation entry client i sees at coordinate j.
  std::uint32_t slot(std::size_t client, std::size_t coord) const { return slots_[coord * m_ + position(client)]; }
  /// CQ family: m * gamma for client i at coordinate j. Others: the client's own uniform.
  double u(std::size_t client, std::size_t coord) const {
    if (kind_ == Kind::kCQ || kind_ == Kind::kPermKCQ) return u_[coord * m_ + position(client)];
    return u_[client * d_ + coord];
  }
  /// gamma on [0, 1/m) for the CQ family.
  double gamma(std::size_t client, std::size_t coord) const { return u(client, coord) / static_cast<double>(m_); }

  std::span<const std::uint32_t> row_permutation() const { return rows_; }
  std::span<const std::uint32_t> column_permutation() const { return cols_; }
  std::span<const std::uint32_t> coordinate_permutation(std::size_t coord) const {
    return {slots_.data() + coord * m_, m_};
  }

 private:
  std::size_t position(std::size_t client) const { return tau_ == 1 ? client : rows_[client] % m_; }

  Kind kind_ = Kind::kIdentity;
  std::size_t n_ = 0, d_ = 0, tau_ = 1, m_ = 0;
  std::vector<std::uint32_t> rows_, cols_, slots_;
  std::vector<double> u_;
};

/// One client's transmission. `body` holds norm header(s) and payload;
/// `bit_count` is the accounted cost (headers + payload).
struct CompressedMessage {
  Kind kind = Kind::kIdentity;
  numkit::BitBuffer body;
  std::uint64_t bit_count = 0;

  friend bool operator==(const CompressedMessage&, const CompressedMessage&) = default;
};

namespace detail {

inline void push_f64(numkit::BitBuffer& b, double v) { b.push_bits(std::bit_cast<std::uint64_t>(v), 64); }
inline double read_f64(const numkit::BitBuffer& b, std::size_t pos) { return std::bit_cast<double>(b.read_bits(pos, 64)); }

inline Ladder ladder_of(Kind k) { return k == Kind::kNatDither ? Ladder::kNatural : Ladder::kStandard; }

inline void check_input(const CompressorSpec& spec, std::span<const double> a) {
  if (a.size() != spec.d) throw std::invalid_argument("compressor: input dimension does not match spec");
  if (!numkit::all_finite(a)) throw std::invalid_argument("compressor: non-finite input");
}

// Sign-and-range quantization of `v` (CQ or IQ decision per coordinate).
template <typename Bit>
void encode_signed_range(numkit::BitBuffer& body, std::span<const double> v, std::span<const std::size_t> coords,
                         Bit&& bit) {
  const float r = round_up_f32(numkit::norm2(v));
  numkit::push_float32(body, r);
  for (std::size_t idx = 0; idx < coords.size(); ++idx) {
    if (r == 0.0f) {
      body.push_back(false);
      continue;
    }
    const double y = unit_position(v[idx], -static_cast<double>(r), static_cast<double>(r));
    body.push_back(bit(y, coords[idx]));
  }
}

}  // namespace detail

inline CompressedMessage encode(const CompressorSpec& spec, std::span<const double> a, const RoundRandomness& rr,
                                std::size_t client) {
  detail::check_input(spec, a);
  if (rr.kind() != spec.kind || rr.n() != spec.n || rr.d() != spec.d)
    throw std::invalid_argument("encode: randomness drawn for a different spec");
  CompressedMessage msg;
  msg.kind = spec.kind;
  const std::size_t d = spec.d;
  switch (spec.kind) {
    case Kind::kIdentity:
      for (double v : a) detail::push_f64(msg.body, v);
      msg.bit_count = 32ull * d;
      break;
    case Kind::kCQ:
    case Kind::kIQ: {
      std::vector<std::size_t> coords(d);
      for (std::size_t j = 0; j < d; ++j) coords[j] = j;
      const std::size_t m = rr.group_size();
      if (spec.kind == Kind::kCQ) {
        detail::encode_signed_range(msg.body, a, coords,
                                    [&](double y, std::size_t j) { return cq_bit(y, rr.slot(client, j), rr.u(client, j), m); });
      } else {
        detail::encode_signed_range(msg.body, a, coords, [&](double y, std::size_t j) { return rr.u(client, j) < y; });
      }
      msg.bit_count = 32 + d;
      break;
    }
    case Kind::kStdDither:
    case Kind::kNatDither:
    case Kind::kTernary: {
      const float norm = round_up_f32(numkit::norm_q(a, spec.q));
      msg.body.push_bits(std::bit_cast<std::uint32_t>(norm) & 0x7fffffffu, 31);
      const Ladder ladder = detail::ladder_of(spec.kind);
      std::vector<std::uint32_t> symbols(d, 0);
      if (norm != 0.0f) {
        for (std::size_t j = 0; j < d; ++j) {
          const double y = std::min(1.0, std::abs(a[j]) / static_cast<double>(norm));
          const std::uint32_t v = dither_magnitude(ladder, spec.k, y, rr.u(client, j));
          symbols[j] = v == 0 ? 0 : (a[j] > 0 ? v : spec.k + v);
        }
      }
      numkit::push_mixed_radix(msg.body, symbols, 2 * spec.k + 1);
      msg.bit_count = msg.body.size();
      break;
    }
    case Kind::kPermK: {
      const double tau = static_cast<double>(spec.tau);
      for (std::size_t j : rr.support(client)) detail::push_f64(msg.body, tau * a[j]);
      msg.bit_count = 32ull * (d / spec.tau);
      break;
    }
    case Kind::kPermKCQ: {
      const auto coords = rr.support(client);
      std::vector<double> v(coords.size());
      for (std::size_t idx = 0; idx < coords.size(); ++idx) v[idx] = static_cast<double>(spec.tau) * a[coords[idx]];
      const std::size_t m = rr.group_size();
      detail::encode_signed_range(msg.body, v, coords,
                                  [&](double y, std::size_t j) { return cq_bit(y, rr.slot(client, j), rr.u(client, j), m); });
      msg.bit_count = 32 + coords.size();
      break;
    }
  }
  return msg;
}

inline Vector decode(const CompressorSpec& spec, const CompressedMessage& msg, const RoundRandomness& rr,
                     std::size_t client) {
  if (msg.kind != spec.kind) throw std::invalid_argument("decode: message scheme does not match spec");
  const std::size_t d = spec.d;
  Vector out(d, 0.0);
  switch (spec.kind) {
    case Kind::kIdentity:
      for (std::size_t j = 0; j < d; ++j) out[j] = detail::read_f64(msg.body, 64 * j);
      break;
    case Kind::kCQ:
    case Kind::kIQ: {
      const double r = numkit::read_float32(msg.body, 0);
      for (std::size_t j = 0; j < d; ++j) out[j] = r == 0.0 ? 0.0 : (msg.body[32 + j] ? r : -r);
      break;
    }
    case Kind::kStdDither:
    case Kind::kNatDither:
    case Kind::kTernary: {
      const double norm = std::bit_cast<float>(static_cast<std::uint32_t>(msg.body.read_bits(0, 31)));
      const auto symbols = numkit::read_mixed_radix(msg.body, 31, d, 2 * spec.k + 1);
      const Ladder ladder = detail::ladder_of(spec.kind);
      for (std::size_t j = 0; j < d; ++j) {
        const std::uint32_t s = symbols[j];
        if (s == 0) continue;
        const bool neg = s > spec.k;
        const double mag = norm * level_value(ladder, spec.k, neg ? s - spec.k : s);
        out[j] = neg ? -mag : mag;
      }
      break;
    }
    case Kind::kPermK: {
      std::size_t idx = 0;
      for (std::size_t j : rr.support(client)) out[j] = detail::read_f64(msg.body, 64 * idx++);
      break;
    }
    case Kind::kPermKCQ: {
      const double r = numkit::read_float32(msg.body, 0);
      std::size_t idx = 0;
      for (std::size_t j : rr.support(client)) {
        out[j] = r == 0.0 ? 0.0 : (msg.body[32 + idx] ? r : -r);
        ++idx;
      }
      break;
    }
  }
  return out;
}

struct RoundOutput {
  RoundRandomness randomness;
  std::vector<CompressedMessage> messages;
  std::vector<Vector> decoded;
};

/// Compresses every client's vector with one fresh draw of round randomness.
inline RoundOutput compress_round(const CompressorSpec& spec, std::span<const Vector> inputs,
                                  const numkit::RandomStream& round) {
  spec.validate();
  if (inputs.size() != spec.n) throw std::invalid_argument("compress_round: expected spec.n input vectors");
  for (const auto& a : inputs) detail::check_input(spec, a);
  RoundOutput out{RoundRandomness::draw(spec, round), {}, {}};
  out.messages.reserve(spec.n);
  out.decoded.reserve(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    out.messages.push_back(encode(spec, inputs[i], out.randomness, i));
    out.decoded.push_back(decode(spec, out.messages.back(), out.randomness, i));
  }
  return out;
}

inline RoundOutput compress_round(const CompressorSpec& spec, const ClientInputs& inputs,
                                  const numkit::RandomStream& round) {
  const auto rows = inputs.materialize();
  return compress_round(spec, std::span<const Vector>(rows), round);
}

namespace detail {

// Homogeneous CQ within groups: m clients quantize the same value at each
// coordinate, so the number of clients reporting the top of the range is
// floor(m*y) + Bern(frac(m*y)). Same law as the per-client path.
inline Vector replicated_cq_mean(const CompressorSpec& spec, const Vector& a, const numkit::RandomStream& round) {
  const std::size_t d = spec.d, n = spec.n;
  const std::size_t tau = spec.is_permk() ? spec.tau : 1;
  const std::size_t m = n / tau;
  std::vector<std::uint32_t> cols;
  if (tau > 1) {
    auto blocks = round.child(stream::kBlocks);
    std::vector<std::uint32_t> rows(n);
    cols.resize(d);
    numkit::sample_permutation_into(rows, blocks);
    numkit::sample_permutation_into(cols, blocks);
  }
  const std::size_t width = d / tau;
  std::vector<std::vector<double>> block_vals(tau);
  for (std::size_t j = 0; j < d; ++j) block_vals[tau > 1 ? cols[j] / width : 0].push_back(static_cast<double>(tau) * a[j]);
  std::vector<double> radius(tau);
  for (std::size_t b = 0; b < tau; ++b) radius[b] = round_up_f32(numkit::norm2(block_vals[b]));

  auto s = round.child(stream::kAggregate);
  Vector out(d, 0.0);
  const double md = static_cast<double>(m);
  for (std::size_t j = 0; j < d; ++j) {
    const double u = s.uniform01();
    const double r = radius[tau > 1 ? cols[j] / width : 0];
    if (r == 0.0) continue;
    const double t = md * unit_position(static_cast<double>(tau) * a[j], -r, r);
    double count = std::floor(t);
    if (count < md && u < t - count) count += 1.0;
    out[j] = r * (2.0 * count - md) / static_cast<double>(n);
  }
  return out;
}

// Homogeneous IQ: counts top-of-range reports per coordinate with the same
// per-client uniforms RoundRandomness would draw, without materializing
// n messages.
inline Vector replicated_iq_mean(const CompressorSpec& spec, const Vector& a, const numkit::RandomStream& round) {
  const std::size_t d = spec.d, n = spec.n;
  const double r = round_up_f32(numkit::norm2(a));
  Vector out(d, 0.0);
  if (r == 0.0) return out;
  Vector y(d);
  for (std::size_t j = 0; j < d; ++j) y[j] = unit_position(a[j], -r, r);
  std::vector<std::uint32_t> count(d, 0);
  for (std::size_t i = 0; i < n; ++i) {
    auto s = round.child(i);
    for (std::size_t j = 0; j < d; ++j) count[j] += s.uniform01() < y[j] ? 1u : 0u;
  }
  const double nn = static_cast<double>(n);
  for (std::size_t j = 0; j < d; ++j) out[j] = r * (2.0 * static_cast<double>(count[j]) - nn) / nn;
  return out;
}

}  // namespace detail

/// Server-side estimate (1/n) sum_i Q_i(a_i). For distinct inputs this is the
/// average of compress_round's decoded vectors for the same stream.
inline Vector compress_mean(const CompressorSpec& spec, const ClientInputs& inputs, const numkit::RandomStream& round) {
  spec.validate();
  if (inputs.n() != spec.n) throw std::invalid_argument("compress_mean: expected spec.n clients");
  if (spec.kind == Kind::kIdentity && inputs.is_replicated()) return inputs[0];
  if (inputs.is_replicated() && (spec.kind == Kind::kCQ || spec.kind == Kind::kPermKCQ)) {
    detail::check_input(spec, inputs[0]);
    return detail::replicated_cq_mean(spec, inputs[0], round);
  }
  if (inputs.is_replicated() && spec.kind == Kind::kIQ) {
    detail::check_input(spec, inputs[0]);
    return detail::replicated_iq_mean(spec, inputs[0], round);
  }
  const auto out = compress_round(spec, inputs, round);
  Vector mean(spec.d, 0.0);
  for (const auto& v : out.decoded)
    for (std::size_t j = 0; j < spec.d; ++j) mean[j] += v[j];
  for (auto& v : mean) v /= static_cast<double>(spec.n);
  return mean;
}

}  // namespace cqsim::compressors
