#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "cqsim/compressors/round.hpp"
#include "cqsim/compressors/spec.hpp"
#include "cqsim/numkit/bits.hpp"

namespace cqsim::compressors {

// [tag:u8][params][body bytes]
//   dithering params: q as f32 LE, k as u32 LE
//   PermK params:     tau as u32 LE
// The body length in bits follows from (scheme, params, d).

namespace detail {

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

inline std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t& pos) {
  if (pos + 4 > in.size()) throw std::invalid_argument("wire: truncated parameters");
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(in[pos + b]) << (8 * b);
  pos += 4;
  return v;
}

inline std::size_t body_bits(const CompressorSpec& spec) {
  const std::size_t d = spec.d;
  switch (spec.kind) {
    case Kind::kIdentity: return 64 * d;
    case Kind::kIQ:
    case Kind::kCQ: return 32 + d;
    case Kind::kStdDither:
    case Kind::kNatDither:
    case Kind::kTernary: return 31 + numkit::mixed_radix_bits(d, 2 * spec.k + 1);
    case Kind::kPermK: return 64 * (d / spec.tau);
    case Kind::kPermKCQ: return 32 + d / spec.tau;
  }
  throw std::invalid_argument("wire: unknown scheme");
}

}  // namespace detail

inline std::vector<std::uint8_t> serialize(const CompressorSpec& spec, const CompressedMessage& msg) {
  if (msg.kind != spec.kind) throw std::invalid_argument("serialize: message scheme does not match spec");
  std::vector<std::uint8_t> out;
  out.push_back(static_cast<std::uint8_t>(spec.kind));
  if (spec.kind == Kind::kStdDither || spec.kind == Kind::kNatDither || spec.kind == Kind::kTernary) {
    detail::put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(spec.q)));
    detail::put_u32(out, spec.k);
  } else if (spec.is_permk()) {
    detail::put_u32(out, static_cast<std::uint32_t>(spec.tau));
  }
  const auto& bytes = msg.body.bytes();
  out.insert(out.end(), bytes.begin(), bytes.end());
  return out;
}

struct WireMessage {
  CompressorSpec spec;  // n is not on the wire and stays 1
  CompressedMessage message;
};

/// Parses one message for a known dimension d.
inline WireMessage deserialize(std::span<const std::uint8_t> bytes, std::size_t d) {
  if (bytes.empty()) throw std::invalid_argument("wire: empty message");
  if (bytes[0] > static_cast<std::uint8_t>(Kind::kPermKCQ)) throw std::invalid_argument("wire: unknown scheme tag");
  WireMessage w;
  w.spec.kind = static_cast<Kind>(bytes[0]);
  w.spec.d = d;
  std::size_t pos = 1;
  if (w.spec.is_dither()) {
    w.spec.q = std::bit_cast<float>(detail::get_u32(bytes, pos));
    w.spec.k = detail::get_u32(bytes, pos);
  } else if (w.spec.is_permk()) {
    w.spec.tau = detail::get_u32(bytes, pos);
    w.spec.n = w.spec.tau;
  }
  w.spec.validate();
  const std::size_t nbits = detail::body_bits(w.spec);
  if (bytes.size() - pos != (nbits + 7) / 8) throw std::invalid_argument("wire: body length does not match scheme");
  w.message.kind = w.spec.kind;
  w.message.body = numkit::BitBuffer::from_bytes(std::vector<std::uint8_t>(bytes.begin() + pos, bytes.end()), nbits);
  switch (w.spec.kind) {
    case Kind::kIdentity: w.message.bit_count = 32ull * d; break;
    case Kind::kPermK: w.message.bit_count = 32ull * (d / w.spec.tau); break;
    default: w.message.bit_count = nbits; break;
  }
  return w;
}

}  // namespace cqsim::compressors
