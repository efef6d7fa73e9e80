#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <vector>

namespace cqsim::numkit {

/// Packed bit sequence, LSB-first within each byte.
class BitBuffer {
 public:
  BitBuffer() = default;

  std::size_t size() const { return length_; }
  bool empty() const { return length_ == 0; }
  const std::vector<std::uint8_t>& bytes() const { return bytes_; }

  static BitBuffer from_bytes(std::vector<std::uint8_t> bytes, std::size_t length) {
    if (length > bytes.size() * 8) throw std::invalid_argument("BitBuffer: length exceeds byte storage");
    BitBuffer b;
    b.bytes_ = std::move(bytes);
    b.bytes_.resize((length + 7) / 8);
    b.length_ = length;
    return b;
  }

  void push_back(bool bit) {
    if (length_ % 8 == 0) bytes_.push_back(0);
    if (bit) bytes_[length_ / 8] |= static_cast<std::uint8_t>(1u << (length_ % 8));
    ++length_;
  }

  /// Appends the low `nbits` bits of `value`, least significant first.
  void push_bits(std::uint64_t value, unsigned nbits) {
    for (unsigned i = 0; i < nbits; ++i) push_back((value >> i) & 1u);
  }

  bool operator[](std::size_t i) const { return (bytes_[i / 8] >> (i % 8)) & 1u; }

  std::uint64_t read_bits(std::size_t pos, unsigned nbits) const {
    if (pos + nbits > length_) throw std::out_of_range("BitBuffer: read past end");
    std::uint64_t v = 0;
    for (unsigned i = 0; i < nbits; ++i) v |= static_cast<std::uint64_t>((*this)[pos + i]) << i;
    return v;
  }

  friend bool operator==(const BitBuffer&, const BitBuffer&) = default;

 private:
  std::vector<std::uint8_t> bytes_;
  std::size_t length_ = 0;
};

inline BitBuffer pack_bits(std::span<const std::uint8_t> values) {
  BitBuffer buf;
  for (auto v : values) {
    if (v > 1) throw std::invalid_argument("pack_bits: values must be 0 or 1");
    buf.push_back(v != 0);
  }
  return buf;
}

inline std::vector<std::uint8_t> unpack_bits(const BitBuffer& buf) {
  std::vector<std::uint8_t> out(buf.size());
  for (std::size_t i = 0; i < buf.size(); ++i) out[i] = buf[i] ? 1 : 0;
  return out;
}

inline void push_float32(BitBuffer& buf, float v) { buf.push_bits(std::bit_cast<std::uint32_t>(v), 32); }

inline float read_float32(const BitBuffer& buf, std::size_t pos) {
  return std::bit_cast<float>(static_cast<std::uint32_t>(buf.read_bits(pos, 32)));
}

// Mixed-radix packing: `count` symbols in [0, radix) are stored as one
// integer sum_i s_i * radix^i written LSB-first in exactly
// ceil(count * log2(radix)) bits.
namespace detail {

using Limbs = std::vector<std::uint32_t>;

inline void mul_add(Limbs& v, std::uint32_t mul, std::uint32_t add) {
  std::uint64_t carry = add;
  for (auto& limb : v) {
    const std::uint64_t t = static_cast<std::uint64_t>(limb) * mul + carry;
    limb = static_cast<std::uint32_t>(t);
    carry = t >> 32;
  }
  if (carry) v.push_back(static_cast<std::uint32_t>(carry));
}

inline std::uint32_t div_small(Limbs& v, std::uint32_t div) {
  std::uint64_t rem = 0;
  for (std::size_t i = v.size(); i-- > 0;) {
    const std::uint64_t cur = (rem << 32) | v[i];
    v[i] = static_cast<std::uint32_t>(cur / div);
    rem = cur % div;
  }
  while (!v.empty() && v.back() == 0) v.pop_back();
  return static_cast<std::uint32_t>(rem);
}

inline std::size_t bit_length(const Limbs& v) {
  if (v.empty()) return 0;
  return (v.size() - 1) * 32 + (32 - static_cast<std::size_t>(std::countl_zero(v.back())));
}

}  // namespace detail

/// Number of bits needed to hold any `count` symbols of base `radix`, i.e.
/// the bit length of radix^count - 1. Exact (no floating point).
inline std::size_t mixed_radix_bits(std::size_t count, std::uint32_t radix) {
  if (radix < 2) throw std::invalid_argument("mixed_radix_bits: radix must be >= 2");
  detail::Limbs v{1};
  for (std::size_t i = 0; i < count; ++i) detail::mul_add(v, radix, 0);
  // v = radix^count >= 1; subtract one.
  for (auto& limb : v) {
    if (limb-- != 0) break;
  }
  while (!v.empty() && v.back() == 0) v.pop_back();
  return detail::bit_length(v);
}

inline void push_mixed_radix(BitBuffer& buf, std::span<const std::uint32_t> symbols, std::uint32_t radix) {
  detail::Limbs v;
  for (std::size_t i = symbols.size(); i-- > 0;) {
    if (symbols[i] >= radix) throw std::invalid_argument("push_mixed_radix: symbol out of range");
    detail::mul_add(v, radix, symbols[i]);
  }
  const std::size_t nbits = mixed_radix_bits(symbols.size(), radix);
  for (std::size_t i = 0; i < nbits; ++i) {
    const std::size_t limb = i / 32;
    buf.push_back(limb < v.size() && ((v[limb] >> (i % 32)) & 1u));
  }
}

inline std::vector<std::uint32_t> read_mixed_radix(const BitBuffer& buf, std::size_t pos, std::size_t count,
                                                   std::uint32_t radix) {
  const std::size_t nbits = mixed_radix_bits(count, radix);
  if (pos + nbits > buf.size()) throw std::out_of_range("read_mixed_radix: read past end");
  detail::Limbs v((nbits + 31) / 32, 0);
  for (std::size_t i = 0; i < nbits; ++i) {
    if (buf[pos + i]) v[i / 32] |= 1u << (i % 32);
  }
  while (!v.empty() && v.back() == 0) v.pop_back();
  std::vector<std::uint32_t> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = detail::div_small(v, radix);
  if (!v.empty()) throw std::invalid_argument("read_mixed_radix: value exceeds symbol range");
  return out;
}

}  // namespace cqsim::numkit
