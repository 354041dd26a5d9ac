#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string_view>

#include "xchain/common/bytes.hpp"

namespace xchain::crypto {

using u128 = unsigned __int128;

/// Little-endian 4x64 limb integer used underneath the finite-field arithmetic.
struct UInt256 {
  std::array<std::uint64_t, 4> limbs{};

  static constexpr UInt256 from_u64(std::uint64_t v) { return UInt256{{v, 0, 0, 0}}; }

  /// Constant-expression decimal parser used for curve parameters.
  static constexpr UInt256 from_dec(std::string_view s) {
    UInt256 out;
    for (char c : s) {
      if (c < '0' || c > '9') throw std::invalid_argument("bad decimal digit");
      std::uint64_t carry = static_cast<std::uint64_t>(c - '0');
      for (auto& limb : out.limbs) {
        u128 t = static_cast<u128>(limb) * 10 + carry;
        limb = static_cast<std::uint64_t>(t);
        carry = static_cast<std::uint64_t>(t >> 64);
      }
      if (carry != 0) throw std::overflow_error("decimal constant exceeds 256 bits");
    }
    return out;
  }

  static UInt256 from_be_bytes(ByteView bytes) {
    if (bytes.size() > 32) throw std::overflow_error("more than 32 bytes");
    UInt256 out;
    std::size_t n = bytes.size();
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t bit = 8 * (n - 1 - i);
      out.limbs[bit / 64] |= static_cast<std::uint64_t>(bytes[i]) << (bit % 64);
    }
    return out;
  }

  void to_be_bytes(std::span<Byte, 32> out) const {
    for (std::size_t i = 0; i < 32; ++i) {
      std::size_t bit = 8 * (31 - i);
      out[i] = static_cast<Byte>(limbs[bit / 64] >> (bit % 64));
    }
  }

  Bytes to_be_bytes() const {
    Bytes out(32);
    to_be_bytes(std::span<Byte, 32>(out.data(), 32));
    return out;
  }

  constexpr bool is_zero() const { return (limbs[0] | limbs[1] | limbs[2] | limbs[3]) == 0; }
  constexpr bool bit(std::size_t i) const { return (limbs[i / 64] >> (i % 64)) & 1; }
  constexpr bool is_odd() const { return limbs[0] & 1; }

  constexpr std::size_t bit_length() const {
    for (int i = 3; i >= 0; --i) {
      if (limbs[i] != 0) return 64 * i + (64 - static_cast<std::size_t>(__builtin_clzll(limbs[i])));
    }
    return 0;
  }

  friend constexpr std::strong_ordering operator<=>(const UInt256& a, const UInt256& b) {
    for (int i = 3; i >= 0; --i) {
      if (a.limbs[i] != b.limbs[i]) return a.limbs[i] <=> b.limbs[i];
    }
    return std::strong_ordering::equal;
  }
  friend constexpr bool operator==(const UInt256&, const UInt256&) = default;
};

/// out = a + b, returns the carry.
constexpr std::uint64_t add_carry(UInt256& out, const UInt256& a, const UInt256& b) {
  std::uint64_t carry = 0;
  for (int i = 0; i < 4; ++i) {
    u128 t = static_cast<u128>(a.limbs[i]) + b.limbs[i] + carry;
    out.limbs[i] = static_cast<std::uint64_t>(t);
    carry = static_cast<std::uint64_t>(t >> 64);
  }
  return carry;
}

/// out = a - b, returns the borrow.
constexpr std::uint64_t sub_borrow(UInt256& out, const UInt256& a, const UInt256& b) {
  std::uint64_t borrow = 0;
  for (int i = 0; i < 4; ++i) {
    u128 t = static_cast<u128>(a.limbs[i]) - b.limbs[i] - borrow;
    out.limbs[i] = static_cast<std::uint64_t>(t);
    borrow = static_cast<std::uint64_t>(t >> 64) & 1;
  }
  return borrow;
}

constexpr UInt256 shr1(const UInt256& a) {
  UInt256 out;
  for (int i = 0; i < 4; ++i) {
    out.limbs[i] = a.limbs[i] >> 1;
    if (i < 3) out.limbs[i] |= a.limbs[i + 1] << 63;
  }
  return out;
}

/// Quotient of a by a small divisor (remainder discarded).
constexpr UInt256 div_small(const UInt256& a, std::uint64_t d) {
  UInt256 out;
  u128 rem = 0;
  for (int i = 3; i >= 0; --i) {
    u128 cur = (rem << 64) | a.limbs[i];
    out.limbs[i] = static_cast<std::uint64_t>(cur / d);
    rem = cur % d;
  }
  return out;
}

}  // namespace xchain::crypto
