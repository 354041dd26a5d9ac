#pragma once

#include <cstdint>
#include <optional>

#include "xchain/crypto/uint256.hpp"

namespace xchain::crypto {

namespace detail {

/// -p^{-1} mod 2^64 by Newton iteration.
constexpr std::uint64_t montgomery_neg_inv(std::uint64_t p0) {
  std::uint64_t inv = 1;
  for (int i = 0; i < 6; ++i) inv *= 2 - p0 * inv;
  return ~inv + 1;
}

constexpr UInt256 double_mod(const UInt256& a, const UInt256& p) {
  UInt256 out;
  std::uint64_t carry = add_carry(out, a, a);
  if (carry != 0 || out >= p) sub_borrow(out, out, p);
  return out;
}

/// 2^bits mod p.
constexpr UInt256 pow2_mod(std::size_t bits, const UInt256& p) {
  UInt256 v = UInt256::from_u64(1);
  for (std::size_t i = 0; i < bits; ++i) v = double_mod(v, p);
  return v;
}

}  // namespace detail

/// Prime field element in Montgomery form. Params supplies `static constexpr UInt256 kModulus`
/// (odd, any width up to 256 bits).
template <class Params>
class PrimeField {
 public:
  static constexpr UInt256 kModulus = Params::kModulus;
  static constexpr std::uint64_t kNegInv = detail::montgomery_neg_inv(kModulus.limbs[0]);
  static constexpr UInt256 kR = detail::pow2_mod(256, kModulus);
  static constexpr UInt256 kR2 = detail::pow2_mod(512, kModulus);

  constexpr PrimeField() = default;

  static constexpr PrimeField zero() { return PrimeField(); }
  static constexpr PrimeField one() { return from_raw_montgomery(kR); }

  /// Requires v < modulus.
  static constexpr PrimeField from_uint(const UInt256& v) {
    PrimeField out;
    out.v_ = mont_mul(v, kR2);
    return out;
  }
  static constexpr PrimeField from_u64(std::uint64_t v) { return from_uint(reduce_once(UInt256::from_u64(v))); }
  static constexpr PrimeField from_dec(std::string_view s) { return from_uint(UInt256::from_dec(s)); }

  /// Interprets up to 32 big-endian bytes and reduces modulo the field prime.
  static PrimeField from_be_bytes_reduce(ByteView bytes) {
    UInt256 v = UInt256::from_be_bytes(bytes);
    while (v >= kModulus) sub_borrow(v, v, kModulus);
    return from_uint(v);
  }
  /// Strict parse: rejects encodings of values >= modulus.
  static std::optional<PrimeField> from_be_bytes_canonical(ByteView bytes) {
    if (bytes.size() != 32) return std::nullopt;
    UInt256 v = UInt256::from_be_bytes(bytes);
    if (v >= kModulus) return std::nullopt;
    return from_uint(v);
  }

  constexpr UInt256 to_uint() const { return mont_mul(v_, UInt256::from_u64(1)); }
  Bytes to_be_bytes() const { return to_uint().to_be_bytes(); }
  void to_be_bytes(std::span<Byte, 32> out) const { to_uint().to_be_bytes(out); }

  constexpr bool is_zero() const { return v_.is_zero(); }
  friend constexpr bool operator==(const PrimeField&, const PrimeField&) = default;

  friend constexpr PrimeField operator+(const PrimeField& a, const PrimeField& b) {
    PrimeField out;
    std::uint64_t carry = add_carry(out.v_, a.v_, b.v_);
    if (carry != 0 || out.v_ >= kModulus) sub_borrow(out.v_, out.v_, kModulus);
    return out;
  }
  friend constexpr PrimeField operator-(const PrimeField& a, const PrimeField& b) {
    PrimeField out;
    if (sub_borrow(out.v_, a.v_, b.v_) != 0) add_carry(out.v_, out.v_, kModulus);
    return out;
  }
  constexpr PrimeField operator-() const { return zero() - *this; }
  friend constexpr PrimeField operator*(const PrimeField& a, const PrimeField& b) {
    return from_raw_montgomery(mont_mul(a.v_, b.v_));
  }
  PrimeField& operator+=(const PrimeField& o) { return *this = *this + o; }
  PrimeField& operator-=(const PrimeField& o) { return *this = *this - o; }
  PrimeField& operator*=(const PrimeField& o) { return *this = *this * o; }

  constexpr PrimeField square() const { return *this * *this; }
  constexpr PrimeField dbl() const { return *this + *this; }

  constexpr PrimeField pow(const UInt256& e) const {
    PrimeField result = one();
    for (std::size_t i = e.bit_length(); i-- > 0;) {
      result = result.square();
      if (e.bit(i)) result = result * *this;
    }
    return result;
  }

  /// Multiplicative inverse via Fermat; the inverse of zero is zero.
  constexpr PrimeField inverse() const {
    UInt256 e;
    sub_borrow(e, kModulus, UInt256::from_u64(2));
    return pow(e);
  }

  /// Square root for p = 3 mod 4 moduli; nullopt when the element is a non-residue.
  std::optional<PrimeField> sqrt() const {
    static_assert((kModulus.limbs[0] & 3) == 3, "sqrt implemented for p = 3 mod 4 only");
    UInt256 e;
    add_carry(e, kModulus, UInt256::from_u64(1));  // cannot overflow: callers use p < 2^256 - 1
    e = shr1(shr1(e));
    PrimeField r = pow(e);
    if (r.square() != *this) return std::nullopt;
    return r;
  }

  /// Parity of the canonical integer representative.
  bool is_odd() const { return to_uint().is_odd(); }

 private:
  static constexpr PrimeField from_raw_montgomery(const UInt256& v) {
    PrimeField out;
    out.v_ = v;
    return out;
  }

  static constexpr UInt256 reduce_once(UInt256 v) {
    while (v >= kModulus) sub_borrow(v, v, kModulus);
    return v;
  }

  /// CIOS Montgomery multiplication: a * b * 2^-256 mod p; tolerates moduli close to 2^256.
  static constexpr UInt256 mont_mul(const UInt256& a, const UInt256& b) {
    std::uint64_t t[6] = {0, 0, 0, 0, 0, 0};
    const auto& p = kModulus.limbs;
    for (int i = 0; i < 4; ++i) {
      std::uint64_t carry = 0;
      for (int j = 0; j < 4; ++j) {
        u128 s = static_cast<u128>(a.limbs[j]) * b.limbs[i] + t[j] + carry;
        t[j] = static_cast<std::uint64_t>(s);
        carry = static_cast<std::uint64_t>(s >> 64);
      }
      u128 s = static_cast<u128>(t[4]) + carry;
      t[4] = static_cast<std::uint64_t>(s);
      t[5] = static_cast<std::uint64_t>(s >> 64);

      std::uint64_t m = t[0] * kNegInv;
      s = static_cast<u128>(m) * p[0] + t[0];
      carry = static_cast<std::uint64_t>(s >> 64);
      for (int j = 1; j < 4; ++j) {
        s = static_cast<u128>(m) * p[j] + t[j] + carry;
        t[j - 1] = static_cast<std::uint64_t>(s);
        carry = static_cast<std::uint64_t>(s >> 64);
      }
      s = static_cast<u128>(t[4]) + carry;
      t[3] = static_cast<std::uint64_t>(s);
      t[4] = t[5] + static_cast<std::uint64_t>(s >> 64);
    }
    UInt256 out{{t[0], t[1], t[2], t[3]}};
    if (t[4] != 0 || out >= kModulus) sub_borrow(out, out, kModulus);
    return out;
  }

  UInt256 v_{};
};

}  // namespace xchain::crypto
