#pragma once

#include <cstdint>
#include <optional>

#include "xchain/crypto/field.hpp"
#include "xchain/crypto/weierstrass.hpp"

// Recoverable ECDSA over secp256k1, mirroring Ethereum account signatures.
namespace xchain::crypto::secp256k1 {

struct FpParams {
  static constexpr UInt256 kModulus = UInt256::from_dec(
      "115792089237316195423570985008687907853269984665640564039457584007908834671663");
};
struct FnParams {
  static constexpr UInt256 kModulus = UInt256::from_dec(
      "115792089237316195423570985008687907852837564279074904382605163141518161494337");
};

using Fp = PrimeField<FpParams>;
using Fn = PrimeField<FnParams>;

struct Curve {
  static Fp b() { return Fp::from_u64(7); }
};
using Point = JacobianPoint<Fp, Curve>;

Point generator();

/// (r, s, v) with v = 27 + recovery id; s is always in the lower half of the order.
struct RecoverableSignature {
  Hash256 r;
  Hash256 s;
  std::uint8_t v = 0;

  friend bool operator==(const RecoverableSignature&, const RecoverableSignature&) = default;
};

/// Address derivation: the last 20 bytes of keccak256(x || y).
Address address_of(const Point& public_key);

class AccountKey {
 public:
  /// Throws std::invalid_argument unless 0 < secret < n.
  explicit AccountKey(const Hash256& secret);
  /// Deterministic test key derived from keccak256("account" || seed).
  static AccountKey from_seed(std::uint64_t seed);

  const Address& address() const { return address_; }
  const Point& public_key() const { return public_key_; }

  /// Deterministic nonce: k = keccak256(d || digest || counter) mod n.
  RecoverableSignature sign(const Hash256& digest) const;

 private:
  Fn secret_;
  Point public_key_;
  Address address_;
};

/// nullopt for out-of-range components or when no point recovers.
std::optional<Address> recover_address(const Hash256& digest, const RecoverableSignature& sig);

}  // namespace xchain::crypto::secp256k1
