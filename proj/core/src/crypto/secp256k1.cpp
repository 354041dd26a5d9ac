#include "xchain/crypto/secp256k1.hpp"

#include <stdexcept>

#include "xchain/crypto/keccak.hpp"

namespace xchain::crypto::secp256k1 {
namespace {

Hash256 to_hash(const UInt256& v) {
  Hash256 out;
  v.to_be_bytes(std::span<Byte, 32>(out.data.data(), 32));
  return out;
}

UInt256 half_order() { return shr1(Fn::kModulus); }

}  // namespace

Point generator() {
  static const Point g = Point::from_affine(AffinePoint<Fp>{
      Fp::from_dec("55066263022277343669578718895168534326250603453777594175500187360389116729240"),
      Fp::from_dec("32670510020758816978083085130507043184471273380659243275938904335757337482424"), false});
  return g;
}

Address address_of(const Point& public_key) {
  auto a = public_key.to_affine();
  Bytes xy = a.x.to_be_bytes();
  append(xy, a.y.to_be_bytes());
  Hash256 h = keccak256(xy);
  return Address::from_view(h.view().subspan(12));
}

AccountKey::AccountKey(const Hash256& secret) {
  UInt256 d = UInt256::from_be_bytes(secret.view());
  if (d.is_zero() || d >= Fn::kModulus) throw std::invalid_argument("account secret out of range");
  secret_ = Fn::from_uint(d);
  public_key_ = generator().mul(d);
  address_ = address_of(public_key_);
}

AccountKey AccountKey::from_seed(std::uint64_t seed) {
  Bytes material = to_bytes("account");
  for (int i = 7; i >= 0; --i) material.push_back(static_cast<Byte>(seed >> (8 * i)));
  for (std::uint32_t ctr = 0;; ++ctr) {
    Bytes attempt = material;
    attempt.push_back(static_cast<Byte>(ctr));
    Hash256 h = keccak256(attempt);
    UInt256 d = UInt256::from_be_bytes(h.view());
    if (!d.is_zero() && d < Fn::kModulus) return AccountKey(h);
  }
}

RecoverableSignature AccountKey::sign(const Hash256& digest) const {
  Fn z = Fn::from_be_bytes_reduce(digest.view());
  Bytes seed = secret_.to_be_bytes();
  append(seed, digest.view());
  for (std::uint32_t ctr = 0;; ++ctr) {
    Bytes material = seed;
    for (int i = 3; i >= 0; --i) material.push_back(static_cast<Byte>(ctr >> (8 * i)));
    Fn k = Fn::from_be_bytes_reduce(keccak256(material).view());
    if (k.is_zero()) continue;
    auto big_r = generator().mul(k.to_uint()).to_affine();
    UInt256 rx = big_r.x.to_uint();
    Fn r = Fn::from_be_bytes_reduce(to_hash(rx).view());
    if (r.is_zero()) continue;
    Fn s = k.inverse() * (z + r * secret_);
    if (s.is_zero()) continue;
    std::uint8_t recid = (big_r.y.is_odd() ? 1 : 0) | (rx >= Fn::kModulus ? 2 : 0);
    if (s.to_uint() > half_order()) {
      s = -s;
      recid ^= 1;
    }
    return RecoverableSignature{to_hash(r.to_uint()), to_hash(s.to_uint()), static_cast<std::uint8_t>(27 + recid)};
  }
}

std::optional<Address> recover_address(const Hash256& digest, const RecoverableSignature& sig) {
  if (sig.v < 27 || sig.v > 30) return std::nullopt;
  std::uint8_t recid = sig.v - 27;
  UInt256 r_int = UInt256::from_be_bytes(sig.r.view());
  UInt256 s_int = UInt256::from_be_bytes(sig.s.view());
  if (r_int.is_zero() || r_int >= Fn::kModulus || s_int.is_zero() || s_int >= Fn::kModulus) return std::nullopt;

  UInt256 x_int = r_int;
  if (recid & 2) {
    if (add_carry(x_int, r_int, Fn::kModulus) != 0) return std::nullopt;
  }
  if (x_int >= Fp::kModulus) return std::nullopt;
  Fp x = Fp::from_uint(x_int);
  auto y = (x.square() * x + Curve::b()).sqrt();
  if (!y) return std::nullopt;
  if (y->is_odd() != static_cast<bool>(recid & 1)) *y = -*y;
  Point big_r = Point::from_affine(AffinePoint<Fp>{x, *y, false});

  Fn r = Fn::from_uint(r_int);
  Fn s = Fn::from_uint(s_int);
  Fn z = Fn::from_be_bytes_reduce(digest.view());
  Fn r_inv = r.inverse();
  Point q = big_r.mul((s * r_inv).to_uint()) + (-generator().mul((z * r_inv).to_uint()));
  if (q.is_identity()) return std::nullopt;
  return address_of(q);
}

}  // namespace xchain::crypto::secp256k1
