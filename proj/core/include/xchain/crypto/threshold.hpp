#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "xchain/crypto/bn254.hpp"

namespace xchain::crypto::threshold {

struct ThresholdConfig {
  std::uint32_t n = 1;
  std::uint32_t f = 0;
  std::uint32_t m = 1;

  /// m = f + 1.
  static ThresholdConfig from_fault_tolerance(std::uint32_t n, std::uint32_t f) { return {n, f, f + 1}; }
  /// Throws std::invalid_argument unless 1 <= m <= n.
  void validate() const;

  friend bool operator==(const ThresholdConfig&, const ThresholdConfig&) = default;
};

class ThresholdError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by dkg_round when a dealing does not match its commitments.
class FaultyDealerError : public ThresholdError {
 public:
  explicit FaultyDealerError(std::uint32_t dealer)
      : ThresholdError("dealing from dealer " + std::to_string(dealer) + " fails commitment check"),
        dealer_(dealer) {}
  std::uint32_t dealer() const { return dealer_; }

 private:
  std::uint32_t dealer_;
};

using Scalar = bn254::Fr;

/// BLS over BN254: signatures in G1, keys in G2; verification checks e(sig, g2) == e(H(m), pk).
struct Bn254Group {
  using SigPoint = bn254::G1;
  using KeyPoint = bn254::G2;

  static SigPoint hash(ByteView message) { return bn254::hash_to_g1(message); }
  static KeyPoint key_generator() { return bn254::g2_generator(); }
  static SigPoint mul(const SigPoint& p, const Scalar& s) { return p.mul(s.to_uint()); }
  static KeyPoint mul(const KeyPoint& p, const Scalar& s) { return p.mul(s.to_uint()); }
  static SigPoint sig_identity() { return SigPoint::identity(); }
  static KeyPoint key_identity() { return KeyPoint::identity(); }
  static bool verify(const KeyPoint& pk, ByteView message, const SigPoint& sig);

  static Bytes encode_sig(const SigPoint& p) { return bn254::encode_g1(p); }
  static std::optional<SigPoint> decode_sig(ByteView b) { return bn254::decode_g1(b); }
  static Bytes encode_key(const KeyPoint& p) { return bn254::encode_g2(p); }
  static std::optional<KeyPoint> decode_key(ByteView b) { return bn254::decode_g2(b); }
};

/// Fast test double: both groups are Fr under addition with generator 1, H(m) = keccak(m) mod r,
/// and the "pairing" is field multiplication. Offers no security.
struct SimulatedGroup {
  struct SigPoint {
    Scalar v;
    friend SigPoint operator+(const SigPoint& a, const SigPoint& b) { return {a.v + b.v}; }
    SigPoint& operator+=(const SigPoint& o) { return *this = *this + o; }
    friend bool operator==(const SigPoint&, const SigPoint&) = default;
  };
  struct KeyPoint {
    Scalar v;
    friend KeyPoint operator+(const KeyPoint& a, const KeyPoint& b) { return {a.v + b.v}; }
    KeyPoint& operator+=(const KeyPoint& o) { return *this = *this + o; }
    friend bool operator==(const KeyPoint&, const KeyPoint&) = default;
  };

  static SigPoint hash(ByteView message);
  static KeyPoint key_generator() { return {Scalar::one()}; }
  static SigPoint mul(const SigPoint& p, const Scalar& s) { return {p.v * s}; }
  static KeyPoint mul(const KeyPoint& p, const Scalar& s) { return {p.v * s}; }
  static SigPoint sig_identity() { return {}; }
  static KeyPoint key_identity() { return {}; }
  static bool verify(const KeyPoint& pk, ByteView message, const SigPoint& sig) {
    return sig.v == hash(message).v * pk.v;
  }

  static Bytes encode_sig(const SigPoint& p) { return p.v.to_be_bytes(); }
  static std::optional<SigPoint> decode_sig(ByteView b);
  static Bytes encode_key(const KeyPoint& p) { return p.v.to_be_bytes(); }
  static std::optional<KeyPoint> decode_key(ByteView b);
};

template <class Group>
struct KeyShare {
  std::uint32_t index = 0;
  Scalar scalar;
  typename Group::KeyPoint group_public_key;
  /// scalar * generator; lets a coordinator check individual signature shares.
  typename Group::KeyPoint public_share;
};

template <class Group>
struct SignatureShare {
  std::uint32_t index = 0;
  typename Group::SigPoint point;
};

template <class Group>
struct ThresholdSignature {
  typename Group::SigPoint point;
};

template <class Group>
struct Dealing {
  std::uint32_t dealer = 0;
  /// contributions[i] is the share for participant i + 1.
  std::vector<Scalar> contributions;
  /// Feldman commitments, one per polynomial coefficient.
  std::vector<typename Group::KeyPoint> commitments;
};

template <class Group>
struct KeySet {
  ThresholdConfig config;
  std::vector<KeyShare<Group>> shares;
  typename Group::KeyPoint public_key;
};

/// Uniform scalar built from four 64-bit draws, reduced mod r.
Scalar random_scalar(std::mt19937_64& rng);

template <class Group>
class ThresholdScheme {
 public:
  using SigPoint = typename Group::SigPoint;
  using KeyPoint = typename Group::KeyPoint;
  using Share = KeyShare<Group>;
  using SigShare = SignatureShare<Group>;
  using Signature = ThresholdSignature<Group>;
  using DealingT = Dealing<Group>;
  using KeySetT = KeySet<Group>;

  static KeySetT keygen_dealer(const ThresholdConfig& config, std::uint64_t seed) {
    config.validate();
    return assemble(config, {make_dealing(1, config, seed)});
  }

  static DealingT make_dealing(std::uint32_t dealer, const ThresholdConfig& config, std::uint64_t seed) {
    config.validate();
    std::vector<Scalar> coeffs = random_polynomial(config, seed);
    DealingT d;
    d.dealer = dealer;
    for (std::uint32_t i = 1; i <= config.n; ++i) d.contributions.push_back(evaluate(coeffs, i));
    for (const Scalar& c : coeffs) d.commitments.push_back(Group::mul(Group::key_generator(), c));
    return d;
  }

  static bool verify_dealing(const DealingT& d, const ThresholdConfig& config) {
    if (d.contributions.size() != config.n || d.commitments.size() != config.m) return false;
    for (std::uint32_t i = 1; i <= config.n; ++i) {
      if (!(Group::mul(Group::key_generator(), d.contributions[i - 1]) == commitment_at(d.commitments, i))) {
        return false;
      }
    }
    return true;
  }

  /// Throws FaultyDealerError naming the first dealing that fails verification.
  static KeySetT dkg_round(std::span<const DealingT> dealings, const ThresholdConfig& config) {
    config.validate();
    if (dealings.empty()) throw ThresholdError("dkg_round needs at least one dealing");
    for (const auto& d : dealings) {
      if (!verify_dealing(d, config)) throw FaultyDealerError(d.dealer);
    }
    return assemble(config, std::vector<DealingT>(dealings.begin(), dealings.end()));
  }

  static SigShare sign_share(const Share& share, ByteView message) {
    return {share.index, Group::mul(Group::hash(message), share.scalar)};
  }

  static bool verify_share(const KeyPoint& public_share, ByteView message, const SigShare& s) {
    return Group::verify(public_share, message, s.point);
  }

  /// Lagrange interpolation at zero over the m lowest-indexed shares.
  static Signature combine(std::span<const SigShare> shares, const ThresholdConfig& config) {
    std::set<std::uint32_t> seen;
    for (const auto& s : shares) {
      if (s.index == 0 || s.index > config.n) throw ThresholdError("share index out of range");
      if (!seen.insert(s.index).second) throw ThresholdError("duplicate share index");
    }
    if (shares.size() < config.m) throw ThresholdError("insufficient shares");
    std::vector<SigShare> chosen(shares.begin(), shares.end());
    std::sort(chosen.begin(), chosen.end(), [](const auto& a, const auto& b) { return a.index < b.index; });
    chosen.resize(config.m);

    SigPoint acc = Group::sig_identity();
    for (const auto& s : chosen) {
      Scalar num = Scalar::one();
      Scalar den = Scalar::one();
      Scalar xi = Scalar::from_u64(s.index);
      for (const auto& o : chosen) {
        if (o.index == s.index) continue;
        Scalar xj = Scalar::from_u64(o.index);
        num *= xj;
        den *= xj - xi;
      }
      acc += Group::mul(s.point, num * den.inverse());
    }
    return {acc};
  }

  static bool verify(const KeyPoint& public_key, ByteView message, const Signature& sig) {
    return Group::verify(public_key, message, sig.point);
  }

 private:
  static std::vector<Scalar> random_polynomial(const ThresholdConfig& config, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<Scalar> coeffs;
    while (coeffs.size() < config.m) {
      Scalar c = random_scalar(rng);
      if (coeffs.empty() && c.is_zero()) continue;
      coeffs.push_back(c);
    }
    return coeffs;
  }

  static Scalar evaluate(const std::vector<Scalar>& coeffs, std::uint32_t x) {
    Scalar xs = Scalar::from_u64(x);
    Scalar acc = Scalar::zero();
    for (std::size_t j = coeffs.size(); j-- > 0;) acc = acc * xs + coeffs[j];
    return acc;
  }

  static KeyPoint commitment_at(const std::vector<KeyPoint>& commitments, std::uint32_t x) {
    Scalar xs = Scalar::from_u64(x);
    Scalar power = Scalar::one();
    KeyPoint acc = Group::key_identity();
    for (const auto& c : commitments) {
      acc += Group::mul(c, power);
      power *= xs;
    }
    return acc;
  }

  static KeySetT assemble(const ThresholdConfig& config, const std::vector<DealingT>& dealings) {
    std::vector<KeyPoint> commitments(config.m, Group::key_identity());
    for (const auto& d : dealings) {
      for (std::size_t j = 0; j < config.m; ++j) commitments[j] += d.commitments[j];
    }
    KeySetT ks;
    ks.config = config;
    ks.public_key = commitments[0];
    for (std::uint32_t i = 1; i <= config.n; ++i) {
      Scalar s = Scalar::zero();
      for (const auto& d : dealings) s += d.contributions[i - 1];
      ks.shares.push_back(Share{i, s, ks.public_key, Group::mul(Group::key_generator(), s)});
    }
    return ks;
  }
};

using Bn254Scheme = ThresholdScheme<Bn254Group>;
using SimulatedScheme = ThresholdScheme<SimulatedGroup>;

// Byte-level view of a threshold scheme for the protocol layers.

struct EncodedShare {
  std::uint32_t index = 0;
  Bytes secret;
  Bytes public_share;
};

struct EncodedKeySet {
  ThresholdConfig config;
  Bytes public_key;
  std::vector<EncodedShare> shares;
};

enum class SchemeKind { Bn254, Simulated };

class SignatureScheme {
 public:
  virtual ~SignatureScheme() = default;

  virtual SchemeKind kind() const = 0;
  virtual EncodedKeySet keygen(const ThresholdConfig& config, std::uint64_t seed) const = 0;
  /// Joint-Feldman DKG with one dealer per seed. Dealers listed in `corrupt` hand participant 1 a bad
  /// share; each dealing that fails verification is excluded and the round repeated. Excluded dealer
  /// indices are appended to `excluded` when non-null.
  virtual EncodedKeySet keygen_dkg(const ThresholdConfig& config, std::span<const std::uint64_t> dealer_seeds,
                                   const std::set<std::uint32_t>& corrupt,
                                   std::vector<std::uint32_t>* excluded) const = 0;
  virtual Bytes sign_share(const EncodedShare& share, ByteView message) const = 0;
  virtual bool verify_share(ByteView public_share, ByteView message, ByteView share_sig) const = 0;
  /// nullopt when fewer than m decodable shares with distinct indices are supplied.
  virtual std::optional<Bytes> combine(std::span<const std::pair<std::uint32_t, Bytes>> shares,
                                       const ThresholdConfig& config) const = 0;
  virtual bool verify(ByteView public_key, ByteView message, ByteView signature) const = 0;
  /// An arbitrary well-formed signature value that will not verify, used by fault injection.
  virtual Bytes forged_share(std::uint64_t seed) const = 0;
};

std::unique_ptr<SignatureScheme> make_scheme(SchemeKind kind);
const char* scheme_name(SchemeKind kind);

}  // namespace xchain::crypto::threshold
