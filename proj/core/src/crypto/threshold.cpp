#include "xchain/crypto/threshold.hpp"

#include <map>
#include <mutex>

#include "xchain/crypto/keccak.hpp"

namespace xchain::crypto::threshold {
namespace {

/// Line precomputation dominates a single verification, so prepared keys are memoised by encoding.
class PreparedKeyCache {
 public:
  std::shared_ptr<const bn254::G2Prepared> get(const bn254::G2& key) {
    Bytes encoded = bn254::encode_g2(key);
    std::lock_guard lock(mu_);
    auto it = entries_.find(encoded);
    if (it != entries_.end()) return it->second;
    if (entries_.size() >= kMaxEntries) entries_.clear();
    auto prepared = std::make_shared<const bn254::G2Prepared>(key);
    entries_.emplace(std::move(encoded), prepared);
    return prepared;
  }

 private:
  static constexpr std::size_t kMaxEntries = 4096;
  std::mutex mu_;
  std::map<Bytes, std::shared_ptr<const bn254::G2Prepared>> entries_;
};

PreparedKeyCache& prepared_cache() {
  static PreparedKeyCache cache;
  return cache;
}

const bn254::G2Prepared& negated_generator() {
  static const bn254::G2Prepared prepared(-bn254::g2_generator());
  return prepared;
}

template <class Group>
class ErasedScheme final : public SignatureScheme {
 public:
  using Scheme = ThresholdScheme<Group>;

  explicit ErasedScheme(SchemeKind kind) : kind_(kind) {}

  SchemeKind kind() const override { return kind_; }

  EncodedKeySet keygen(const ThresholdConfig& config, std::uint64_t seed) const override {
    return encode(config, Scheme::keygen_dealer(config, seed));
  }

  EncodedKeySet keygen_dkg(const ThresholdConfig& config, std::span<const std::uint64_t> dealer_seeds,
                           const std::set<std::uint32_t>& corrupt,
                           std::vector<std::uint32_t>* excluded) const override {
    std::vector<Dealing<Group>> dealings;
    for (std::size_t i = 0; i < dealer_seeds.size(); ++i) {
      auto idx = static_cast<std::uint32_t>(i + 1);
      auto d = Scheme::make_dealing(idx, config, dealer_seeds[i]);
      if (corrupt.count(idx)) d.contributions[0] += Scalar::one();
      dealings.push_back(std::move(d));
    }
    while (true) {
      try {
        return encode(config, Scheme::dkg_round(dealings, config));
      } catch (const FaultyDealerError& e) {
        if (excluded != nullptr) excluded->push_back(e.dealer());
        std::erase_if(dealings, [&](const auto& d) { return d.dealer == e.dealer(); });
      }
    }
  }

  static EncodedKeySet encode(const ThresholdConfig& config, const KeySet<Group>& ks) {
    EncodedKeySet out;
    out.config = config;
    out.public_key = Group::encode_key(ks.public_key);
    for (const auto& s : ks.shares) {
      out.shares.push_back(EncodedShare{s.index, s.scalar.to_be_bytes(), Group::encode_key(s.public_share)});
    }
    return out;
  }

  Bytes sign_share(const EncodedShare& share, ByteView message) const override {
    auto scalar = Scalar::from_be_bytes_canonical(share.secret);
    if (!scalar) throw ThresholdError("malformed secret share");
    KeyShare<Group> ks{share.index, *scalar, Group::key_identity(), Group::key_identity()};
    return Group::encode_sig(Scheme::sign_share(ks, message).point);
  }

  bool verify_share(ByteView public_share, ByteView message, ByteView share_sig) const override {
    return verify(public_share, message, share_sig);
  }

  std::optional<Bytes> combine(std::span<const std::pair<std::uint32_t, Bytes>> shares,
                               const ThresholdConfig& config) const override {
    std::vector<SignatureShare<Group>> decoded;
    for (const auto& [index, bytes] : shares) {
      auto point = Group::decode_sig(bytes);
      if (!point) return std::nullopt;
      decoded.push_back({index, *point});
    }
    try {
      return Group::encode_sig(Scheme::combine(decoded, config).point);
    } catch (const ThresholdError&) {
      return std::nullopt;
    }
  }

  bool verify(ByteView public_key, ByteView message, ByteView signature) const override {
    auto pk = decode_key_cached(public_key);
    auto sig = Group::decode_sig(signature);
    if (!pk || !sig) return false;
    return Group::verify(*pk, message, *sig);
  }

  Bytes forged_share(std::uint64_t seed) const override {
    std::mt19937_64 rng(seed);
    return Group::encode_sig(Group::mul(Group::hash(to_bytes("forged")), random_scalar(rng)));
  }

 private:
  /// decode_g2 runs a subgroup check, so decoded keys are memoised.
  std::optional<typename Group::KeyPoint> decode_key_cached(ByteView bytes) const {
    Bytes key(bytes.begin(), bytes.end());
    std::lock_guard lock(mu_);
    auto it = keys_.find(key);
    if (it != keys_.end()) return it->second;
    auto decoded = Group::decode_key(bytes);
    if (keys_.size() >= 4096) keys_.clear();
    keys_.emplace(std::move(key), decoded);
    return decoded;
  }

  SchemeKind kind_;
  mutable std::mutex mu_;
  mutable std::map<Bytes, std::optional<typename Group::KeyPoint>> keys_;
};

}  // namespace

void ThresholdConfig::validate() const {
  if (m == 0 || m > n) {
    throw std::invalid_argument("invalid threshold config: need 1 <= m <= n (n=" + std::to_string(n) +
                                ", m=" + std::to_string(m) + ")");
  }
}

Scalar random_scalar(std::mt19937_64& rng) {
  Bytes raw(32);
  for (std::size_t i = 0; i < 4; ++i) {
    std::uint64_t w = rng();
    for (std::size_t b = 0; b < 8; ++b) raw[8 * i + b] = static_cast<Byte>(w >> (56 - 8 * b));
  }
  return Scalar::from_be_bytes_reduce(raw);
}

bool Bn254Group::verify(const KeyPoint& pk, ByteView message, const SigPoint& sig) {
  if (pk.is_identity() || sig.is_identity()) return false;
  auto prepared = prepared_cache().get(pk);
  std::pair<bn254::G1, const bn254::G2Prepared*> pairs[] = {{sig, &negated_generator()},
                                                            {hash(message), prepared.get()}};
  return bn254::pairing_product_is_one(pairs);
}

SimulatedGroup::SigPoint SimulatedGroup::hash(ByteView message) {
  return {Scalar::from_be_bytes_reduce(keccak256(message).view())};
}

std::optional<SimulatedGroup::SigPoint> SimulatedGroup::decode_sig(ByteView b) {
  auto v = Scalar::from_be_bytes_canonical(b);
  if (!v) return std::nullopt;
  return SigPoint{*v};
}

std::optional<SimulatedGroup::KeyPoint> SimulatedGroup::decode_key(ByteView b) {
  auto v = Scalar::from_be_bytes_canonical(b);
  if (!v) return std::nullopt;
  return KeyPoint{*v};
}

std::unique_ptr<SignatureScheme> make_scheme(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::Bn254:
      return std::make_unique<ErasedScheme<Bn254Group>>(kind);
    case SchemeKind::Simulated:
      return std::make_unique<ErasedScheme<SimulatedGroup>>(kind);
  }
  throw std::invalid_argument("unknown scheme kind");
}

const char* scheme_name(SchemeKind kind) { return kind == SchemeKind::Bn254 ? "bn254" : "simulated"; }

}  // namespace xchain::crypto::threshold
