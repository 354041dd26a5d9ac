#include <gtest/gtest.h>

#include <random>

#include "xchain/crypto/threshold.hpp"

using namespace xchain;
using namespace xchain::crypto;
using namespace xchain::crypto::threshold;

namespace {

template <class Group>
class ThresholdTest : public ::testing::Test {
 protected:
  using Scheme = ThresholdScheme<Group>;

  static std::vector<SignatureShare<Group>> sign_all(const KeySet<Group>& ks, ByteView msg) {
    std::vector<SignatureShare<Group>> out;
    for (const auto& s : ks.shares) out.push_back(Scheme::sign_share(s, msg));
    return out;
  }
};

using Groups = ::testing::Types<SimulatedGroup, Bn254Group>;
TYPED_TEST_SUITE(ThresholdTest, Groups);

/// Calls fn on every k-subset of [0, n).
template <class Fn>
void for_each_subset(std::size_t n, std::size_t k, Fn fn) {
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  if (k > n) return;
  for (;;) {
    fn(idx);
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace

TEST(ThresholdConfig, FaultToleranceRule) {
  auto c = ThresholdConfig::from_fault_tolerance(5, 1);
  EXPECT_EQ(c.m, 2u);
  EXPECT_THROW((ThresholdConfig{3, 0, 4}).validate(), std::invalid_argument);
  EXPECT_THROW((ThresholdConfig{3, 0, 0}).validate(), std::invalid_argument);
}

TYPED_TEST(ThresholdTest, SingleSigner) {
  using Scheme = typename TestFixture::Scheme;
  auto ks = Scheme::keygen_dealer({1, 0, 1}, 7);
  ASSERT_EQ(ks.shares.size(), 1u);
  Bytes msg = to_bytes("solo");
  auto shares = TestFixture::sign_all(ks, msg);
  EXPECT_TRUE(Scheme::verify(ks.public_key, msg, Scheme::combine(shares, ks.config)));
}

TYPED_TEST(ThresholdTest, DeterministicKeygen) {
  using Scheme = typename TestFixture::Scheme;
  auto a = Scheme::keygen_dealer({4, 1, 3}, 99);
  auto b = Scheme::keygen_dealer({4, 1, 3}, 99);
  EXPECT_TRUE(a.public_key == b.public_key);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(a.shares[i].scalar, b.shares[i].scalar);
  auto c = Scheme::keygen_dealer({4, 1, 3}, 100);
  EXPECT_FALSE(a.public_key == c.public_key);
}

TYPED_TEST(ThresholdTest, SubsetInvariance) {
  using Scheme = typename TestFixture::Scheme;
  auto ks = Scheme::keygen_dealer(ThresholdConfig::from_fault_tolerance(5, 1), 3);
  Bytes msg = to_bytes("commit");
  auto all = TestFixture::sign_all(ks, msg);
  auto reference = Scheme::combine(std::span(all).subspan(0, 2), ks.config);
  EXPECT_TRUE(Scheme::verify(ks.public_key, msg, reference));
  for_each_subset(5, 2, [&](const std::vector<std::size_t>& idx) {
    std::vector<SignatureShare<TypeParam>> pick{all[idx[0]], all[idx[1]]};
    EXPECT_TRUE(Scheme::combine(pick, ks.config).point == reference.point);
  });
}

TYPED_TEST(ThresholdTest, SignShareProperties) {
  using Scheme = typename TestFixture::Scheme;
  auto ks = Scheme::keygen_dealer({4, 1, 2}, 11);
  Bytes msg = to_bytes("m");
  auto s1 = Scheme::sign_share(ks.shares[0], msg);
  EXPECT_TRUE(s1.point == Scheme::sign_share(ks.shares[0], msg).point);
  EXPECT_FALSE(s1.point == Scheme::sign_share(ks.shares[1], msg).point);
  EXPECT_TRUE(Scheme::verify_share(ks.shares[0].public_share, msg, s1));
  EXPECT_FALSE(Scheme::verify_share(ks.shares[1].public_share, msg, s1));

  Bytes empty;
  auto all = TestFixture::sign_all(ks, empty);
  EXPECT_TRUE(Scheme::verify(ks.public_key, empty, Scheme::combine(all, ks.config)));
}

TYPED_TEST(ThresholdTest, CombineErrors) {
  using Scheme = typename TestFixture::Scheme;
  auto ks = Scheme::keygen_dealer({5, 1, 2}, 5);
  Bytes msg = to_bytes("x");
  auto all = TestFixture::sign_all(ks, msg);
  std::vector<SignatureShare<TypeParam>> one{all[0]};
  EXPECT_THROW(Scheme::combine(one, ks.config), ThresholdError);
  std::vector<SignatureShare<TypeParam>> dup{all[0], all[0]};
  EXPECT_THROW(Scheme::combine(dup, ks.config), ThresholdError);
}

TYPED_TEST(ThresholdTest, WrongMessageAndForgery) {
  using Scheme = typename TestFixture::Scheme;
  auto ks = Scheme::keygen_dealer({4, 1, 2}, 21);
  Bytes a = to_bytes("A");
  auto all = TestFixture::sign_all(ks, a);
  auto sig = Scheme::combine(all, ks.config);
  EXPECT_FALSE(Scheme::verify(ks.public_key, to_bytes("B"), sig));

  std::mt19937_64 rng(4);
  SignatureShare<TypeParam> forged{2, TypeParam::mul(TypeParam::hash(to_bytes("junk")), random_scalar(rng))};
  std::vector<SignatureShare<TypeParam>> mixed{all[0], forged};
  EXPECT_FALSE(Scheme::verify(ks.public_key, a, Scheme::combine(mixed, ks.config)));
}

TYPED_TEST(ThresholdTest, DealingVerification) {
  using Scheme = typename TestFixture::Scheme;
  ThresholdConfig cfg{3, 1, 2};
  auto d = Scheme::make_dealing(1, cfg, 8);
  EXPECT_TRUE(Scheme::verify_dealing(d, cfg));
  auto altered = d;
  altered.contributions[1] += Scalar::one();
  EXPECT_FALSE(Scheme::verify_dealing(altered, cfg));
  auto truncated = d;
  truncated.commitments.pop_back();
  EXPECT_FALSE(Scheme::verify_dealing(truncated, cfg));
}

TYPED_TEST(ThresholdTest, DkgSingleDealingMatchesDealer) {
  using Scheme = typename TestFixture::Scheme;
  ThresholdConfig cfg{4, 1, 2};
  std::vector<typename Scheme::DealingT> dealings{Scheme::make_dealing(1, cfg, 42)};
  auto dkg = Scheme::dkg_round(dealings, cfg);
  auto dealer = Scheme::keygen_dealer(cfg, 42);
  EXPECT_TRUE(dkg.public_key == dealer.public_key);
  for (std::size_t i = 0; i < cfg.n; ++i) EXPECT_EQ(dkg.shares[i].scalar, dealer.shares[i].scalar);
}

TYPED_TEST(ThresholdTest, DkgThreeDealers) {
  using Scheme = typename TestFixture::Scheme;
  ThresholdConfig cfg{3, 1, 2};
  std::vector<typename Scheme::DealingT> dealings;
  for (std::uint32_t d = 1; d <= 3; ++d) dealings.push_back(Scheme::make_dealing(d, cfg, 100 + d));
  auto ks = Scheme::dkg_round(dealings, cfg);

  // The aggregate secret is the sum of the dealers' constant terms: check via the group key.
  auto expected_pk = TypeParam::key_identity();
  for (const auto& d : dealings) expected_pk += d.commitments[0];
  EXPECT_TRUE(ks.public_key == expected_pk);

  Bytes msg = to_bytes("dkg");
  auto all = TestFixture::sign_all(ks, msg);
  for_each_subset(3, 2, [&](const std::vector<std::size_t>& idx) {
    std::vector<SignatureShare<TypeParam>> pick{all[idx[0]], all[idx[1]]};
    EXPECT_TRUE(Scheme::verify(ks.public_key, msg, Scheme::combine(pick, cfg)));
  });

  dealings[1].contributions[2] += Scalar::one();
  try {
    Scheme::dkg_round(dealings, cfg);
    FAIL() << "expected FaultyDealerError";
  } catch (const FaultyDealerError& e) {
    EXPECT_EQ(e.dealer(), 2u);
  }
}

TEST(ErasedScheme, BothKindsRoundTrip) {
  for (auto kind : {SchemeKind::Simulated, SchemeKind::Bn254}) {
    auto scheme = make_scheme(kind);
    ThresholdConfig cfg{4, 1, 2};
    auto ks = scheme->keygen(cfg, 1);
    Bytes msg = to_bytes("erased");
    std::vector<std::pair<std::uint32_t, Bytes>> parts;
    for (const auto& s : ks.shares) {
      Bytes sig = scheme->sign_share(s, msg);
      EXPECT_TRUE(scheme->verify_share(s.public_share, msg, sig));
      EXPECT_FALSE(scheme->verify_share(s.public_share, msg, scheme->forged_share(s.index)));
      parts.emplace_back(s.index, sig);
    }
    auto combined = scheme->combine(parts, cfg);
    ASSERT_TRUE(combined.has_value());
    EXPECT_TRUE(scheme->verify(ks.public_key, msg, *combined));
    EXPECT_FALSE(scheme->combine(std::span(parts).subspan(0, 1), cfg).has_value());
  }
}

TEST(ErasedScheme, DkgExcludesCorruptDealer) {
  for (auto kind : {SchemeKind::Simulated, SchemeKind::Bn254}) {
    auto scheme = make_scheme(kind);
    ThresholdConfig cfg{4, 1, 2};
    std::vector<std::uint64_t> seeds{11, 12, 13, 14};
    std::vector<std::uint32_t> excluded;
    auto ks = scheme->keygen_dkg(cfg, seeds, {3}, &excluded);
    EXPECT_EQ(excluded, std::vector<std::uint32_t>{3});
    Bytes msg = to_bytes("dkg");
    std::vector<std::pair<std::uint32_t, Bytes>> parts;
    for (std::uint32_t i : {2u, 4u}) parts.emplace_back(i, scheme->sign_share(ks.shares[i - 1], msg));
    auto combined = scheme->combine(parts, cfg);
    ASSERT_TRUE(combined.has_value());
    EXPECT_TRUE(scheme->verify(ks.public_key, msg, *combined));

    auto honest = scheme->keygen_dkg(cfg, seeds, {}, nullptr);
    EXPECT_NE(honest.public_key, ks.public_key);
  }
}
