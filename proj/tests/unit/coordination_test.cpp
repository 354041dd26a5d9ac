#include <gtest/gtest.h>

#include <functional>
#include <random>

#include "xchain/coord/coordination.hpp"

using namespace xchain;
using namespace xchain::coord;
using namespace xchain::crypto::threshold;
using wire::MessageKind;
using wire::SidechainId;
using wire::ThresholdMessage;

namespace {

class CoordinationTest : public ::testing::Test {
 protected:
  CoordinationTest()
      : scheme_(make_scheme(SchemeKind::Simulated)),
        chain_({SidechainId::private_sidechain(100), Address{}, 50, 16}, scheme_) {
    keys_a_ = scheme_->keygen(config_, 1);
    keys_b_ = scheme_->keygen(config_, 2);
    chain_.register_pubkey(chain_a_, keys_a_.public_key, std::nullopt);
    chain_.register_pubkey(chain_b_, keys_b_.public_key, std::nullopt);
  }

  Bytes sign(const EncodedKeySet& ks, ByteView message) const {
    std::vector<std::pair<std::uint32_t, Bytes>> parts;
    for (std::size_t i = 0; i < config_.m; ++i) {
      parts.emplace_back(ks.shares[i].index, scheme_->sign_share(ks.shares[i], message));
    }
    return *scheme_->combine(parts, config_);
  }
  Bytes sign(const EncodedKeySet& ks, const ThresholdMessage& m) const { return sign(ks, wire::encode_message(m)); }

  wire::TxRef ref(std::uint64_t id = 77) const { return {id, chain_a_, chain_.config().chain_id, Address{}}; }
  Hash256 key(std::uint64_t id = 77) const { return wire::coordination_key(id, chain_a_); }

  void start(std::uint64_t timeout, std::uint64_t id = 77) {
    auto m = ThresholdMessage::start(ref(id), timeout);
    chain_.start(m, sign(keys_a_, m));
  }

  CoordinationError::Code error_of(const std::function<void()>& fn) {
    try {
      fn();
    } catch (const CoordinationError& e) {
      return e.code();
    }
    ADD_FAILURE() << "expected CoordinationError";
    return CoordinationError::Code::UnknownEntry;
  }

  ThresholdConfig config_ = ThresholdConfig::from_fault_tolerance(4, 1);
  std::shared_ptr<const SignatureScheme> scheme_;
  CoordinationChain chain_;
  SidechainId chain_a_ = SidechainId::private_sidechain(1);
  SidechainId chain_b_ = SidechainId::private_sidechain(2);
  EncodedKeySet keys_a_, keys_b_;
};

}  // namespace

TEST_F(CoordinationTest, BootstrapAndLookup) {
  EXPECT_EQ(chain_.current_key(chain_a_), keys_a_.public_key);
  EXPECT_EQ(error_of([&] { chain_.register_pubkey(chain_a_, keys_b_.public_key, std::nullopt); }),
            CoordinationError::Code::AlreadyRegistered);
}

TEST_F(CoordinationTest, RotationGraceWindow) {
  auto next = scheme_->keygen(config_, 3);
  Bytes auth = sign(keys_a_, CoordinationChain::key_update_message(chain_a_, next.public_key));
  chain_.advance_block(4);
  chain_.register_pubkey(chain_a_, next.public_key, auth);
  EXPECT_EQ(chain_.current_key(chain_a_), next.public_key);

  Bytes msg = to_bytes("old-key message");
  Bytes old_sig = sign(keys_a_, msg);
  chain_.advance_block(16);
  EXPECT_TRUE(chain_.verify_signed_by(chain_a_, msg, old_sig));
  chain_.advance_block(1);
  EXPECT_FALSE(chain_.verify_signed_by(chain_a_, msg, old_sig));
  EXPECT_TRUE(chain_.verify_signed_by(chain_a_, msg, sign(next, msg)));
}

TEST_F(CoordinationTest, RotationNeedsAuthorization) {
  auto next = scheme_->keygen(config_, 3);
  Bytes forged = sign(keys_b_, CoordinationChain::key_update_message(chain_a_, next.public_key));
  EXPECT_EQ(error_of([&] { chain_.register_pubkey(chain_a_, next.public_key, forged); }),
            CoordinationError::Code::BadAuthorization);
  EXPECT_EQ(error_of([&] { chain_.register_pubkey(SidechainId::private_sidechain(9), next.public_key, forged); }),
            CoordinationError::Code::UnknownSidechain);
}

TEST_F(CoordinationTest, StartArithmeticAndReplay) {
  chain_.advance_block(5);
  start(10);
  EXPECT_EQ(chain_.find(key())->timeout_block, 15u);
  EXPECT_EQ(error_of([&] { start(10); }), CoordinationError::Code::Replay);
  EXPECT_EQ(error_of([&] { start(51, 78); }), CoordinationError::Code::TimeoutTooLarge);
  start(50, 79);
}

TEST_F(CoordinationTest, StartRejectsForeignSignature) {
  auto m = ThresholdMessage::start(ref(), 5);
  EXPECT_EQ(error_of([&] { chain_.start(m, sign(keys_b_, m)); }), CoordinationError::Code::BadSignature);
  auto other = m;
  other.coordination_chain = SidechainId::private_sidechain(5);
  EXPECT_EQ(error_of([&] { chain_.start(other, sign(keys_a_, other)); }), CoordinationError::Code::WrongContract);
}

TEST_F(CoordinationTest, CommitBoundaryInclusive) {
  start(10);
  chain_.advance_block(10);
  auto c = ThresholdMessage::commit(ref());
  chain_.commit(c, sign(keys_a_, c));
  EXPECT_EQ(chain_.find(key())->state, EntryState::Committed);
}

TEST_F(CoordinationTest, CommitAfterTimeoutRejected) {
  start(10);
  chain_.advance_block(11);
  auto c = ThresholdMessage::commit(ref());
  EXPECT_EQ(error_of([&] { chain_.commit(c, sign(keys_a_, c)); }), CoordinationError::Code::TimedOut);
  EXPECT_EQ(chain_.effective_status(key()), EffectiveStatus::TimedOut);
}

TEST_F(CoordinationTest, TerminalStatesAreFinal) {
  start(10);
  auto i = ThresholdMessage::ignore(ref());
  chain_.ignore(i, sign(keys_a_, i));
  auto c = ThresholdMessage::commit(ref());
  EXPECT_EQ(error_of([&] { chain_.commit(c, sign(keys_a_, c)); }), CoordinationError::Code::AlreadyTerminal);
  EXPECT_EQ(chain_.find(key())->state, EntryState::Ignored);

  start(10, 90);
  auto c2 = ThresholdMessage::commit(ref(90));
  chain_.commit(c2, sign(keys_a_, c2));
  auto i2 = ThresholdMessage::ignore(ref(90));
  EXPECT_EQ(error_of([&] { chain_.ignore(i2, sign(keys_a_, i2)); }), CoordinationError::Code::AlreadyTerminal);
  chain_.advance_block(1000);
  EXPECT_EQ(chain_.effective_status(key(90)), EffectiveStatus::Committed);
}

TEST_F(CoordinationTest, IgnoreWithWrongKeyRejected) {
  start(10);
  auto i = ThresholdMessage::ignore(ref());
  EXPECT_EQ(error_of([&] { chain_.ignore(i, sign(keys_b_, i)); }), CoordinationError::Code::BadSignature);
  EXPECT_EQ(error_of([&] { chain_.ignore(ThresholdMessage::ignore(ref(5)), Bytes(32, 0)); }),
            CoordinationError::Code::UnknownEntry);
}

TEST_F(CoordinationTest, EffectiveStatusSweep) {
  start(10);
  for (std::uint64_t b = 0; b <= 20; ++b) {
    auto expected = b <= 10 ? EffectiveStatus::Started : EffectiveStatus::TimedOut;
    EXPECT_EQ(chain_.effective_status(key(), b), expected) << b;
  }
  std::uint64_t before = chain_.block_number();
  chain_.advance_block(0);
  EXPECT_EQ(chain_.block_number(), before);
  chain_.advance_block(1);
  chain_.advance_block(2);
  EXPECT_EQ(chain_.block_number(), before + 3);
  EXPECT_EQ(error_of([&] { chain_.effective_status(key(1)); }), CoordinationError::Code::UnknownEntry);
}

TEST_F(CoordinationTest, AtMostOneTerminalUnderRandomInterleavings) {
  std::mt19937_64 rng(5);
  for (std::uint64_t id = 1000; id < 1100; ++id) {
    start(3, id);
    int terminal = 0;
    for (int step = 0; step < 6; ++step) {
      auto m = (rng() % 2) ? ThresholdMessage::commit(ref(id)) : ThresholdMessage::ignore(ref(id));
      try {
        if (m.kind == MessageKind::Commit) {
          chain_.commit(m, sign(keys_a_, m));
        } else {
          chain_.ignore(m, sign(keys_a_, m));
        }
        ++terminal;
      } catch (const CoordinationError&) {
      }
      if (rng() % 3 == 0) chain_.advance_block(1);
    }
    EXPECT_LE(terminal, 1);
  }
}
