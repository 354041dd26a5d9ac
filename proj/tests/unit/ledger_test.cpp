#include <gtest/gtest.h>

#include <random>

#include "xchain/ledger/builtins.hpp"
#include "xchain/ledger/ledger.hpp"

using namespace xchain;
using namespace xchain::ledger;
using wire::CrosschainTransaction;
using wire::SidechainId;
using wire::TxType;

namespace {

const SidechainId kChainA = SidechainId::private_sidechain(1);
const SidechainId kChainB = SidechainId::private_sidechain(2);

Address addr(Byte b) {
  Address a;
  a.data.fill(b);
  return a;
}

/// Interprets its single argument as a list of (op, key, value) byte triples.
HandlerDef program_handler() {
  return {"Program",
          {{"run(bytes)", [](Host& h, const Args& a) {
             const Bytes& prog = a.at(0);
             for (std::size_t i = 0; i + 2 < prog.size(); i += 3) {
               U256 k = prog[i + 1] % 8;
               switch (prog[i] % 3) {
                 case 0: h.sstore(k, prog[i + 2]); break;
                 case 1: h.sstore(k, h.sload(k) + prog[i + 2]); break;
                 case 2: h.transfer(addr(static_cast<Byte>(0xA0 + prog[i + 2] % 4)), prog[i + 2] % 5); break;
               }
             }
             return Bytes{};
           }}}};
}

class LedgerTest : public ::testing::Test {
 protected:
  LedgerTest() : registry_(HandlerRegistry::with_builtins()) {
    registry_.add(program_handler());
  }

  CrosschainTransaction originating(const Address& to, Bytes data, const U256& nonce = 0) const {
    CrosschainTransaction tx;
    tx.type = TxType::Originating;
    tx.tx_id = 77;
    tx.originating_sidechain = kChainA;
    tx.timeout_blocks = 10;
    tx.to = to;
    tx.data = std::move(data);
    tx.nonce = nonce;
    return tx;
  }

  LockHolder holder(std::uint64_t id) const {
    wire::TxRef ref{id, kChainA, SidechainId{1}, Address{}};
    return {ref, wire::coordination_key(ref.tx_id, ref.originating)};
  }

  HandlerRegistry registry_;
  Address deployer_ = addr(0x11);
  Address user_ = addr(0x22);
};

TEST_F(LedgerTest, DeployDefaultsToNonlockable) {
  Ledger l(kChainA, &registry_);
  Address a = l.deploy(deployer_, "Oracle");
  ASSERT_NE(l.contract(a), nullptr);
  EXPECT_FALSE(l.contract(a)->lockable);
  EXPECT_FALSE(l.contract(a)->locked());
}

TEST_F(LedgerTest, DeployAddressesAreDistinctAndDeterministic) {
  Ledger l1(kChainA, &registry_);
  Ledger l2(kChainA, &registry_);
  Address a1 = l1.deploy(deployer_, "Oracle");
  Address b1 = l1.deploy(deployer_, "Oracle");
  EXPECT_NE(a1, b1);
  EXPECT_EQ(l2.deploy(deployer_, "Oracle"), a1);
  EXPECT_EQ(l2.deploy(deployer_, "Oracle"), b1);
}

TEST_F(LedgerTest, DeployUnknownHandlerFails) {
  Ledger l(kChainA, &registry_);
  EXPECT_THROW(l.deploy(deployer_, "NoSuchHandler"), LedgerError);
}

TEST_F(LedgerTest, MatchingCallAdvancesCursor) {
  Ledger l(kChainA, &registry_);
  Address oracle = addr(0x33);
  Address commodity = addr(0x44);
  Storage s{{builtins::control::kOracleChain, kChainB.value},
            {builtins::control::kOracle, address_to_word(oracle)},
            {builtins::control::kCommodityChain, kChainB.value},
            {builtins::control::kCommodity, address_to_word(commodity)}};
  Address control = l.deploy(deployer_, "Control", true, s);

  std::vector<SubordinateCall> expected{
      {true, kChainB, oracle, 0, encode_call("rate()")},
      {false, kChainB, commodity, 0, encode_call("buy(uint256)", {encode_word(5)})}};
  CallFrame frame(expected, {{0, encode_word(50)}});
  auto out = l.execute_local(originating(control, encode_call("condBuy(uint256)", {encode_word(5)})), user_, frame);
  ASSERT_TRUE(out.ok()) << out.detail;
  EXPECT_EQ(frame.cursor(), 2u);
  EXPECT_EQ(out.emitted, expected);
  EXPECT_EQ(out.overlay.storage_delta.at(builtins::control::kLastRate), 50);
}

TEST_F(LedgerTest, OneByteDifferenceAborts) {
  Ledger l(kChainA, &registry_);
  Address oracle = addr(0x33);
  Address commodity = addr(0x44);
  Storage s{{builtins::control::kOracleChain, kChainB.value},
            {builtins::control::kOracle, address_to_word(oracle)},
            {builtins::control::kCommodityChain, kChainB.value},
            {builtins::control::kCommodity, address_to_word(commodity)}};
  Address control = l.deploy(deployer_, "Control", true, s);
  Bytes signed_data = encode_call("buy(uint256)", {encode_word(5)});
  signed_data.back() ^= 1;
  CallFrame frame({{true, kChainB, oracle, 0, encode_call("rate()")}, {false, kChainB, commodity, 0, signed_data}},
                  {{0, encode_word(50)}});
  auto out = l.execute_local(originating(control, encode_call("condBuy(uint256)", {encode_word(5)})), user_, frame);
  EXPECT_EQ(out.reason, AbortReason::Mismatch);
}

TEST_F(LedgerTest, SkippedSignedCallAborts) {
  Ledger l(kChainA, &registry_);
  Address oracle = addr(0x33);
  Address commodity = addr(0x44);
  Storage s{{builtins::control::kOracleChain, kChainB.value},
            {builtins::control::kOracle, address_to_word(oracle)},
            {builtins::control::kCommodityChain, kChainB.value},
            {builtins::control::kCommodity, address_to_word(commodity)}};
  Address control = l.deploy(deployer_, "Control", true, s);
  CallFrame frame({{true, kChainB, oracle, 0, encode_call("rate()")},
                   {false, kChainB, commodity, 0, encode_call("buy(uint256)", {encode_word(5)})}},
                  {{0, encode_word(150)}});
  auto out = l.execute_local(originating(control, encode_call("condBuy(uint256)", {encode_word(5)})), user_, frame);
  EXPECT_EQ(out.reason, AbortReason::Mismatch);
}

TEST_F(LedgerTest, UnsignedCallAborts) {
  Ledger l(kChainA, &registry_);
  Address c1 = l.deploy(deployer_, "Contract1", true);
  CallFrame frame;
  auto out = l.execute_local(originating(c1, encode_call("foo()")), user_, frame);
  EXPECT_EQ(out.reason, AbortReason::Mismatch);
}

TEST_F(LedgerTest, CrosschainTxOnNonlockableFails) {
  Ledger l(kChainA, &registry_);
  Address c = l.deploy(deployer_, "Commodity", false, {{builtins::commodity::kStock, 10}});
  CallFrame frame;
  auto out = l.execute_local(originating(c, encode_call("buy(uint256)", {encode_word(1)})), user_, frame);
  EXPECT_EQ(out.reason, AbortReason::NonlockableTarget);
  EXPECT_THROW(l.lock(c, holder(1), {}), LedgerError);

  auto ord = l.execute_ordinary(user_, 0, c, 0, encode_call("buy(uint256)", {encode_word(1)}));
  ASSERT_TRUE(ord.ok()) << ord.detail;
  EXPECT_EQ(l.contract(c)->storage.at(builtins::commodity::kStock), 9);
}

TEST_F(LedgerTest, NonceEnforced) {
  Ledger l(kChainA, &registry_);
  Address c = l.deploy(deployer_, "Commodity", true, {{builtins::commodity::kStock, 10}});
  CallFrame f1;
  auto tx = originating(c, encode_call("buy(uint256)", {encode_word(1)}), 1);
  EXPECT_EQ(l.execute_local(tx, user_, f1).reason, AbortReason::NonceMismatch);
  tx.nonce = 0;
  CallFrame f2;
  auto out = l.execute_local(tx, user_, f2);
  ASSERT_TRUE(out.ok());
  l.apply_mined(tx, user_, out, holder(1));
  EXPECT_EQ(l.account(user_).nonce, 1);
}

TEST_F(LedgerTest, LockContention) {
  Ledger l(kChainA, &registry_);
  Address c = l.deploy(deployer_, "Commodity", true, {{builtins::commodity::kStock, 10}});
  l.lock(c, holder(1), {});
  EXPECT_TRUE(l.contract(c)->locked());
  EXPECT_THROW(l.lock(c, holder(2), {}), LedgerError);
  CallFrame frame;
  auto out = l.execute_local(originating(c, encode_call("buy(uint256)", {encode_word(1)})), user_, frame);
  EXPECT_EQ(out.reason, AbortReason::LockContention);
  EXPECT_EQ(l.execute_ordinary(user_, 0, c, 0, encode_call("stock()")).reason, AbortReason::LockContention);
}

TEST_F(LedgerTest, FinalizeCommitAndIgnore) {
  Ledger l(kChainA, &registry_);
  Address c = l.deploy(deployer_, "Oracle", true);
  ProvisionalOverlay o;
  o.storage_delta[7] = 7;
  l.lock(c, holder(1), o);
  l.finalize(c, Decision::Commit);
  EXPECT_EQ(l.contract(c)->storage.at(7), 7);
  EXPECT_FALSE(l.contract(c)->locked());

  o.storage_delta[7] = 8;
  l.lock(c, holder(2), o);
  l.finalize(c, Decision::Ignore);
  EXPECT_EQ(l.contract(c)->storage.at(7), 7);
  EXPECT_FALSE(l.contract(c)->locked());

  EXPECT_THROW(l.finalize(c, Decision::Commit), LedgerError);
}

TEST_F(LedgerTest, ReadViewPolicies) {
  Ledger l(kChainA, &registry_);
  Address c = l.deploy(deployer_, "Oracle", true, {{builtins::oracle::kRate, 3}});
  Bytes q = encode_call("rate()");
  for (auto p : {LockedViewPolicy::FailIfLocked, LockedViewPolicy::AssumeIgnored, LockedViewPolicy::AssumeCommitted}) {
    EXPECT_EQ(decode_word(l.read_view(c, q, p)), 3);
  }
  ProvisionalOverlay o;
  o.storage_delta[builtins::oracle::kRate] = 9;
  l.lock(c, holder(1), o);
  EXPECT_EQ(decode_word(l.read_view(c, q, LockedViewPolicy::AssumeIgnored)), 3);
  EXPECT_EQ(decode_word(l.read_view(c, q, LockedViewPolicy::AssumeCommitted)), 9);
  EXPECT_THROW(l.read_view(c, q, LockedViewPolicy::FailIfLocked), LedgerError);
}

TEST_F(LedgerTest, ViewsCannotWrite) {
  Ledger l(kChainA, &registry_);
  Address c = l.deploy(deployer_, "Oracle", true);
  EXPECT_THROW(l.read_view(c, encode_call("setRate(uint256)", {encode_word(1)}), LockedViewPolicy::AssumeIgnored),
               LedgerError);
}

TEST_F(LedgerTest, EscrowRefundedOnIgnoreAndSettledOnCommit) {
  Ledger l(kChainB, &registry_);
  l.fund(user_, 1000);
  Storage s{{builtins::swap_execution::kRate, 2}};
  Address exec = l.deploy(deployer_, "AtomicSwapExecution", true, s);
  U256 before = l.total_value();

  CrosschainTransaction tx = originating(exec, encode_call("settle(uint256)", {encode_word(10)}));
  tx.type = TxType::SubordinateTx;
  tx.timeout_blocks.reset();
  tx.target_sidechain = kChainB;
  tx.value = 20;
  CallFrame f1;
  auto out = l.execute_local(tx, user_, f1);
  ASSERT_TRUE(out.ok()) << out.detail;
  l.apply_mined(tx, user_, out, holder(1));
  EXPECT_EQ(l.account(user_).balance, 980);
  EXPECT_EQ(l.total_value(), before);
  l.finalize(exec, Decision::Ignore);
  EXPECT_EQ(l.account(user_).balance, 1000);
  EXPECT_EQ(l.contract(exec)->balance, 0);

  tx.nonce = 1;
  CallFrame f2;
  out = l.execute_local(tx, user_, f2);
  ASSERT_TRUE(out.ok()) << out.detail;
  l.apply_mined(tx, user_, out, holder(2));
  l.finalize(exec, Decision::Commit);
  EXPECT_EQ(l.account(user_).balance, 980);
  EXPECT_EQ(l.contract(exec)->balance, 20);
  EXPECT_EQ(l.contract(exec)->storage.at(builtins::swap_execution::kSwapped), 20);
  EXPECT_EQ(l.total_value(), before);
}

// Random programs: Ignore restores the exact pre-lock state, Commit matches a direct replay, and
// total value never changes.
TEST_F(LedgerTest, OverlayIsolationProperty) {
  std::mt19937_64 rng(4242);
  for (int trial = 0; trial < 200; ++trial) {
    Ledger l(kChainA, &registry_);
    Storage init;
    for (int k = 0; k < 8; ++k) {
      if (rng() % 2) init[k] = 1 + rng() % 100;
    }
    Address c = l.deploy(deployer_, "Program", true, init, 50);
    Hash256 pre = l.state_digest();
    U256 total = l.total_value();

    Bytes prog(3 * (1 + rng() % 12));
    for (auto& b : prog) b = static_cast<Byte>(rng());
    CrosschainTransaction tx = originating(c, encode_call("run(bytes)", {prog}), l.account(user_).nonce);
    CallFrame frame;
    auto out = l.execute_local(tx, user_, frame);
    if (!out.ok()) {
      EXPECT_EQ(out.reason, AbortReason::Revert);
      EXPECT_EQ(l.state_digest(), pre);
      continue;
    }
    l.apply_mined(tx, user_, out, holder(trial));
    EXPECT_EQ(l.contract(c)->storage, init) << "base storage changed before finalize";
    EXPECT_EQ(l.total_value(), total);

    bool commit = rng() % 2;
    if (!commit) {
      l.finalize(c, Decision::Ignore);
      EXPECT_EQ(l.state_digest() == pre, false) << "nonce consumption must still be visible";
      EXPECT_EQ(l.contract(c)->storage, init);
      EXPECT_EQ(l.contract(c)->balance, 50);
    } else {
      l.finalize(c, Decision::Commit);
      Ledger direct(kChainA, &registry_);
      Address d = direct.deploy(deployer_, "Program", true, init, 50);
      ASSERT_TRUE(direct.execute_ordinary(user_, 0, d, 0, tx.data).ok());
      EXPECT_EQ(l.contract(c)->storage, direct.contract(d)->storage);
      EXPECT_EQ(l.contract(c)->balance, direct.contract(d)->balance);
    }
    EXPECT_EQ(l.total_value(), total);
    EXPECT_FALSE(l.contract(c)->locked());
  }
}

TEST_F(LedgerTest, ForwarderDescribeRoundTrip) {
  Ledger l(kChainA, &registry_);
  std::vector<SubordinateCall> calls{{true, kChainB, addr(0x55), 0, Bytes(70, 0xAB)},
                                     {false, kChainB, addr(0x66), 4, encode_call("sell(uint256)", {encode_word(3)})}};
  Address f = l.deploy(deployer_, "Forwarder", true, builtins::forwarder::describe(calls));
  CallFrame frame(calls, {{0, encode_word(1)}});
  auto out = l.execute_local(originating(f, encode_call("run()")), user_, frame);
  ASSERT_TRUE(out.ok()) << out.detail;
  EXPECT_EQ(out.emitted, calls);
}

TEST(BuiltinSlots, NamedLookup) {
  EXPECT_EQ(builtins::slot_by_name("Control", "oracle"), builtins::control::kOracle);
  EXPECT_FALSE(builtins::slot_by_name("Control", "nope").has_value());
}

}  // namespace
