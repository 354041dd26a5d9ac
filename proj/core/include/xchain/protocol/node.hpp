#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "xchain/protocol/messages.hpp"
#include "xchain/protocol/steps.hpp"
#include "xchain/protocol/world.hpp"

namespace xchain::protocol {

/// A sidechain validator. It keeps a ledger replica and a key share, votes on blocks and threshold
/// messages, and coordinates the transactions submitted to it.
class Node : public sim::Endpoint {
 public:
  Node(World& world, NodeId id, wire::SidechainId chain, std::uint32_t index, ValidatorPolicy policy);

  void on_message(const NodeId& from, const sim::MessagePtr& msg) override;
  void on_timer(std::uint64_t timer_id) override;

  const NodeId& id() const { return id_; }
  const wire::SidechainId& chain() const { return chain_; }
  std::uint32_t index() const { return index_; }
  ledger::Ledger& ledger() { return ledger_; }
  const ledger::Ledger& ledger() const { return ledger_; }
  ValidatorPolicy& policy() { return policy_; }
  const ValidatorPolicy& policy() const { return policy_; }
  /// Multichain Node this validator is the member of, if any.
  const std::string& member_of() const { return member_of_; }
  void set_member_of(std::string multichain) { member_of_ = std::move(multichain); }

  /// Current sidechain block number.
  std::uint64_t head() const;
  /// Applies a block containing `tx`; returns false if the replica could not execute it.
  bool apply_block(const wire::CrosschainTransaction& tx, const std::vector<SignedMessage>& views);
  /// Finalizes locks held by `ref` when the coordination contract reports a terminal status.
  bool resolve(const wire::TxRef& ref, std::string_view trigger);
  bool has_mined(const Hash256& tx_hash) const { return mined_.count(tx_hash) != 0; }

 private:
  using SignDone = std::function<void(std::optional<Bytes> signature, std::string reason)>;
  using Done = std::function<void(bool ok, std::string reason)>;
  using ViewsDone = std::function<void(bool ok, std::vector<SignedMessage> views, std::string reason)>;

  struct SignRound {
    wire::ThresholdMessage msg;
    Bytes bytes;
    std::vector<std::pair<std::uint32_t, Bytes>> shares;
    std::set<std::uint32_t> responded;
    std::set<std::uint32_t> bad;
    std::size_t refusals = 0;
    std::string first_refusal;
    std::uint64_t timer = 0;
    SignDone done;
  };
  struct MineRound {
    TxPtr tx;
    std::vector<SignedMessage> views;
    std::set<NodeId> voted;
    std::size_t accepts = 0;
    std::size_t rejects = 0;
    std::string first_reject;
    std::uint64_t timer = 0;
    Done done;
  };
  struct Pending {
    std::uint64_t timer = 0;
    std::function<void(const sim::Message*)> on_reply;
  };
  struct OriginCtx {
    TxPtr tx;
    NodeId app;
    Hash256 key;
    bool started = false;
    bool finished = false;
    bool failing = false;
    std::vector<const wire::CrosschainTransaction*> direct_subtxs;
    std::size_t next_subtx = 0;
    std::map<Hash256, const wire::CrosschainTransaction*> expected_ready;
    std::map<Hash256, SignedMessage> readies;
    std::uint64_t ready_timer = 0;
  };
  struct Watch {
    wire::TxRef ref;
    std::uint64_t timer = 0;
  };

  // Plumbing.
  void send(const NodeId& to, sim::MessagePtr msg);
  Tick latency_to(const NodeId& to) const;
  std::uint64_t after(Tick delay, std::function<void()> fn);
  void cancel(std::uint64_t& timer);
  bool step(steps::Role role, std::string_view name, const Hash256& digest);
  void note(std::string_view kind, std::string_view reason, const Hash256& digest);
  const SidechainInfo& info() const;
  const crypto::threshold::EncodedShare& share() const;
  std::vector<NodeId> peers() const;

  // Local checks.
  std::optional<std::string> check_signature(const wire::CrosschainTransaction& tx) const;
  std::optional<std::string> check_permission(const wire::CrosschainTransaction& tx) const;
  std::optional<std::string> check_trust(const wire::TxRef& ref) const;
  std::optional<std::string> check_public_keys(const wire::CrosschainTransaction& tx) const;
  std::optional<std::string> check_coverage(const wire::CrosschainTransaction& tx) const;
  std::optional<std::string> check_active(const wire::TxRef& ref) const;
  std::optional<std::string> check_lock_horizon(const wire::TxRef& ref) const;
  std::optional<std::string> check_views(const wire::CrosschainTransaction& tx,
                                         const std::vector<SignedMessage>& views) const;
  bool verify_by(const wire::TxRef& ref, const wire::SidechainId& signer, const SignedMessage& m) const;
  const CoordinationNode* coordination_for(const wire::TxRef& ref) const;
  /// Runs the transaction on this replica after finalizing any stale lock on its target.
  ledger::ExecutionOutcome execute(const wire::CrosschainTransaction& tx, const std::vector<SignedMessage>& views);
  std::optional<std::string> validate_sign(const SignRequest& req);
  std::optional<std::string> validate_mine(const MineRequest& req);

  // Validator handlers.
  void on_sign_request(const NodeId& from, const SignRequest& req);
  void on_mine_request(const NodeId& from, const MineRequest& req);
  void on_check(const CheckCoordination& check);

  // Coordinator primitives.
  void threshold_sign(wire::ThresholdMessage msg, TxPtr tx, std::vector<SignedMessage> evidence, SignDone done);
  void on_sign_reply(std::uint64_t request, const sim::Message& reply);
  void finish_sign(std::uint64_t request, std::optional<Bytes> signature, std::string reason);
  void mine(TxPtr tx, std::vector<SignedMessage> views, Done done);
  void on_mine_vote(const NodeId& from, const MineVote& vote);
  void finish_mine(std::uint64_t request, bool ok, std::string reason);
  void submit(const SignedMessage& m, Done done);
  void gather_views(TxPtr tx, ViewsDone done);
  std::uint64_t expect_reply(Tick deadline, std::function<void(const sim::Message*)> on_reply);
  void deliver_reply(std::uint64_t request, const sim::Message& reply);
  void broadcast_check(const wire::CrosschainTransaction& root);

  // Originating coordinator.
  void on_submit(const NodeId& from, const TxPtr& tx);
  void origin_after_start(const std::shared_ptr<OriginCtx>& ctx);
  void origin_dispatch_next(const std::shared_ptr<OriginCtx>& ctx);
  void origin_on_ready(const SignedMessage& ready);
  void origin_on_subtx_error(const SubTxError& err);
  void origin_commit(const std::shared_ptr<OriginCtx>& ctx);
  void origin_fail(const std::shared_ptr<OriginCtx>& ctx, const std::string& reason);
  void origin_report(const std::shared_ptr<OriginCtx>& ctx, const std::string& reason);
  void arm_ready_timer(const std::shared_ptr<OriginCtx>& ctx);

  // Subordinate coordinators.
  void on_subtx_request(const SubTxRequest& req);
  void on_view_request(const NodeId& from, const ViewRequest& req);

  // Locks.
  void arm_watch(const wire::TxRef& ref);
  void resolve_stale(const Address& contract);

  World& world_;
  NodeId id_;
  wire::SidechainId chain_;
  std::uint32_t index_;
  ValidatorPolicy policy_;
  ledger::Ledger ledger_;
  std::string member_of_;

  std::uint64_t next_request_ = 1;
  std::map<std::uint64_t, std::function<void()>> timers_;
  std::map<std::uint64_t, SignRound> sign_rounds_;
  std::map<std::uint64_t, MineRound> mine_rounds_;
  std::map<std::uint64_t, Pending> pending_;
  std::map<Hash256, std::shared_ptr<OriginCtx>> origins_;
  std::set<Hash256> mined_;
  std::map<Hash256, Watch> watches_;
  std::string last_block_failure_ = "execution:block-rejected";
};

}  // namespace xchain::protocol
