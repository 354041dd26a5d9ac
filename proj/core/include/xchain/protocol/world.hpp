#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "xchain/coord/coordination.hpp"
#include "xchain/crypto/secp256k1.hpp"
#include "xchain/crypto/threshold.hpp"
#include "xchain/ledger/ledger.hpp"
#include "xchain/protocol/messages.hpp"
#include "xchain/sim/simnet.hpp"

namespace xchain::protocol {

using sim::NodeId;
using sim::Tick;
using wire::CrosschainTxId;

/// Latencies and local time-outs in ticks.
struct Timing {
  /// Coordinator <-> validators of the same sidechain.
  Tick sidechain_latency = 1;
  /// Between sidechains, and to and from coordination chains.
  Tick crosschain_latency = 3;
  Tick sign_deadline = 20;
  Tick mine_deadline = 20;
  Tick receipt_deadline = 30;
  Tick view_deadline = 80;
  /// Wait for the next SubordinateTxReady.
  Tick ready_deadline = 120;
  /// Added to lock-release timers after the timeout block has passed.
  Tick timer_lag = 2;
};

using CoordRef = std::pair<wire::SidechainId, Address>;

struct ValidatorPolicy {
  /// nullopt admits every account.
  std::optional<std::set<Address>> tx_allowed;
  std::optional<std::set<Address>> view_allowed;
  /// nullopt trusts every coordination contract in the world.
  std::optional<std::set<CoordRef>> trusted;
  /// Longest lock, in coordination blocks, this validator accepts.
  std::uint64_t max_lock_horizon = 1000;
  /// Offset of this node's local timers, in ticks.
  std::int64_t clock_skew = 0;
  /// How many sidechain blocks a view result may trail the local head.
  std::uint64_t freshness_window = 8;
  /// Scenario-injected spam predicate: true refuses to sign Start for the transaction.
  std::function<bool(const wire::CrosschainTransaction&)> refuse_start;
  /// Misbehaving validator that reports a different result for every view it recomputes.
  bool dissent_views = false;
};

struct KeygenSpec {
  std::uint64_t seed = 1;
  /// Run a DKG with one dealer per validator instead of a trusted dealer.
  bool dkg = false;
  std::set<std::uint32_t> corrupt_dealers;
};

struct SidechainSpec {
  std::string name;
  wire::SidechainId id;
  std::uint32_t n = 4;
  std::uint32_t f = 1;
  /// Defaults to f + 1.
  std::optional<std::uint32_t> m;
  /// Ticks per sidechain block; view result freshness is measured in these blocks.
  Tick block_interval = 10;
  ValidatorPolicy policy;
  std::map<std::uint32_t, ValidatorPolicy> overrides;
  KeygenSpec keygen;
};

struct SidechainInfo {
  SidechainSpec spec;
  crypto::threshold::ThresholdConfig config;
  crypto::threshold::EncodedKeySet keys;
  std::vector<NodeId> nodes;
  std::vector<std::uint32_t> excluded_dealers;
};

struct Multichain {
  std::string name;
  std::map<wire::SidechainId, NodeId> members;
  NodeId app;
};

struct EntryCall {
  wire::SidechainId sidechain;
  Address to;
  Bytes data;
  U256 value;
};

class BuildError : public std::runtime_error {
 public:
  BuildError(std::string code, const std::string& what) : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

/// A transaction an application submits, possibly several rounds with a fresh id each time.
struct SubmitIntent {
  std::string name;
  std::string multichain;
  crypto::secp256k1::AccountKey account;
  EntryCall entry;
  std::uint64_t timeout_blocks = 20;
  CoordRef coordination;
  /// First round's id; later rounds and unset ids draw fresh ids from the world.
  std::optional<CrosschainTxId> tx_id;
  std::uint32_t max_rounds = 1;
  Tick retry_backoff = 0;
  Tick retry_jitter = 0;
  /// Applied to the built tree before signing (tests that exercise mismatching trees).
  std::function<void(wire::CrosschainTransaction&)> edit_tree;
  /// Applied to the world after building and before submission (state changes between the two).
  std::function<void()> before_submit;
};

struct OutcomeRecord {
  std::string intent;
  std::uint32_t round = 0;
  wire::TxRef ref;
  bool committed = false;
  std::string reason;
  Tick tick = 0;
};

struct FinalizeRecord {
  Tick tick = 0;
  NodeId node;
  wire::SidechainId chain;
  Address contract;
  Hash256 key;
  ledger::Decision decision = ledger::Decision::Ignore;
  coord::EffectiveStatus status = coord::EffectiveStatus::Started;
};

struct LockRecord {
  Tick tick = 0;
  NodeId node;
  wire::SidechainId chain;
  Address contract;
  Hash256 key;
};

class World;
class Node;

/// Endpoint wrapping a coordination chain.
class CoordinationNode : public sim::Endpoint {
 public:
  CoordinationNode(World& world, NodeId id, coord::CoordinationConfig config, Tick block_interval,
                   std::shared_ptr<const crypto::threshold::SignatureScheme> scheme);

  void on_message(const NodeId& from, const sim::MessagePtr& msg) override;
  void on_timer(std::uint64_t) override {}

  const NodeId& id() const { return id_; }
  coord::CoordinationChain& chain() { return chain_; }
  const coord::CoordinationChain& chain() const { return chain_; }
  Tick block_interval() const { return interval_; }
  /// Tick at which block number `block` begins.
  Tick block_start(std::uint64_t block) const { return block * interval_; }

  /// Signed messages this contract accepted, in order (for replay scenarios).
  const std::vector<SignedMessage>& accepted() const { return accepted_; }
  /// Applies a submission directly; returns the rejection code or nullopt.
  std::optional<std::string> apply(const SignedMessage& m);

 private:
  World& world_;
  NodeId id_;
  coord::CoordinationChain chain_;
  Tick interval_;
  std::vector<SignedMessage> accepted_;
};

/// Application endpoint of a Multichain Node; receives outcomes and resubmits on failure.
class AppNode : public sim::Endpoint {
 public:
  AppNode(World& world, NodeId id) : world_(world), id_(std::move(id)) {}
  void on_message(const NodeId& from, const sim::MessagePtr& msg) override;
  void on_timer(std::uint64_t) override {}
  const NodeId& id() const { return id_; }

 private:
  World& world_;
  NodeId id_;
};

struct WorldConfig {
  sim::SimConfig sim;
  crypto::threshold::SchemeKind scheme = crypto::threshold::SchemeKind::Bn254;
  Timing timing;
  ledger::LockedViewPolicy view_policy = ledger::LockedViewPolicy::FailIfLocked;
};

/// Every node, chain and application of one simulation run.
class World {
 public:
  explicit World(WorldConfig config);
  ~World();
  World(const World&) = delete;
  World& operator=(const World&) = delete;

  sim::Simulator& sim() { return sim_; }
  const sim::Simulator& sim() const { return sim_; }
  const Timing& timing() const { return config_.timing; }
  const WorldConfig& config() const { return config_; }
  ledger::HandlerRegistry& registry() { return registry_; }
  const crypto::threshold::SignatureScheme& scheme() const { return *scheme_; }

  // Setup.
  CoordinationNode& add_coordination_chain(const std::string& name, const coord::CoordinationConfig& config,
                                           Tick block_interval);
  void add_sidechain(SidechainSpec spec);
  /// members: sidechain -> validator index hosting this Multichain Node's member.
  void add_multichain(const std::string& name, const std::map<wire::SidechainId, std::uint32_t>& members);
  /// Generates each sidechain's key and registers it with every coordination chain.
  void bootstrap_keys();
  /// Schedules block production; call once setup is complete.
  void start();

  Address deploy(const wire::SidechainId& chain, const Address& deployer, const std::string& handler, bool lockable,
                 const ledger::Storage& storage, const U256& balance);
  void fund(const wire::SidechainId& chain, const Address& account, const U256& amount);
  /// Ordinary same-chain transaction applied on every replica.
  ledger::ExecutionOutcome ordinary_tx(const wire::SidechainId& chain, const Address& signer, const Address& to,
                                       const U256& value, const Bytes& data);
  void poke_storage(const wire::SidechainId& chain, const Address& contract, const U256& key, const U256& value);

  // Applications.
  /// Dry-runs the call graph on the Multichain Node's replicas and returns the unsigned tree.
  wire::CrosschainTransaction build_crosschain_tx(const std::string& multichain, const EntryCall& entry,
                                                  const Address& signer, std::uint64_t timeout_blocks,
                                                  const CoordRef& coordination, const CrosschainTxId& tx_id) const;
  /// Synchronous read-only call; crosschain views are evaluated on the member replicas. Throws BuildError.
  Bytes crosschain_view(const std::string& multichain, const EntryCall& entry, const Address& signer,
                        std::optional<ledger::LockedViewPolicy> policy = std::nullopt) const;
  void schedule_submit(SubmitIntent intent, Tick at);
  /// Sends an already signed tree to the Multichain Node's originating member at `at`.
  void schedule_raw_submit(const std::string& multichain, wire::CrosschainTransaction signed_tx, Tick at,
                           const std::string& intent_name);
  CrosschainTxId fresh_tx_id();

  // Lookup.
  Node& node(const NodeId& id);
  const Node& node(const NodeId& id) const;
  std::vector<Node*> nodes_of(const wire::SidechainId& chain);
  std::vector<const Node*> all_nodes() const;
  const SidechainInfo* sidechain(const wire::SidechainId& id) const;
  const SidechainInfo* sidechain(const std::string& name) const;
  const std::map<wire::SidechainId, SidechainInfo>& sidechains() const { return sidechains_; }
  CoordinationNode* coordination(const wire::SidechainId& chain);
  const CoordinationNode* coordination(const wire::SidechainId& chain) const;
  CoordinationNode* coordination(const std::string& name);
  const std::map<std::string, std::unique_ptr<CoordinationNode>>& coordination_nodes() const { return coords_; }
  const Multichain* multichain(const std::string& name) const;
  const Multichain* multichain_of(const NodeId& member) const;
  std::set<CoordRef> all_coordination_refs() const;

  // Used by nodes.
  NodeId coordinator_for(const NodeId& member, const wire::SidechainId& chain) const;
  std::optional<std::string> apply_block(const wire::SidechainId& chain, const wire::CrosschainTransaction& tx,
                                         const std::vector<SignedMessage>& views);
  /// Memoised threshold verification (the same evidence is checked by many validators).
  bool verify(ByteView public_key, ByteView message, ByteView signature) const;
  /// Memoised account signer of one tree node; nullopt for an invalid signature.
  std::optional<Address> signer_of(const wire::CrosschainTransaction& tx) const;

  void on_outcome(const NodeId& app, const TxOutcome& outcome);
  void record_finalize(FinalizeRecord r) { finalizations_.push_back(std::move(r)); }
  void record_lock(LockRecord r) { locks_.push_back(std::move(r)); }

  // Results.
  const std::vector<OutcomeRecord>& outcomes() const { return outcomes_; }
  const std::vector<FinalizeRecord>& finalizations() const { return finalizations_; }
  const std::vector<LockRecord>& locks() const { return locks_; }
  const SubmitIntent* intent(const std::string& name) const;
  /// Refs submitted for an intent, one per round.
  std::vector<wire::TxRef> submitted(const std::string& intent) const;

 private:
  struct IntentState {
    SubmitIntent intent;
    std::uint32_t rounds = 0;
    std::vector<wire::TxRef> refs;
  };
  void submit_round(const std::string& intent);

  WorldConfig config_;
  sim::Simulator sim_;
  ledger::HandlerRegistry registry_;
  std::shared_ptr<const crypto::threshold::SignatureScheme> scheme_;
  std::map<std::string, std::unique_ptr<CoordinationNode>> coords_;
  std::map<wire::SidechainId, SidechainInfo> sidechains_;
  std::map<NodeId, std::unique_ptr<Node>> nodes_;
  std::map<std::string, Multichain> multichains_;
  std::map<NodeId, std::unique_ptr<AppNode>> apps_;
  std::map<std::string, IntentState> intents_;
  std::map<Hash256, std::pair<std::string, std::uint32_t>> ref_to_intent_;
  std::vector<OutcomeRecord> outcomes_;
  std::vector<FinalizeRecord> finalizations_;
  std::vector<LockRecord> locks_;
  U256 next_tx_id_ = 1;
  bool started_ = false;

  mutable std::map<Bytes, bool> verify_cache_;
  mutable std::map<Hash256, std::optional<Address>> signer_cache_;
};

}  // namespace xchain::protocol
