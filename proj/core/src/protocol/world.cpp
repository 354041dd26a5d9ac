#include "xchain/protocol/world.hpp"

#include <algorithm>
#include <stdexcept>

#include "xchain/protocol/node.hpp"
#include "xchain/protocol/steps.hpp"

namespace xchain::protocol {

using wire::CrosschainTransaction;
using wire::TxType;

// ---------------------------------------------------------------------------------------------
// CoordinationNode

CoordinationNode::CoordinationNode(World& world, NodeId id, coord::CoordinationConfig config, Tick block_interval,
                                   std::shared_ptr<const crypto::threshold::SignatureScheme> scheme)
    : world_(world), id_(std::move(id)), chain_(config, std::move(scheme)), interval_(std::max<Tick>(1, block_interval)) {}

std::optional<std::string> CoordinationNode::apply(const SignedMessage& m) {
  try {
    switch (m.msg.kind) {
      case wire::MessageKind::Start: chain_.start(m.msg, m.signature); break;
      case wire::MessageKind::Commit: chain_.commit(m.msg, m.signature); break;
      case wire::MessageKind::Ignore: chain_.ignore(m.msg, m.signature); break;
      default:
        world_.sim().record(id_, "reject", "wrong-kind");
        return std::string("wrong-kind");
    }
  } catch (const coord::CoordinationError& e) {
    std::string code = coord::to_string(e.code());
    world_.sim().record(id_, "reject", code,
                        sim::short_digest(wire::coordination_key(m.msg.tx_id, m.msg.originating_sidechain)));
    return code;
  }
  world_.sim().record(id_, "accept", wire::to_string(m.msg.kind),
                      sim::short_digest(wire::coordination_key(m.msg.tx_id, m.msg.originating_sidechain)));
  accepted_.push_back(m);
  return std::nullopt;
}

void CoordinationNode::on_message(const NodeId& from, const sim::MessagePtr& msg) {
  const auto* submit = dynamic_cast<const CoordinationSubmit*>(msg.get());
  if (submit == nullptr) return;
  auto receipt = std::make_shared<CoordinationReceipt>();
  receipt->request = submit->request;
  auto err = apply(submit->signed_msg);
  receipt->accepted = !err;
  if (err) receipt->error = *err;
  world_.sim().send(id_, from, receipt, world_.timing().crosschain_latency);
}

// ---------------------------------------------------------------------------------------------
// AppNode

void AppNode::on_message(const NodeId& /*from*/, const sim::MessagePtr& msg) {
  if (const auto* out = dynamic_cast<const TxOutcome*>(msg.get())) world_.on_outcome(id_, *out);
}

// ---------------------------------------------------------------------------------------------
// World: setup

World::World(WorldConfig config)
    : config_(config),
      sim_(config.sim),
      registry_(ledger::HandlerRegistry::with_builtins()),
      scheme_(crypto::threshold::make_scheme(config.scheme)) {
  sim_.set_known_steps(steps::all());
}

World::~World() = default;

CoordinationNode& World::add_coordination_chain(const std::string& name, const coord::CoordinationConfig& config,
                                                Tick block_interval) {
  NodeId id = "coord/" + name;
  auto node = std::make_unique<CoordinationNode>(*this, id, config, block_interval, scheme_);
  CoordinationNode& ref = *node;
  if (!coords_.emplace(name, std::move(node)).second) throw std::invalid_argument("duplicate coordination chain " + name);
  sim_.add_node(id, &ref, "coord");
  return ref;
}

void World::add_sidechain(SidechainSpec spec) {
  if (sidechains_.count(spec.id)) throw std::invalid_argument("duplicate sidechain " + spec.name);
  if (sidechain(spec.name) != nullptr) throw std::invalid_argument("duplicate sidechain name " + spec.name);
  SidechainInfo info;
  info.config = spec.m ? crypto::threshold::ThresholdConfig{spec.n, spec.f, *spec.m}
                       : crypto::threshold::ThresholdConfig::from_fault_tolerance(spec.n, spec.f);
  info.config.validate();
  for (std::uint32_t i = 1; i <= spec.n; ++i) info.nodes.push_back(spec.name + "/v" + std::to_string(i));
  info.spec = std::move(spec);
  const SidechainSpec& s = info.spec;
  for (std::uint32_t i = 1; i <= s.n; ++i) {
    auto ov = s.overrides.find(i);
    ValidatorPolicy policy = ov == s.overrides.end() ? s.policy : ov->second;
    NodeId id = info.nodes[i - 1];
    auto node = std::make_unique<Node>(*this, id, s.id, i, std::move(policy));
    sim_.add_node(id, node.get(), s.name);
    nodes_.emplace(id, std::move(node));
  }
  sidechains_.emplace(s.id, std::move(info));
}

void World::add_multichain(const std::string& name, const std::map<wire::SidechainId, std::uint32_t>& members) {
  if (multichains_.count(name)) throw std::invalid_argument("duplicate multichain node " + name);
  Multichain mc;
  mc.name = name;
  mc.app = "app/" + name;
  for (const auto& [chain, index] : members) {
    const SidechainInfo* info = sidechain(chain);
    if (info == nullptr) throw std::invalid_argument("multichain " + name + ": unknown sidechain " + chain.hex());
    if (index == 0 || index > info->nodes.size()) {
      throw std::invalid_argument("multichain " + name + ": no validator " + std::to_string(index) + " on " +
                                  info->spec.name);
    }
    NodeId member = info->nodes[index - 1];
    if (multichain_of(member) != nullptr) {
      throw std::invalid_argument("validator " + member + " already belongs to a multichain node");
    }
    mc.members[chain] = member;
    nodes_.at(member)->set_member_of(name);
  }
  auto app = std::make_unique<AppNode>(*this, mc.app);
  sim_.add_node(mc.app, app.get(), mc.app);
  apps_.emplace(mc.app, std::move(app));
  multichains_.emplace(name, std::move(mc));
}

void World::bootstrap_keys() {
  for (auto& [id, info] : sidechains_) {
    const KeygenSpec& kg = info.spec.keygen;
    if (kg.dkg) {
      std::vector<std::uint64_t> seeds;
      for (std::uint32_t i = 0; i < info.config.n; ++i) seeds.push_back(kg.seed * 1000 + i + 1);
      info.excluded_dealers.clear();
      info.keys = scheme_->keygen_dkg(info.config, seeds, kg.corrupt_dealers, &info.excluded_dealers);
    } else {
      info.keys = scheme_->keygen(info.config, kg.seed);
    }
    for (auto& [name, c] : coords_) c->chain().register_pubkey(id, info.keys.public_key, std::nullopt);
  }
}

void World::start() {
  if (started_) return;
  started_ = true;
  for (auto& [name, c] : coords_) {
    CoordinationNode* node = c.get();
    auto tick = std::make_shared<std::function<void()>>();
    *tick = [this, node, tick]() {
      node->chain().advance_block();
      sim_.schedule(sim_.now() + node->block_interval(), *tick, true);
    };
    sim_.schedule(node->block_interval(), *tick, true);
  }
}

Address World::deploy(const wire::SidechainId& chain, const Address& deployer, const std::string& handler,
                      bool lockable, const ledger::Storage& storage, const U256& balance) {
  std::optional<Address> addr;
  for (Node* n : nodes_of(chain)) {
    Address a = n->ledger().deploy(deployer, handler, lockable, storage, balance);
    if (addr && !(*addr == a)) throw std::logic_error("replicas disagree on deployment address");
    addr = a;
  }
  if (!addr) throw std::invalid_argument("deploy: unknown sidechain " + chain.hex());
  return *addr;
}

void World::fund(const wire::SidechainId& chain, const Address& account, const U256& amount) {
  auto nodes = nodes_of(chain);
  if (nodes.empty()) throw std::invalid_argument("fund: unknown sidechain " + chain.hex());
  for (Node* n : nodes) n->ledger().fund(account, amount);
}

ledger::ExecutionOutcome World::ordinary_tx(const wire::SidechainId& chain, const Address& signer, const Address& to,
                                            const U256& value, const Bytes& data) {
  std::optional<ledger::ExecutionOutcome> first;
  for (Node* n : nodes_of(chain)) {
    if (!sim_.alive(n->id())) continue;
    auto out = n->ledger().execute_ordinary(signer, n->ledger().account(signer).nonce, to, value, data);
    if (!first) first = out;
  }
  if (!first) throw std::invalid_argument("ordinary_tx: no live replica on " + chain.hex());
  sim_.record("world", "ordinary-tx", first->ok() ? "ok" : ledger::to_string(first->reason));
  return *first;
}

void World::poke_storage(const wire::SidechainId& chain, const Address& contract, const U256& key, const U256& value) {
  for (Node* n : nodes_of(chain)) n->ledger().poke_storage(contract, key, value);
}

// ---------------------------------------------------------------------------------------------
// World: building transactions

namespace {

struct BuildContext {
  const World* world;
  const Multichain* mc;
  Address signer;
  CoordRef coordination;
  CrosschainTxId tx_id;
  wire::SidechainId originating;
  std::map<wire::SidechainId, U256> nonces;

  U256 next_nonce(const wire::SidechainId& chain) {
    auto it = nonces.find(chain);
    if (it == nonces.end()) {
      U256 n = 0;
      auto m = mc->members.find(chain);
      if (m != mc->members.end()) n = world->node(m->second).ledger().account(signer).nonce;
      it = nonces.emplace(chain, n).first;
    }
    return it->second++;
  }

  const ledger::Ledger* replica(const wire::SidechainId& chain) const {
    auto m = mc->members.find(chain);
    return m == mc->members.end() ? nullptr : &world->node(m->second).ledger();
  }
};

/// Records the subordinate calls a dry run makes, recursing into the callee chains.
class DryRun : public ledger::CrosschainCalls {
 public:
  DryRun(BuildContext& ctx, std::vector<CrosschainTransaction>& out) : ctx_(ctx), out_(out) {}

  Bytes view(const ledger::SubordinateCall& call) override {
    CrosschainTransaction node = make(call, TxType::SubordinateView);
    Bytes output;
    if (const ledger::Ledger* l = ctx_.replica(call.sidechain)) {
      DryRun nested(ctx_, node.subordinates);
      auto res = l->simulate(call.to, ctx_.signer, call.value, call.data, true, &nested);
      if (!res.ok()) throw BuildError(ledger::to_string(res.reason), "view on " + call.sidechain.hex() + ": " + res.detail);
      output = res.output;
    }
    out_.push_back(std::move(node));
    return output;
  }

  void transaction(const ledger::SubordinateCall& call) override {
    CrosschainTransaction node = make(call, TxType::SubordinateTx);
    if (const ledger::Ledger* l = ctx_.replica(call.sidechain)) {
      DryRun nested(ctx_, node.subordinates);
      auto res = l->simulate(call.to, ctx_.signer, call.value, call.data, false, &nested);
      if (!res.ok()) {
        throw BuildError(ledger::to_string(res.reason), "call on " + call.sidechain.hex() + ": " + res.detail);
      }
    }
    out_.push_back(std::move(node));
  }

 private:
  CrosschainTransaction make(const ledger::SubordinateCall& call, TxType type) {
    CrosschainTransaction t;
    t.type = type;
    t.coordination_chain = ctx_.coordination.first;
    t.coordination_contract = ctx_.coordination.second;
    t.tx_id = ctx_.tx_id;
    t.originating_sidechain = ctx_.originating;
    t.target_sidechain = call.sidechain;
    if (type == TxType::SubordinateTx) t.nonce = ctx_.next_nonce(call.sidechain);
    t.gas_limit = 3'000'000;
    t.to = call.to;
    t.value = call.value;
    t.data = call.data;
    return t;
  }

  BuildContext& ctx_;
  std::vector<CrosschainTransaction>& out_;
};

/// Read-only evaluation of nested crosschain views against member replicas.
class ViewCalls : public ledger::CrosschainCalls {
 public:
  ViewCalls(const World& world, const Multichain& mc, Address signer, ledger::LockedViewPolicy policy)
      : world_(world), mc_(mc), signer_(signer), policy_(policy) {}

  Bytes view(const ledger::SubordinateCall& call) override {
    auto m = mc_.members.find(call.sidechain);
    if (m == mc_.members.end()) throw ledger::Revert("missing-sidechain");
    ViewCalls nested(world_, mc_, signer_, policy_);
    return world_.node(m->second).ledger().read_view(call.to, call.data, policy_, signer_, &nested);
  }

  void transaction(const ledger::SubordinateCall&) override {
    throw ledger::Revert("crosschain view cannot issue transactions");
  }

 private:
  const World& world_;
  const Multichain& mc_;
  Address signer_;
  ledger::LockedViewPolicy policy_;
};

}  // namespace

CrosschainTransaction World::build_crosschain_tx(const std::string& multichain, const EntryCall& entry,
                                                 const Address& signer, std::uint64_t timeout_blocks,
                                                 const CoordRef& coordination, const CrosschainTxId& tx_id) const {
  const Multichain* mc = this->multichain(multichain);
  if (mc == nullptr) throw BuildError("unknown-multichain", "unknown multichain node " + multichain);
  BuildContext ctx{this, mc, signer, coordination, tx_id, entry.sidechain, {}};
  const ledger::Ledger* l = ctx.replica(entry.sidechain);
  if (l == nullptr) throw BuildError("missing-sidechain", "no member on the entry sidechain");

  CrosschainTransaction root;
  root.type = TxType::Originating;
  root.coordination_chain = coordination.first;
  root.coordination_contract = coordination.second;
  root.timeout_blocks = timeout_blocks;
  root.tx_id = tx_id;
  root.originating_sidechain = entry.sidechain;
  root.nonce = ctx.next_nonce(entry.sidechain);
  root.gas_limit = 3'000'000;
  root.to = entry.to;
  root.value = entry.value;
  root.data = entry.data;
  DryRun run(ctx, root.subordinates);
  auto res = l->simulate(entry.to, signer, entry.value, entry.data, false, &run);
  if (!res.ok()) throw BuildError(ledger::to_string(res.reason), res.detail);
  return root;
}

Bytes World::crosschain_view(const std::string& multichain, const EntryCall& entry, const Address& signer,
                             std::optional<ledger::LockedViewPolicy> policy) const {
  const Multichain* mc = this->multichain(multichain);
  if (mc == nullptr) throw BuildError("unknown-multichain", "unknown multichain node " + multichain);
  auto m = mc->members.find(entry.sidechain);
  if (m == mc->members.end()) throw BuildError("missing-sidechain", "no member on the entry sidechain");
  ledger::LockedViewPolicy p = policy.value_or(config_.view_policy);
  ViewCalls calls(*this, *mc, signer, p);
  try {
    return node(m->second).ledger().read_view(entry.to, entry.data, p, signer, &calls);
  } catch (const ledger::LedgerError& e) {
    throw BuildError(e.code() == ledger::LedgerError::Code::Locked ? "contract-locked" : "revert", e.what());
  } catch (const ledger::Revert& e) {
    throw BuildError("revert", e.what());
  }
}

CrosschainTxId World::fresh_tx_id() { return next_tx_id_++; }

void World::schedule_submit(SubmitIntent intent, Tick at) {
  std::string name = intent.name;
  if (intents_.count(name)) throw std::invalid_argument("duplicate submission name " + name);
  if (multichain(intent.multichain) == nullptr) throw std::invalid_argument("unknown multichain node " + intent.multichain);
  intents_.emplace(name, IntentState{std::move(intent), 0, {}});
  sim_.schedule(at, [this, name]() { submit_round(name); });
}

void World::submit_round(const std::string& name) {
  IntentState& st = intents_.at(name);
  const SubmitIntent& in = st.intent;
  ++st.rounds;
  CrosschainTxId id = (st.rounds == 1 && in.tx_id) ? *in.tx_id : fresh_tx_id();
  const Multichain& mc = *multichain(in.multichain);
  wire::TxRef ref{id, in.entry.sidechain, in.coordination.first, in.coordination.second};
  Hash256 key = wire::coordination_key(id, in.entry.sidechain);
  ref_to_intent_[key] = {name, st.rounds};
  st.refs.push_back(ref);
  CrosschainTransaction tx;
  try {
    tx = build_crosschain_tx(in.multichain, in.entry, in.account.address(), in.timeout_blocks, in.coordination, id);
  } catch (const BuildError& e) {
    sim_.record(mc.app, "build-failed", e.code(), sim::short_digest(key));
    TxOutcome out;
    out.ref = ref;
    out.reason = "build:" + e.code();
    on_outcome(mc.app, out);
    return;
  }
  if (in.edit_tree) in.edit_tree(tx);
  tx = wire::sign_tree(std::move(tx), in.account);
  if (in.before_submit) in.before_submit();
  auto msg = std::make_shared<SubmitTx>();
  msg->tx = std::make_shared<const CrosschainTransaction>(std::move(tx));
  auto member = mc.members.find(in.entry.sidechain);
  sim_.send(mc.app, member->second, msg, config_.timing.sidechain_latency);
}

void World::schedule_raw_submit(const std::string& multichain, CrosschainTransaction signed_tx, Tick at,
                                const std::string& intent_name) {
  const Multichain* mc = this->multichain(multichain);
  if (mc == nullptr) throw std::invalid_argument("unknown multichain node " + multichain);
  auto member = mc->members.find(signed_tx.originating_sidechain);
  if (member == mc->members.end()) throw std::invalid_argument("no member on the originating sidechain");
  ref_to_intent_[wire::coordination_key(signed_tx.tx_id, signed_tx.originating_sidechain)] = {intent_name, 1};
  auto msg = std::make_shared<SubmitTx>();
  msg->tx = std::make_shared<const CrosschainTransaction>(std::move(signed_tx));
  NodeId from = mc->app;
  NodeId to = member->second;
  sim_.schedule(at, [this, from, to, msg]() { sim_.send(from, to, msg, config_.timing.sidechain_latency); });
}

void World::on_outcome(const NodeId& app, const TxOutcome& outcome) {
  Hash256 key = wire::coordination_key(outcome.ref.tx_id, outcome.ref.originating);
  OutcomeRecord rec;
  rec.ref = outcome.ref;
  rec.committed = outcome.committed;
  rec.reason = outcome.reason;
  rec.tick = sim_.now();
  auto it = ref_to_intent_.find(key);
  if (it != ref_to_intent_.end()) {
    rec.intent = it->second.first;
    rec.round = it->second.second;
  }
  sim_.record(app, "outcome", outcome.committed ? "committed" : "failed:" + outcome.reason, sim::short_digest(key));
  outcomes_.push_back(rec);
  if (outcome.committed || rec.intent.empty()) return;
  auto st = intents_.find(rec.intent);
  if (st == intents_.end() || st->second.rounds != rec.round || st->second.rounds >= st->second.intent.max_rounds) {
    return;
  }
  const SubmitIntent& in = st->second.intent;
  Tick delay = in.retry_backoff;
  if (in.retry_jitter != 0) delay += std::uniform_int_distribution<Tick>(0, in.retry_jitter)(sim_.app_rng());
  std::string name = rec.intent;
  sim_.record(app, "retry", name + "#" + std::to_string(rec.round + 1));
  sim_.schedule(sim_.now() + delay, [this, name]() { submit_round(name); });
}

const SubmitIntent* World::intent(const std::string& name) const {
  auto it = intents_.find(name);
  return it == intents_.end() ? nullptr : &it->second.intent;
}

std::vector<wire::TxRef> World::submitted(const std::string& intent) const {
  auto it = intents_.find(intent);
  return it == intents_.end() ? std::vector<wire::TxRef>{} : it->second.refs;
}

// ---------------------------------------------------------------------------------------------
// World: lookup

Node& World::node(const NodeId& id) {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw std::invalid_argument("unknown node " + id);
  return *it->second;
}

const Node& World::node(const NodeId& id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw std::invalid_argument("unknown node " + id);
  return *it->second;
}

std::vector<Node*> World::nodes_of(const wire::SidechainId& chain) {
  std::vector<Node*> out;
  if (const SidechainInfo* info = sidechain(chain)) {
    for (const auto& id : info->nodes) out.push_back(nodes_.at(id).get());
  }
  return out;
}

std::vector<const Node*> World::all_nodes() const {
  std::vector<const Node*> out;
  for (const auto& [id, n] : nodes_) out.push_back(n.get());
  return out;
}

const SidechainInfo* World::sidechain(const wire::SidechainId& id) const {
  auto it = sidechains_.find(id);
  return it == sidechains_.end() ? nullptr : &it->second;
}

const SidechainInfo* World::sidechain(const std::string& name) const {
  for (const auto& [id, info] : sidechains_) {
    if (info.spec.name == name) return &info;
  }
  return nullptr;
}

CoordinationNode* World::coordination(const wire::SidechainId& chain) {
  for (auto& [name, c] : coords_) {
    if (c->chain().config().chain_id == chain) return c.get();
  }
  return nullptr;
}

const CoordinationNode* World::coordination(const wire::SidechainId& chain) const {
  for (const auto& [name, c] : coords_) {
    if (c->chain().config().chain_id == chain) return c.get();
  }
  return nullptr;
}

CoordinationNode* World::coordination(const std::string& name) {
  auto it = coords_.find(name);
  return it == coords_.end() ? nullptr : it->second.get();
}

const Multichain* World::multichain(const std::string& name) const {
  auto it = multichains_.find(name);
  return it == multichains_.end() ? nullptr : &it->second;
}

const Multichain* World::multichain_of(const NodeId& member) const {
  for (const auto& [name, mc] : multichains_) {
    for (const auto& [chain, id] : mc.members) {
      if (id == member) return &mc;
    }
  }
  return nullptr;
}

std::set<CoordRef> World::all_coordination_refs() const {
  std::set<CoordRef> out;
  for (const auto& [name, c] : coords_) out.insert({c->chain().config().chain_id, c->chain().config().contract_address});
  return out;
}

NodeId World::coordinator_for(const NodeId& member, const wire::SidechainId& chain) const {
  const Multichain* mc = multichain_of(member);
  if (mc == nullptr) return {};
  auto it = mc->members.find(chain);
  return it == mc->members.end() ? NodeId{} : it->second;
}

// ---------------------------------------------------------------------------------------------
// World: services used by nodes

std::optional<std::string> World::apply_block(const wire::SidechainId& chain, const CrosschainTransaction& tx,
                                              const std::vector<SignedMessage>& views) {
  std::size_t applied = 0;
  for (Node* n : nodes_of(chain)) {
    if (!sim_.alive(n->id())) continue;
    if (n->apply_block(tx, views)) ++applied;
  }
  if (applied == 0) return std::string("no replica applied the block");
  return std::nullopt;
}

bool World::verify(ByteView public_key, ByteView message, ByteView signature) const {
  Bytes key;
  key.reserve(public_key.size() + message.size() + signature.size() + 12);
  for (ByteView part : {public_key, message, signature}) {
    std::uint32_t len = static_cast<std::uint32_t>(part.size());
    for (int i = 0; i < 4; ++i) key.push_back(static_cast<std::uint8_t>(len >> (8 * i)));
    key.insert(key.end(), part.begin(), part.end());
  }
  auto it = verify_cache_.find(key);
  if (it != verify_cache_.end()) return it->second;
  bool ok = scheme_->verify(public_key, message, signature);
  verify_cache_.emplace(std::move(key), ok);
  return ok;
}

std::optional<Address> World::signer_of(const CrosschainTransaction& tx) const {
  Hash256 h = wire::tx_hash(tx);
  auto it = signer_cache_.find(h);
  if (it != signer_cache_.end()) return it->second;
  std::optional<Address> out;
  try {
    out = wire::recover_signer(tx);
  } catch (const wire::WireError&) {
    out = std::nullopt;
  }
  signer_cache_.emplace(h, out);
  return out;
}

}  // namespace xchain::protocol
