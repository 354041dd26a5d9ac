#include "xchain/protocol/node.hpp"

#include <algorithm>

#include "xchain/crypto/keccak.hpp"

namespace xchain::protocol {

using coord::EffectiveStatus;
using steps::Role;
using wire::CrosschainTransaction;
using wire::MessageKind;
using wire::ThresholdMessage;
using wire::TxType;

namespace {

void collect_subtxs(const CrosschainTransaction& tx, std::vector<const CrosschainTransaction*>& out) {
  for (const auto& s : tx.subordinates) {
    if (s.type == TxType::SubordinateTx) out.push_back(&s);
    collect_subtxs(s, out);
  }
}

void collect_chains(const CrosschainTransaction& tx, std::set<wire::SidechainId>& out) {
  out.insert(tx.executing_sidechain());
  for (const auto& s : tx.subordinates) collect_chains(s, out);
}

std::map<std::size_t, Bytes> view_results_for(const CrosschainTransaction& tx, const std::vector<SignedMessage>& views) {
  std::map<std::size_t, Bytes> out;
  for (std::size_t i = 0; i < tx.subordinates.size(); ++i) {
    const auto& child = tx.subordinates[i];
    if (!child.is_view()) continue;
    Hash256 h = wire::tx_hash(child);
    for (const auto& v : views) {
      if (v.msg.view_hash == h) {
        out[i] = v.msg.result;
        break;
      }
    }
  }
  return out;
}

std::string abort_code(const ledger::ExecutionOutcome& o) { return std::string("execution:") + ledger::to_string(o.reason); }

}  // namespace

Node::Node(World& world, NodeId id, wire::SidechainId chain, std::uint32_t index, ValidatorPolicy policy)
    : world_(world),
      id_(std::move(id)),
      chain_(chain),
      index_(index),
      policy_(std::move(policy)),
      ledger_(chain, &world.registry()) {}

// ---------------------------------------------------------------------------------------------
// Plumbing

void Node::send(const NodeId& to, sim::MessagePtr msg) { world_.sim().send(id_, to, std::move(msg), latency_to(to)); }

Tick Node::latency_to(const NodeId& to) const {
  const auto& g = world_.sim().group_of(to);
  if (g == info().spec.name || g == "app/" + member_of_) return world_.timing().sidechain_latency;
  return world_.timing().crosschain_latency;
}

std::uint64_t Node::after(Tick delay, std::function<void()> fn) {
  std::uint64_t t = world_.sim().set_timer(id_, delay);
  if (t != 0) timers_[t] = std::move(fn);
  return t;
}

void Node::cancel(std::uint64_t& timer) {
  if (timer == 0) return;
  world_.sim().cancel_timer(timer);
  timers_.erase(timer);
  timer = 0;
}

void Node::on_timer(std::uint64_t timer_id) {
  auto it = timers_.find(timer_id);
  if (it == timers_.end()) return;
  auto fn = std::move(it->second);
  timers_.erase(it);
  fn();
}

bool Node::step(Role role, std::string_view name, const Hash256& digest) {
  return world_.sim().step(id_, steps::qualified(role, name), sim::short_digest(digest));
}

void Node::note(std::string_view kind, std::string_view reason, const Hash256& digest) {
  world_.sim().record(id_, kind, reason, sim::short_digest(digest));
}

const SidechainInfo& Node::info() const { return *world_.sidechain(chain_); }

const crypto::threshold::EncodedShare& Node::share() const { return info().keys.shares.at(index_ - 1); }

std::vector<NodeId> Node::peers() const { return info().nodes; }

std::uint64_t Node::head() const { return world_.sim().now() / std::max<Tick>(1, info().spec.block_interval); }

const CoordinationNode* Node::coordination_for(const wire::TxRef& ref) const {
  const CoordinationNode* c = world_.coordination(ref.coordination_chain);
  if (c == nullptr || !(c->chain().config().contract_address == ref.coordination_contract)) return nullptr;
  return c;
}

// ---------------------------------------------------------------------------------------------
// Checks

std::optional<std::string> Node::check_signature(const CrosschainTransaction& tx) const {
  if (!world_.signer_of(tx)) return "invalid-transaction";
  if (wire::common_signer_violation(tx)) return "invalid-transaction";
  return std::nullopt;
}

std::optional<std::string> Node::check_permission(const CrosschainTransaction& tx) const {
  auto signer = world_.signer_of(tx);
  if (!signer) return "invalid-transaction";
  const auto& allowed = tx.is_view() ? policy_.view_allowed : policy_.tx_allowed;
  if (allowed && !allowed->count(*signer)) return "not-permitted";
  return std::nullopt;
}

std::optional<std::string> Node::check_trust(const wire::TxRef& ref) const {
  if (coordination_for(ref) == nullptr) return "untrusted-coordination";
  if (policy_.trusted && !policy_.trusted->count({ref.coordination_chain, ref.coordination_contract})) {
    return "untrusted-coordination";
  }
  return std::nullopt;
}

std::optional<std::string> Node::check_public_keys(const CrosschainTransaction& tx) const {
  const CoordinationNode* c = coordination_for(tx.ref());
  if (c == nullptr) return "untrusted-coordination";
  std::set<wire::SidechainId> chains;
  collect_chains(tx, chains);
  for (const auto& sc : chains) {
    if (!c->chain().current_key(sc)) return "no-public-key";
  }
  return std::nullopt;
}

std::optional<std::string> Node::check_coverage(const CrosschainTransaction& tx) const {
  const Multichain* mc = world_.multichain(member_of_);
  if (mc == nullptr) return "missing-sidechain";
  std::set<wire::SidechainId> chains;
  collect_chains(tx, chains);
  for (const auto& sc : chains) {
    if (!mc->members.count(sc)) return "missing-sidechain";
  }
  return std::nullopt;
}

std::optional<std::string> Node::check_active(const wire::TxRef& ref) const {
  const CoordinationNode* c = coordination_for(ref);
  if (c == nullptr) return "untrusted-coordination";
  Hash256 key = wire::coordination_key(ref.tx_id, ref.originating);
  if (c->chain().find(key) == nullptr) return "tx-not-active";
  if (c->chain().effective_status(key) != EffectiveStatus::Started) return "tx-not-active";
  return std::nullopt;
}

std::optional<std::string> Node::check_lock_horizon(const wire::TxRef& ref) const {
  const CoordinationNode* c = coordination_for(ref);
  if (c == nullptr) return "untrusted-coordination";
  const coord::CoordinationEntry* e = c->chain().find(wire::coordination_key(ref.tx_id, ref.originating));
  if (e == nullptr) return "tx-not-active";
  std::uint64_t now = c->chain().block_number();
  std::uint64_t remaining = e->timeout_block > now ? e->timeout_block - now : 0;
  if (remaining > policy_.max_lock_horizon) return "timeout-unacceptable";
  return std::nullopt;
}

bool Node::verify_by(const wire::TxRef& ref, const wire::SidechainId& signer, const SignedMessage& m) const {
  const CoordinationNode* c = coordination_for(ref);
  if (c == nullptr) return false;
  Bytes bytes = m.encoded();
  if (auto key = c->chain().current_key(signer); key && world_.verify(*key, bytes, m.signature)) return true;
  return c->chain().verify_signed_by(signer, bytes, m.signature);
}

std::optional<std::string> Node::check_views(const CrosschainTransaction& tx,
                                             const std::vector<SignedMessage>& views) const {
  for (const auto& child : tx.subordinates) {
    if (!child.is_view()) continue;
    Hash256 h = wire::tx_hash(child);
    auto it = std::find_if(views.begin(), views.end(), [&](const SignedMessage& v) { return v.msg.view_hash == h; });
    if (it == views.end()) return "view-missing";
    const ThresholdMessage& m = it->msg;
    if (m.kind != MessageKind::SubordinateViewResult || !(m.ref() == child.ref()) ||
        !(m.executing_sidechain == child.executing_sidechain())) {
      return "view-invalid";
    }
    if (!verify_by(tx.ref(), child.executing_sidechain(), *it)) return "view-invalid";
  }
  return std::nullopt;
}

ledger::ExecutionOutcome Node::execute(const CrosschainTransaction& tx, const std::vector<SignedMessage>& views) {
  resolve_stale(tx.to);
  auto signer = world_.signer_of(tx);
  ledger::ExecutionOutcome out;
  if (!signer) {
    out.reason = ledger::AbortReason::Revert;
    out.detail = "invalid signature";
    return out;
  }
  ledger::CallFrame frame = ledger::CallFrame::from_tree(tx, view_results_for(tx, views));
  return ledger_.execute_local(tx, *signer, frame);
}

// ---------------------------------------------------------------------------------------------
// Validator side

std::optional<std::string> Node::validate_sign(const SignRequest& req) {
  const CrosschainTransaction& tx = *req.tx;
  const ThresholdMessage& m = req.msg;
  if (auto e = check_trust(tx.ref())) return e;
  switch (m.kind) {
    case MessageKind::Start: {
      if (tx.type != TxType::Originating || !(tx.executing_sidechain() == chain_) || !tx.timeout_blocks) {
        return "invalid-transaction";
      }
      if (!(m == ThresholdMessage::start(tx.ref(), *tx.timeout_blocks))) return "message-mismatch";
      if (auto e = check_signature(tx)) return e;
      if (auto e = check_permission(tx)) return e;
      if (*tx.timeout_blocks > policy_.max_lock_horizon) return "timeout-unacceptable";
      if (auto e = check_public_keys(tx)) return e;
      if (policy_.refuse_start && policy_.refuse_start(tx)) return "spam";
      return std::nullopt;
    }
    case MessageKind::Commit: {
      if (!(m == ThresholdMessage::commit(tx.ref()))) return "message-mismatch";
      if (auto e = check_active(tx.ref())) return e;
      if (!has_mined(wire::tx_hash(tx))) return "not-mined";
      std::vector<const CrosschainTransaction*> subtxs;
      collect_subtxs(tx, subtxs);
      for (const auto* s : subtxs) {
        Hash256 h = wire::tx_hash(*s);
        auto it = std::find_if(req.evidence.begin(), req.evidence.end(), [&](const SignedMessage& r) {
          return r.msg.kind == MessageKind::SubordinateTxReady && r.msg.transaction_hash == h;
        });
        if (it == req.evidence.end()) return "ready-missing";
        if (!(it->msg == ThresholdMessage::subordinate_tx_ready(tx.ref(), s->executing_sidechain(), h))) {
          return "ready-invalid";
        }
        if (!verify_by(tx.ref(), s->executing_sidechain(), *it)) return "ready-invalid";
      }
      return std::nullopt;
    }
    case MessageKind::Ignore: {
      if (!(m == ThresholdMessage::ignore(tx.ref()))) return "message-mismatch";
      return check_active(tx.ref());
    }
    case MessageKind::SubordinateTxReady: {
      Hash256 h = wire::tx_hash(tx);
      if (!(m == ThresholdMessage::subordinate_tx_ready(tx.ref(), chain_, h))) return "message-mismatch";
      if (!has_mined(h)) return "not-mined";
      return std::nullopt;
    }
    case MessageKind::SubordinateViewResult: {
      if (!tx.is_view() || !(m.ref() == tx.ref()) || !(m.executing_sidechain == chain_) ||
          !(m.view_hash == wire::tx_hash(tx))) {
        return "message-mismatch";
      }
      std::uint64_t h = head();
      if (m.block_number > h || m.block_number + policy_.freshness_window < h) return "stale-block";
      if (auto e = check_signature(tx)) return e;
      if (auto e = check_permission(tx)) return e;
      if (auto e = check_views(tx, req.evidence)) return e;
      ledger::ExecutionOutcome out = execute(tx, req.evidence);
      if (!out.ok()) return abort_code(out);
      if (policy_.dissent_views) out.output.push_back(0x01);
      if (out.output != m.result) return "result-mismatch";
      return std::nullopt;
    }
  }
  return "message-mismatch";
}

void Node::on_sign_request(const NodeId& from, const SignRequest& req) {
  if (auto refusal = validate_sign(req)) {
    note("refuse", *refusal, wire::tx_hash(*req.tx));
    auto r = std::make_shared<SignRefusal>();
    r->request = req.request;
    r->reason = *refusal;
    send(from, r);
    return;
  }
  auto r = std::make_shared<SignResponse>();
  r->request = req.request;
  r->index = index_;
  r->share = world_.scheme().sign_share(share(), wire::encode_message(req.msg));
  send(from, r);
}

std::optional<std::string> Node::validate_mine(const MineRequest& req) {
  const CrosschainTransaction& tx = *req.tx;
  if (!(tx.executing_sidechain() == chain_) || tx.is_view()) return "invalid-transaction";
  if (auto e = check_signature(tx)) return e;
  if (auto e = check_permission(tx)) return e;
  if (auto e = check_trust(tx.ref())) return e;
  if (auto e = check_active(tx.ref())) return e;
  if (tx.type == TxType::SubordinateTx) {
    if (auto e = check_lock_horizon(tx.ref())) return e;
  }
  if (auto e = check_views(tx, req.view_results)) return e;
  ledger::ExecutionOutcome out = execute(tx, req.view_results);
  if (!out.ok()) return abort_code(out);
  return std::nullopt;
}

void Node::on_mine_request(const NodeId& from, const MineRequest& req) {
  auto vote = std::make_shared<MineVote>();
  vote->request = req.request;
  if (auto e = validate_mine(req)) {
    note("refuse", *e, wire::tx_hash(*req.tx));
    vote->reason = *e;
  } else {
    vote->accept = true;
  }
  send(from, vote);
}

bool Node::apply_block(const CrosschainTransaction& tx, const std::vector<SignedMessage>& views) {
  Hash256 h = wire::tx_hash(tx);
  if (has_mined(h)) return true;
  ledger::ExecutionOutcome out = execute(tx, views);
  if (!out.ok()) {
    note("block-skip", ledger::to_string(out.reason), h);
    last_block_failure_ = abort_code(out);
    return false;
  }
  auto signer = world_.signer_of(tx);
  Hash256 key = wire::coordination_key(tx.tx_id, tx.originating_sidechain);
  ledger_.apply_mined(tx, *signer, out, ledger::LockHolder{tx.ref(), key});
  mined_.insert(h);
  note("lock", tx.to.hex(), key);
  world_.record_lock(LockRecord{world_.sim().now(), id_, chain_, tx.to, key});
  arm_watch(tx.ref());
  return true;
}

// ---------------------------------------------------------------------------------------------
// Locks

void Node::arm_watch(const wire::TxRef& ref) {
  const CoordinationNode* c = coordination_for(ref);
  if (c == nullptr) return;
  Hash256 key = wire::coordination_key(ref.tx_id, ref.originating);
  const coord::CoordinationEntry* e = c->chain().find(key);
  if (e == nullptr) return;
  auto& w = watches_[key];
  w.ref = ref;
  cancel(w.timer);
  std::int64_t fire = static_cast<std::int64_t>(c->block_start(e->timeout_block + 1) + world_.timing().timer_lag) +
                      policy_.clock_skew;
  std::int64_t now = static_cast<std::int64_t>(world_.sim().now());
  Tick delay = fire > now ? static_cast<Tick>(fire - now) : c->block_interval();
  w.timer = after(delay, [this, key]() {
    auto it = watches_.find(key);
    if (it == watches_.end()) return;
    it->second.timer = 0;
    wire::TxRef r = it->second.ref;
    if (!resolve(r, "timer") && !ledger_.locked_by(key).empty()) {
      note("rearm", "still-started", key);
      const CoordinationNode* cn = coordination_for(r);
      it->second.timer = after(cn ? cn->block_interval() : 10, [this, r]() { arm_watch(r); });
    }
  });
}

bool Node::resolve(const wire::TxRef& ref, std::string_view trigger) {
  const CoordinationNode* c = coordination_for(ref);
  if (c == nullptr) return false;
  Hash256 key = wire::coordination_key(ref.tx_id, ref.originating);
  if (c->chain().find(key) == nullptr) return false;
  EffectiveStatus status = c->chain().effective_status(key);
  if (status == EffectiveStatus::Started) return false;
  auto decision = status == EffectiveStatus::Committed ? ledger::Decision::Commit : ledger::Decision::Ignore;
  for (const Address& a : ledger_.finalize_holder(key, decision)) {
    note("finalize", std::string(ledger::to_string(decision)) + ":" + std::string(trigger), key);
    world_.record_finalize(FinalizeRecord{world_.sim().now(), id_, chain_, a, key, decision, status});
  }
  if (auto it = watches_.find(key); it != watches_.end()) {
    cancel(it->second.timer);
    watches_.erase(it);
  }
  return true;
}

void Node::resolve_stale(const Address& contract) {
  const ledger::Contract* c = ledger_.contract(contract);
  if (c == nullptr || !c->locked() || !c->lock.holder) return;
  resolve(c->lock.holder->ref, "lazy");
}

void Node::on_check(const CheckCoordination& check) {
  resolve(check.ref, "check");
  if (!check.forward) return;
  for (const auto& p : peers()) {
    if (p == id_) continue;
    auto m = std::make_shared<CheckCoordination>();
    m->ref = check.ref;
    send(p, m);
  }
}

// ---------------------------------------------------------------------------------------------
// Coordinator primitives

std::uint64_t Node::expect_reply(Tick deadline, std::function<void(const sim::Message*)> on_reply) {
  std::uint64_t request = next_request_++;
  Pending p;
  p.on_reply = std::move(on_reply);
  p.timer = after(deadline, [this, request]() {
    auto it = pending_.find(request);
    if (it == pending_.end()) return;
    auto fn = std::move(it->second.on_reply);
    pending_.erase(it);
    fn(nullptr);
  });
  pending_[request] = std::move(p);
  return request;
}

void Node::deliver_reply(std::uint64_t request, const sim::Message& reply) {
  auto it = pending_.find(request);
  if (it == pending_.end()) return;
  auto fn = std::move(it->second.on_reply);
  cancel(it->second.timer);
  pending_.erase(it);
  fn(&reply);
}

void Node::threshold_sign(ThresholdMessage msg, TxPtr tx, std::vector<SignedMessage> evidence, SignDone done) {
  std::uint64_t request = next_request_++;
  SignRound& r = sign_rounds_[request];
  r.msg = msg;
  r.bytes = wire::encode_message(msg);
  r.done = std::move(done);
  std::string kind = wire::to_string(msg.kind);
  r.timer = after(world_.timing().sign_deadline, [this, request, kind]() {
    auto it = sign_rounds_.find(request);
    if (it == sign_rounds_.end()) return;
    it->second.timer = 0;
    std::string reason = it->second.first_refusal.empty() ? "sign-timeout" : it->second.first_refusal;
    finish_sign(request, std::nullopt, reason);
  });
  auto req = std::make_shared<SignRequest>();
  req->request = request;
  req->msg = std::move(msg);
  req->tx = std::move(tx);
  req->evidence = std::move(evidence);
  for (const auto& p : peers()) send(p, req);
}

void Node::on_sign_reply(std::uint64_t request, const sim::Message& reply) {
  auto it = sign_rounds_.find(request);
  if (it == sign_rounds_.end()) return;
  SignRound& r = it->second;
  const auto& cfg = info().config;
  if (const auto* refusal = dynamic_cast<const SignRefusal*>(&reply)) {
    ++r.refusals;
    if (r.first_refusal.empty()) r.first_refusal = refusal->reason;
  } else if (const auto* s = dynamic_cast<const SignResponse*>(&reply)) {
    if (s->index == 0 || s->index > cfg.n || !r.responded.insert(s->index).second) return;
    r.shares.emplace_back(s->index, s->share);
    if (r.shares.size() >= cfg.m) {
      const Bytes& pk = info().keys.public_key;
      auto sig = world_.scheme().combine(r.shares, cfg);
      if (sig && world_.verify(pk, r.bytes, *sig)) {
        finish_sign(request, sig, "");
        return;
      }
      // Some share is bad: drop the ones failing their public share and keep waiting.
      std::vector<std::pair<std::uint32_t, Bytes>> good;
      for (auto& [idx, sh] : r.shares) {
        if (world_.scheme().verify_share(info().keys.shares.at(idx - 1).public_share, r.bytes, sh)) {
          good.emplace_back(idx, std::move(sh));
        } else {
          r.bad.insert(idx);
          note("bad-share", "v" + std::to_string(idx), crypto::keccak256(r.bytes));
        }
      }
      r.shares = std::move(good);
      if (r.shares.size() >= cfg.m) {
        auto retry = world_.scheme().combine(r.shares, cfg);
        if (retry && world_.verify(pk, r.bytes, *retry)) {
          finish_sign(request, retry, "");
          return;
        }
      }
    }
  }
  std::size_t unusable = r.refusals + r.bad.size();
  if (cfg.n - std::min<std::size_t>(cfg.n, unusable) < cfg.m) {
    finish_sign(request, std::nullopt, r.first_refusal.empty() ? "bad-shares" : r.first_refusal);
  }
}

void Node::finish_sign(std::uint64_t request, std::optional<Bytes> signature, std::string reason) {
  auto it = sign_rounds_.find(request);
  if (it == sign_rounds_.end()) return;
  SignRound r = std::move(it->second);
  sign_rounds_.erase(it);
  cancel(r.timer);
  r.done(std::move(signature), std::move(reason));
}

void Node::mine(TxPtr tx, std::vector<SignedMessage> views, Done done) {
  std::uint64_t request = next_request_++;
  MineRound& r = mine_rounds_[request];
  r.tx = tx;
  r.views = views;
  r.done = std::move(done);
  r.timer = after(world_.timing().mine_deadline, [this, request]() {
    auto it = mine_rounds_.find(request);
    if (it == mine_rounds_.end()) return;
    it->second.timer = 0;
    std::string reason = it->second.first_reject.empty() ? "mine-timeout" : "mining-rejected:" + it->second.first_reject;
    finish_mine(request, false, reason);
  });
  auto req = std::make_shared<MineRequest>();
  req->request = request;
  req->tx = std::move(tx);
  req->view_results = std::move(views);
  for (const auto& p : peers()) send(p, req);
}

void Node::on_mine_vote(const NodeId& from, const MineVote& vote) {
  auto it = mine_rounds_.find(vote.request);
  if (it == mine_rounds_.end()) return;
  MineRound& r = it->second;
  if (!r.voted.insert(from).second) return;
  const auto& cfg = info().config;
  if (vote.accept) {
    ++r.accepts;
  } else {
    ++r.rejects;
    if (r.first_reject.empty()) r.first_reject = vote.reason;
  }
  if (r.accepts >= cfg.m) {
    TxPtr tx = r.tx;
    world_.apply_block(chain_, *tx, r.views);
    bool ok = has_mined(wire::tx_hash(*tx));
    finish_mine(vote.request, ok, ok ? "" : last_block_failure_);
  } else if (r.rejects > cfg.n - cfg.m) {
    finish_mine(vote.request, false, "mining-rejected:" + r.first_reject);
  }
}

void Node::finish_mine(std::uint64_t request, bool ok, std::string reason) {
  auto it = mine_rounds_.find(request);
  if (it == mine_rounds_.end()) return;
  MineRound r = std::move(it->second);
  mine_rounds_.erase(it);
  cancel(r.timer);
  r.done(ok, std::move(reason));
}

void Node::submit(const SignedMessage& m, Done done) {
  const CoordinationNode* c = coordination_for(m.msg.ref());
  if (c == nullptr) {
    done(false, "untrusted-coordination");
    return;
  }
  std::uint64_t request = expect_reply(world_.timing().receipt_deadline, [done](const sim::Message* reply) {
    const auto* receipt = dynamic_cast<const CoordinationReceipt*>(reply);
    if (receipt == nullptr) {
      done(false, "receipt-timeout");
    } else {
      done(receipt->accepted, receipt->error);
    }
  });
  auto msg = std::make_shared<CoordinationSubmit>();
  msg->request = request;
  msg->signed_msg = m;
  send(c->id(), msg);
}

void Node::gather_views(TxPtr tx, ViewsDone done) {
  struct State {
    std::size_t outstanding = 0;
    bool finished = false;
    std::vector<SignedMessage> views;
    ViewsDone done;
  };
  auto st = std::make_shared<State>();
  st->done = std::move(done);
  std::vector<const CrosschainTransaction*> children;
  for (const auto& c : tx->subordinates) {
    if (c.is_view()) children.push_back(&c);
  }
  if (children.empty()) {
    st->done(true, {}, "");
    return;
  }
  st->outstanding = children.size();
  auto fail = [st](const std::string& reason) {
    if (st->finished) return;
    st->finished = true;
    st->done(false, {}, reason);
  };
  for (const auto* child : children) {
    NodeId target = world_.coordinator_for(id_, child->executing_sidechain());
    if (target.empty()) {
      fail("missing-sidechain");
      return;
    }
    auto view = std::make_shared<const CrosschainTransaction>(*child);
    auto req = std::make_shared<ViewRequest>();
    req->view = view;
    req->request = expect_reply(world_.timing().view_deadline, [this, st, view, tx, fail](const sim::Message* reply) {
      if (st->finished) return;
      const auto* resp = dynamic_cast<const ViewResponse*>(reply);
      if (resp == nullptr) return fail("view-timeout");
      if (!resp->ok) return fail("view-failed:" + resp->reason);
      const ThresholdMessage& m = resp->result.msg;
      if (m.kind != MessageKind::SubordinateViewResult || !(m.view_hash == wire::tx_hash(*view)) ||
          !(m.ref() == view->ref()) || !(m.executing_sidechain == view->executing_sidechain()) ||
          !verify_by(tx->ref(), view->executing_sidechain(), resp->result)) {
        return fail("view-invalid");
      }
      st->views.push_back(resp->result);
      if (--st->outstanding == 0) {
        st->finished = true;
        st->done(true, std::move(st->views), "");
      }
    });
    send(target, req);
  }
}

void Node::broadcast_check(const CrosschainTransaction& root) {
  wire::TxRef ref = root.ref();
  resolve(ref, "check");
  for (const auto& p : peers()) {
    if (p == id_) continue;
    auto m = std::make_shared<CheckCoordination>();
    m->ref = ref;
    send(p, m);
  }
  std::set<wire::SidechainId> chains;
  collect_chains(root, chains);
  for (const auto& sc : chains) {
    if (sc == chain_) continue;
    NodeId target = world_.coordinator_for(id_, sc);
    if (target.empty()) continue;
    auto m = std::make_shared<CheckCoordination>();
    m->ref = ref;
    m->forward = true;
    send(target, m);
  }
}

// ---------------------------------------------------------------------------------------------
// Message dispatch

void Node::on_message(const NodeId& from, const sim::MessagePtr& msg) {
  const sim::Message* m = msg.get();
  if (const auto* x = dynamic_cast<const SignRequest*>(m)) return on_sign_request(from, *x);
  if (const auto* x = dynamic_cast<const SignResponse*>(m)) return on_sign_reply(x->request, *x);
  if (const auto* x = dynamic_cast<const SignRefusal*>(m)) return on_sign_reply(x->request, *x);
  if (const auto* x = dynamic_cast<const MineRequest*>(m)) return on_mine_request(from, *x);
  if (const auto* x = dynamic_cast<const MineVote*>(m)) return on_mine_vote(from, *x);
  if (const auto* x = dynamic_cast<const CoordinationReceipt*>(m)) return deliver_reply(x->request, *x);
  if (const auto* x = dynamic_cast<const ViewResponse*>(m)) return deliver_reply(x->request, *x);
  if (const auto* x = dynamic_cast<const SubmitTx*>(m)) return on_submit(from, x->tx);
  if (const auto* x = dynamic_cast<const ViewRequest*>(m)) return on_view_request(from, *x);
  if (const auto* x = dynamic_cast<const SubTxRequest*>(m)) return on_subtx_request(*x);
  if (const auto* x = dynamic_cast<const SubTxReady*>(m)) return origin_on_ready(x->ready);
  if (const auto* x = dynamic_cast<const SubTxError*>(m)) return origin_on_subtx_error(*x);
  if (const auto* x = dynamic_cast<const CheckCoordination*>(m)) return on_check(*x);
}

// ---------------------------------------------------------------------------------------------
// Originating coordinator

void Node::on_submit(const NodeId& from, const TxPtr& tx) {
  Hash256 key = wire::coordination_key(tx->tx_id, tx->originating_sidechain);
  Hash256 h = wire::tx_hash(*tx);
  auto ctx = std::make_shared<OriginCtx>();
  ctx->tx = tx;
  ctx->app = from;
  ctx->key = key;
  if (origins_.count(key)) {
    note("fail", "duplicate-submission", h);
    origin_report(ctx, "duplicate-submission");
    return;
  }
  origins_[key] = ctx;
  if (!step(Role::Origin, "received", h)) return;

  std::optional<std::string> err;
  if (tx->type != TxType::Originating || !(tx->executing_sidechain() == chain_) || !tx->timeout_blocks) {
    err = "invalid-transaction";
  }
  if (!err) err = check_signature(*tx);
  if (!err) err = check_permission(*tx);
  if (!err) err = check_trust(tx->ref());
  if (!err) err = check_coverage(*tx);
  if (!err) err = check_public_keys(*tx);
  if (err) return origin_fail(ctx, *err);
  if (!step(Role::Origin, "checks-passed", h)) return;

  threshold_sign(ThresholdMessage::start(tx->ref(), *tx->timeout_blocks), tx, {},
                 [this, ctx, h](std::optional<Bytes> sig, std::string reason) {
                   if (ctx->finished) return;
                   if (!sig) return origin_fail(ctx, "start-unsigned:" + reason);
                   if (!step(Role::Origin, "start-signed", h)) return;
                   SignedMessage start{ThresholdMessage::start(ctx->tx->ref(), *ctx->tx->timeout_blocks), *sig};
                   submit(start, [this, ctx, h](bool ok, std::string error) {
                     if (ctx->finished) return;
                     if (!ok) return origin_fail(ctx, "start-rejected:" + error);
                     ctx->started = true;
                     if (!step(Role::Origin, "start-accepted", h)) return;
                     origin_after_start(ctx);
                   });
                   step(Role::Origin, "start-submitted", h);
                 });
}

void Node::origin_after_start(const std::shared_ptr<OriginCtx>& ctx) {
  Hash256 h = wire::tx_hash(*ctx->tx);
  if (!step(Role::Origin, "views-dispatched", h)) return;
  gather_views(ctx->tx, [this, ctx, h](bool ok, std::vector<SignedMessage> views, std::string reason) {
    if (ctx->finished || ctx->failing) return;
    if (!ok) return origin_fail(ctx, reason);
    if (!step(Role::Origin, "views-collected", h)) return;
    ledger::ExecutionOutcome out = execute(*ctx->tx, views);
    if (!out.ok()) return origin_fail(ctx, abort_code(out));
    if (!step(Role::Origin, "executed", h)) return;
    mine(ctx->tx, views, [this, ctx, h](bool mined, std::string why) {
      if (ctx->finished || ctx->failing) return;
      if (!mined) return origin_fail(ctx, why);
      if (!step(Role::Origin, "mined", h)) return;
      for (const auto& s : ctx->tx->subordinates) {
        if (s.type == TxType::SubordinateTx) ctx->direct_subtxs.push_back(&s);
      }
      std::vector<const CrosschainTransaction*> all;
      collect_subtxs(*ctx->tx, all);
      for (const auto* s : all) ctx->expected_ready[wire::tx_hash(*s)] = s;
      if (ctx->expected_ready.empty()) {
        if (!step(Role::Origin, "subtxs-dispatched", h)) return;
        if (!step(Role::Origin, "ready-collected", h)) return;
        return origin_commit(ctx);
      }
      arm_ready_timer(ctx);
      origin_dispatch_next(ctx);
    });
  });
}

void Node::origin_dispatch_next(const std::shared_ptr<OriginCtx>& ctx) {
  if (ctx->next_subtx >= ctx->direct_subtxs.size()) return;
  const CrosschainTransaction* child = ctx->direct_subtxs[ctx->next_subtx++];
  NodeId target = world_.coordinator_for(id_, child->executing_sidechain());
  if (target.empty()) return origin_fail(ctx, "missing-sidechain");
  auto req = std::make_shared<SubTxRequest>();
  req->tx = std::make_shared<const CrosschainTransaction>(*child);
  req->originating_coordinator = id_;
  send(target, req);
  if (ctx->next_subtx == ctx->direct_subtxs.size()) step(Role::Origin, "subtxs-dispatched", wire::tx_hash(*ctx->tx));
}

void Node::arm_ready_timer(const std::shared_ptr<OriginCtx>& ctx) {
  cancel(ctx->ready_timer);
  ctx->ready_timer = after(world_.timing().ready_deadline, [this, ctx]() {
    ctx->ready_timer = 0;
    if (ctx->finished || ctx->failing) return;
    origin_fail(ctx, "ready-timeout");
  });
}

void Node::origin_on_ready(const SignedMessage& ready) {
  const ThresholdMessage& m = ready.msg;
  auto it = origins_.find(wire::coordination_key(m.tx_id, m.originating_sidechain));
  if (it == origins_.end()) return;
  auto ctx = it->second;
  if (ctx->finished || ctx->failing || !ctx->started) return;
  auto exp = ctx->expected_ready.find(m.transaction_hash);
  if (exp == ctx->expected_ready.end() || ctx->readies.count(m.transaction_hash)) return;
  if (m.kind != MessageKind::SubordinateTxReady ||
      !(m == ThresholdMessage::subordinate_tx_ready(ctx->tx->ref(), exp->second->executing_sidechain(),
                                                    m.transaction_hash)) ||
      !verify_by(ctx->tx->ref(), m.executing_sidechain, ready)) {
    note("bad-ready", m.executing_sidechain.hex(), m.transaction_hash);
    return;
  }
  ctx->readies[m.transaction_hash] = ready;
  Hash256 h = wire::tx_hash(*ctx->tx);
  bool direct = std::any_of(ctx->direct_subtxs.begin(), ctx->direct_subtxs.end(), [&](const auto* s) {
    return wire::tx_hash(*s) == m.transaction_hash;
  });
  if (ctx->readies.size() == ctx->expected_ready.size()) {
    cancel(ctx->ready_timer);
    if (!step(Role::Origin, "ready-collected", h)) return;
    return origin_commit(ctx);
  }
  arm_ready_timer(ctx);
  if (direct) origin_dispatch_next(ctx);
}

void Node::origin_on_subtx_error(const SubTxError& err) {
  auto it = origins_.find(wire::coordination_key(err.ref.tx_id, err.ref.originating));
  if (it == origins_.end()) return;
  auto ctx = it->second;
  if (ctx->finished || ctx->failing || !ctx->expected_ready.count(err.tx_hash)) return;
  origin_fail(ctx, "subtx:" + err.reason);
}

void Node::origin_commit(const std::shared_ptr<OriginCtx>& ctx) {
  Hash256 h = wire::tx_hash(*ctx->tx);
  std::vector<SignedMessage> evidence;
  for (const auto& [hash, r] : ctx->readies) evidence.push_back(r);
  threshold_sign(ThresholdMessage::commit(ctx->tx->ref()), ctx->tx, std::move(evidence),
                 [this, ctx, h](std::optional<Bytes> sig, std::string reason) {
                   if (ctx->finished || ctx->failing) return;
                   if (!sig) return origin_fail(ctx, "commit-unsigned:" + reason);
                   if (!step(Role::Origin, "pre-commit-submit", h)) return;
                   submit(SignedMessage{ThresholdMessage::commit(ctx->tx->ref()), *sig},
                          [this, ctx, h](bool ok, std::string error) {
                            if (ctx->finished || ctx->failing) return;
                            if (!ok) return origin_fail(ctx, "commit-rejected:" + error);
                            if (!step(Role::Origin, "post-commit-accepted", h)) return;
                            broadcast_check(*ctx->tx);
                            if (!step(Role::Origin, "check-broadcast", h)) return;
                            origin_report(ctx, "");
                          });
                   step(Role::Origin, "commit-submitted", h);
                 });
}

void Node::origin_fail(const std::shared_ptr<OriginCtx>& ctx, const std::string& reason) {
  if (ctx->finished || ctx->failing) return;
  Hash256 h = wire::tx_hash(*ctx->tx);
  note("fail", reason, h);
  cancel(ctx->ready_timer);
  if (!ctx->started) {
    origin_report(ctx, reason);
    return;
  }
  ctx->failing = true;
  auto finish = [this, ctx, reason]() {
    broadcast_check(*ctx->tx);
    origin_report(ctx, reason);
  };
  threshold_sign(ThresholdMessage::ignore(ctx->tx->ref()), ctx->tx, {},
                 [this, ctx, finish](std::optional<Bytes> sig, std::string why) {
                   if (ctx->finished) return;
                   if (!sig) {
                     note("ignore-unsigned", why, wire::tx_hash(*ctx->tx));
                     return finish();
                   }
                   submit(SignedMessage{ThresholdMessage::ignore(ctx->tx->ref()), *sig},
                          [this, ctx, finish](bool ok, std::string error) {
                            if (ctx->finished) return;
                            if (!ok) note("ignore-rejected", error, wire::tx_hash(*ctx->tx));
                            finish();
                          });
                 });
}

void Node::origin_report(const std::shared_ptr<OriginCtx>& ctx, const std::string& reason) {
  ctx->finished = true;
  auto out = std::make_shared<TxOutcome>();
  out->ref = ctx->tx->ref();
  out->reason = reason;
  // An entry created by someone else's Start (a reused id) says nothing about this attempt.
  const CoordinationNode* c = ctx->started ? coordination_for(out->ref) : nullptr;
  if (c != nullptr) {
    if (c->chain().find(ctx->key) != nullptr) {
      out->committed = c->chain().effective_status(ctx->key) == EffectiveStatus::Committed;
    }
  }
  if (out->committed) out->reason.clear();
  send(ctx->app, out);
}

// ---------------------------------------------------------------------------------------------
// Subordinate transaction coordinator

void Node::on_subtx_request(const SubTxRequest& req) {
  TxPtr tx = req.tx;
  NodeId origin = req.originating_coordinator;
  Hash256 h = wire::tx_hash(*tx);
  auto fail = [this, tx, origin, h](const std::string& reason) {
    note("fail", reason, h);
    auto e = std::make_shared<SubTxError>();
    e->ref = tx->ref();
    e->tx_hash = h;
    e->reason = reason;
    send(origin, e);
  };
  if (!step(Role::SubTx, "received", h)) return;
  std::optional<std::string> err;
  if (tx->type != TxType::SubordinateTx || !(tx->executing_sidechain() == chain_)) err = "invalid-transaction";
  if (!err) err = check_signature(*tx);
  if (!err) err = check_permission(*tx);
  if (!err) err = check_trust(tx->ref());
  if (!err) err = check_active(tx->ref());
  if (!err) err = check_lock_horizon(tx->ref());
  if (!err) err = check_public_keys(*tx);
  if (!err) err = check_coverage(*tx);
  if (err) return fail(*err);
  if (!step(Role::SubTx, "checks-passed", h)) return;

  gather_views(tx, [this, tx, origin, h, fail](bool ok, std::vector<SignedMessage> views, std::string reason) {
    if (!ok) return fail(reason);
    if (!step(Role::SubTx, "views-collected", h)) return;
    ledger::ExecutionOutcome out = execute(*tx, views);
    if (!out.ok()) return fail(abort_code(out));
    if (!step(Role::SubTx, "executed", h)) return;
    mine(tx, views, [this, tx, origin, h, fail](bool mined, std::string why) {
      if (!mined) return fail(why);
      if (!step(Role::SubTx, "mined", h)) return;
      ThresholdMessage ready = ThresholdMessage::subordinate_tx_ready(tx->ref(), chain_, h);
      threshold_sign(ready, tx, {}, [this, tx, origin, h, ready, fail](std::optional<Bytes> sig, std::string r) {
        if (!sig) return fail("ready-unsigned:" + r);
        if (!step(Role::SubTx, "ready-signed", h)) return;
        for (const auto& child : tx->subordinates) {
          if (child.type != TxType::SubordinateTx) continue;
          NodeId target = world_.coordinator_for(id_, child.executing_sidechain());
          auto sub = std::make_shared<SubTxRequest>();
          sub->tx = std::make_shared<const CrosschainTransaction>(child);
          sub->originating_coordinator = origin;
          send(target, sub);
        }
        if (!step(Role::SubTx, "children-dispatched", h)) return;
        auto msg = std::make_shared<SubTxReady>();
        msg->ready = SignedMessage{ready, *sig};
        send(origin, msg);
        step(Role::SubTx, "ready-sent", h);
      });
    });
  });
}

// ---------------------------------------------------------------------------------------------
// Subordinate view coordinator

void Node::on_view_request(const NodeId& from, const ViewRequest& req) {
  TxPtr view = req.view;
  std::uint64_t request = req.request;
  Hash256 h = wire::tx_hash(*view);
  auto fail = [this, from, request, h](const std::string& reason) {
    note("fail", reason, h);
    auto r = std::make_shared<ViewResponse>();
    r->request = request;
    r->reason = reason;
    send(from, r);
  };
  if (!step(Role::SubView, "received", h)) return;
  std::optional<std::string> err;
  if (!view->is_view() || !(view->executing_sidechain() == chain_)) err = "invalid-transaction";
  if (!err) err = check_signature(*view);
  if (!err) err = check_permission(*view);
  if (!err) err = check_trust(view->ref());
  if (!err) err = check_public_keys(*view);
  if (!err) err = check_coverage(*view);
  if (err) return fail(*err);
  if (!step(Role::SubView, "checks-passed", h)) return;

  gather_views(view, [this, view, from, request, h, fail](bool ok, std::vector<SignedMessage> nested,
                                                          std::string reason) {
    if (!ok) return fail(reason);
    ledger::ExecutionOutcome out = execute(*view, nested);
    if (!out.ok()) return fail(abort_code(out));
    if (!step(Role::SubView, "executed", h)) return;
    ThresholdMessage result =
        ThresholdMessage::subordinate_view_result(view->ref(), chain_, head(), h, std::move(out.output));
    threshold_sign(result, view, nested, [this, from, request, h, result, fail](std::optional<Bytes> sig,
                                                                               std::string why) {
      if (!sig) return fail("result-unsigned:" + why);
      if (!step(Role::SubView, "result-signed", h)) return;
      auto r = std::make_shared<ViewResponse>();
      r->request = request;
      r->ok = true;
      r->result = SignedMessage{result, *sig};
      send(from, r);
      step(Role::SubView, "result-sent", h);
    });
  });
}

}  // namespace xchain::protocol
