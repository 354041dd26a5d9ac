#include "xchain/ledger/ledger.hpp"

#include "xchain/crypto/keccak.hpp"
#include "xchain/wire/rlp.hpp"

namespace xchain::ledger {

using wire::RlpItem;

const char* to_string(LockedViewPolicy p) {
  switch (p) {
    case LockedViewPolicy::FailIfLocked: return "fail-if-locked";
    case LockedViewPolicy::AssumeIgnored: return "assume-ignored";
    case LockedViewPolicy::AssumeCommitted: return "assume-committed";
  }
  return "?";
}

std::optional<LockedViewPolicy> parse_locked_view_policy(std::string_view s) {
  for (auto p : {LockedViewPolicy::FailIfLocked, LockedViewPolicy::AssumeIgnored, LockedViewPolicy::AssumeCommitted}) {
    if (s == to_string(p)) return p;
  }
  return std::nullopt;
}

const char* to_string(Decision d) { return d == Decision::Commit ? "commit" : "ignore"; }

const char* to_string(AbortReason r) {
  switch (r) {
    case AbortReason::None: return "ok";
    case AbortReason::UnknownContract: return "unknown-contract";
    case AbortReason::LockContention: return "contract-locked";
    case AbortReason::NonlockableTarget: return "nonlockable-contract";
    case AbortReason::Mismatch: return "call-mismatch";
    case AbortReason::Revert: return "revert";
    case AbortReason::NonceMismatch: return "nonce-mismatch";
  }
  return "?";
}

// ---------------------------------------------------------------------------------------------
// Call matching

CallFrame::CallFrame(std::vector<SubordinateCall> expected, std::map<std::size_t, Bytes> view_results)
    : expected_(std::move(expected)), view_results_(std::move(view_results)) {}

SubordinateCall call_of(const wire::CrosschainTransaction& sub) {
  return {sub.is_view(), sub.executing_sidechain(), sub.to, sub.value, sub.data};
}

CallFrame CallFrame::from_tree(const wire::CrosschainTransaction& tx, std::map<std::size_t, Bytes> view_results) {
  std::vector<SubordinateCall> expected;
  for (const auto& s : tx.subordinates) expected.push_back(call_of(s));
  return CallFrame(std::move(expected), std::move(view_results));
}

void CallFrame::match(const SubordinateCall& call) {
  if (cursor_ >= expected_.size()) throw CallMismatch("crosschain call not present in the signed transaction");
  const auto& want = expected_[cursor_];
  if (want.is_view != call.is_view) throw CallMismatch("call kind differs from signed entry " + std::to_string(cursor_));
  if (!(want.sidechain == call.sidechain)) throw CallMismatch("sidechain differs from signed entry " + std::to_string(cursor_));
  if (want.to != call.to) throw CallMismatch("target differs from signed entry " + std::to_string(cursor_));
  if (want.value != call.value) throw CallMismatch("value differs from signed entry " + std::to_string(cursor_));
  if (want.data != call.data) throw CallMismatch("call data differs from signed entry " + std::to_string(cursor_));
}

Bytes CallFrame::view(const SubordinateCall& call) {
  match(call);
  auto it = view_results_.find(cursor_);
  if (it == view_results_.end()) throw CallMismatch("no result for view " + std::to_string(cursor_));
  ++cursor_;
  return it->second;
}

void CallFrame::transaction(const SubordinateCall& call) {
  match(call);
  ++cursor_;
}

// ---------------------------------------------------------------------------------------------
// Host

namespace {

class ExecHost : public Host {
 public:
  ExecHost(const Contract& c, const wire::SidechainId& chain, const Address& caller, const U256& value, bool read_only,
           const ProvisionalOverlay* visible, CrosschainCalls* calls)
      : c_(c), chain_(chain), caller_(caller), value_(value), read_only_(read_only), visible_(visible), calls_(calls) {
    out_.balance_delta = static_cast<I256>(value);
  }

  U256 sload(const U256& key) override {
    if (auto it = out_.storage_delta.find(key); it != out_.storage_delta.end()) return it->second;
    if (visible_ != nullptr) {
      if (auto it = visible_->storage_delta.find(key); it != visible_->storage_delta.end()) return it->second;
    }
    auto it = c_.storage.find(key);
    return it == c_.storage.end() ? U256(0) : it->second;
  }

  void sstore(const U256& key, const U256& value) override {
    if (read_only_) throw Revert("storage write in a view");
    out_.storage_delta[key] = value;
  }

  U256 self_balance() override {
    I256 b = static_cast<I256>(c_.balance) + out_.balance_delta;
    if (visible_ != nullptr) b += visible_->balance_delta;
    return b < 0 ? U256(0) : static_cast<U256>(b);
  }

  void transfer(const Address& to, const U256& amount) override {
    if (read_only_) throw Revert("value transfer in a view");
    if (amount > self_balance()) throw Revert("insufficient contract balance");
    out_.balance_delta -= static_cast<I256>(amount);
    out_.payouts.push_back({to, amount});
  }

  Address self() const override { return c_.address; }
  Address caller() const override { return caller_; }
  U256 call_value() const override { return value_; }
  wire::SidechainId sidechain() const override { return chain_; }

  Bytes call_subordinate_view(const wire::SidechainId& sidechain, const Address& to, ByteView data) override {
    SubordinateCall call{true, sidechain, to, 0, Bytes(data.begin(), data.end())};
    if (calls_ == nullptr) throw Revert("crosschain view outside a crosschain context");
    emitted_.push_back(call);
    return calls_->view(call);
  }

  void emit_subordinate_tx(const wire::SidechainId& sidechain, const Address& to, ByteView data,
                           const U256& value) override {
    if (read_only_) throw Revert("subordinate transaction from a view");
    SubordinateCall call{false, sidechain, to, value, Bytes(data.begin(), data.end())};
    if (calls_ == nullptr) throw Revert("subordinate transaction outside a crosschain context");
    emitted_.push_back(call);
    calls_->transaction(call);
  }

  ProvisionalOverlay take_overlay() { return std::move(out_); }
  std::vector<SubordinateCall> take_emitted() { return std::move(emitted_); }

 private:
  const Contract& c_;
  wire::SidechainId chain_;
  Address caller_;
  U256 value_;
  bool read_only_;
  const ProvisionalOverlay* visible_;
  CrosschainCalls* calls_;
  ProvisionalOverlay out_;
  std::vector<SubordinateCall> emitted_;
};

ExecutionOutcome aborted(AbortReason r, std::string detail) {
  ExecutionOutcome o;
  o.reason = r;
  o.detail = std::move(detail);
  return o;
}

void credit(U256& balance, const I256& delta) {
  I256 b = static_cast<I256>(balance) + delta;
  if (b < 0) throw std::logic_error("balance underflow");
  balance = static_cast<U256>(b);
}

}  // namespace

// ---------------------------------------------------------------------------------------------
// Ledger

Ledger::Ledger(wire::SidechainId id, const HandlerRegistry* registry) : id_(std::move(id)), registry_(registry) {}

Address Ledger::deploy(const Address& deployer, const std::string& handler_id, bool lockable, Storage storage,
                       const U256& balance) {
  if (registry_ == nullptr || registry_->find(handler_id) == nullptr) {
    throw LedgerError(LedgerError::Code::UnknownHandler, "unknown handler: " + handler_id);
  }
  Account& acct = accounts_[deployer];
  Bytes enc = wire::rlp_encode(
      RlpItem::list({RlpItem::string(Bytes(deployer.data.begin(), deployer.data.end())), RlpItem::uint(acct.nonce)}));
  Hash256 h = crypto::keccak256(enc);
  Address addr = Address::from_view(h.view().subspan(12));
  acct.nonce += 1;

  Contract c;
  c.address = addr;
  c.handler_id = handler_id;
  c.lockable = lockable;
  for (auto& [k, v] : storage) {
    if (v != 0) c.storage[k] = v;
  }
  c.balance = balance;
  contracts_[addr] = std::move(c);
  return addr;
}

void Ledger::fund(const Address& account, const U256& amount) { accounts_[account].balance += amount; }

const Contract* Ledger::contract(const Address& a) const {
  auto it = contracts_.find(a);
  return it == contracts_.end() ? nullptr : &it->second;
}

Contract& Ledger::mutable_contract(const Address& a) {
  auto it = contracts_.find(a);
  if (it == contracts_.end()) throw LedgerError(LedgerError::Code::UnknownContract, "no contract at " + a.hex());
  return it->second;
}

Account Ledger::account(const Address& a) const {
  auto it = accounts_.find(a);
  return it == accounts_.end() ? Account{} : it->second;
}

ExecutionOutcome Ledger::run(const Contract& c, const Address& caller, const U256& value, ByteView data,
                             bool read_only, const ProvisionalOverlay* visible, CrosschainCalls* calls) const {
  const HandlerDef* def = registry_->find(c.handler_id);
  if (def == nullptr) return aborted(AbortReason::Revert, "handler not registered: " + c.handler_id);
  ExecHost host(c, id_, caller, value, read_only, visible, calls);
  ExecutionOutcome out;
  try {
    auto [sel, args] = decode_call(data);
    const Function* fn = def->find(sel);
    if (fn == nullptr) throw Revert("unknown function selector " + to_hex(ByteView(sel.data(), 4)));
    out.output = fn->body(host, args);
  } catch (const CallMismatch& e) {
    return aborted(AbortReason::Mismatch, e.what());
  } catch (const Revert& e) {
    return aborted(AbortReason::Revert, e.what());
  }
  out.overlay = host.take_overlay();
  out.emitted = host.take_emitted();
  return out;
}

ExecutionOutcome Ledger::execute_local(const wire::CrosschainTransaction& tx, const Address& signer,
                                       CallFrame& frame) const {
  const Contract* c = contract(tx.to);
  if (c == nullptr) return aborted(AbortReason::UnknownContract, "no contract at " + tx.to.hex());
  ExecutionOutcome out;
  if (tx.is_view()) {
    if (c->locked()) return aborted(AbortReason::LockContention, "viewed contract is locked");
    out = run(*c, signer, 0, tx.data, true, nullptr, &frame);
  } else {
    if (!c->lockable) return aborted(AbortReason::NonlockableTarget, "crosschain transaction cannot lock contract");
    if (c->locked()) return aborted(AbortReason::LockContention, "target contract is locked");
    Account acct = account(signer);
    if (tx.nonce != acct.nonce) {
      return aborted(AbortReason::NonceMismatch,
                     "expected nonce " + acct.nonce.str() + ", transaction has " + tx.nonce.str());
    }
    if (acct.balance < tx.value) return aborted(AbortReason::Revert, "sender cannot cover transaction value");
    out = run(*c, signer, tx.value, tx.data, false, nullptr, &frame);
  }
  if (out.ok() && !frame.complete()) {
    return aborted(AbortReason::Mismatch, "signed crosschain call " + std::to_string(frame.cursor()) + " not made");
  }
  return out;
}

ExecutionOutcome Ledger::simulate(const Address& to, const Address& caller, const U256& value, ByteView data,
                                  bool is_view, CrosschainCalls* calls) const {
  const Contract* c = contract(to);
  if (c == nullptr) return aborted(AbortReason::UnknownContract, "no contract at " + to.hex());
  return run(*c, caller, is_view ? U256(0) : value, data, is_view, nullptr, calls);
}

void Ledger::apply_mined(const wire::CrosschainTransaction& tx, const Address& signer,
                         const ExecutionOutcome& outcome, const LockHolder& holder) {
  if (!outcome.ok()) throw std::logic_error("cannot mine a failed execution");
  Contract& c = mutable_contract(tx.to);
  if (!c.lockable) throw LedgerError(LedgerError::Code::NotLockable, "contract is not lockable");
  if (c.locked()) throw LedgerError(LedgerError::Code::AlreadyLocked, "contract already locked");
  Account& acct = accounts_[signer];
  if (acct.balance < tx.value) throw LedgerError(LedgerError::Code::Revert, "sender cannot cover transaction value");
  acct.nonce += 1;
  acct.balance -= tx.value;
  lock(tx.to, holder, outcome.overlay);
  c.lock.depositor = signer;
  c.lock.escrow = tx.value;
}

void Ledger::lock(const Address& a, const LockHolder& holder, ProvisionalOverlay overlay) {
  Contract& c = mutable_contract(a);
  if (!c.lockable) throw LedgerError(LedgerError::Code::NotLockable, "contract is not lockable");
  if (c.locked()) throw LedgerError(LedgerError::Code::AlreadyLocked, "contract already locked");
  c.lock.status = LockStatus::Locked;
  c.lock.holder = holder;
  c.lock.provisional = std::move(overlay);
  c.lock.depositor = Address{};
  c.lock.escrow = 0;
}

void Ledger::apply_overlay(Contract& c, const ProvisionalOverlay& overlay) {
  for (const auto& [k, v] : overlay.storage_delta) {
    if (v == 0) {
      c.storage.erase(k);
    } else {
      c.storage[k] = v;
    }
  }
  credit(c.balance, overlay.balance_delta);
  for (const auto& p : overlay.payouts) {
    if (auto it = contracts_.find(p.to); it != contracts_.end()) {
      it->second.balance += p.amount;
    } else {
      accounts_[p.to].balance += p.amount;
    }
  }
}

void Ledger::finalize(const Address& a, Decision decision) {
  Contract& c = mutable_contract(a);
  if (!c.locked()) throw LedgerError(LedgerError::Code::NotLocked, "contract is not locked");
  LockState state = std::move(c.lock);
  c.lock = LockState{};
  if (decision == Decision::Commit) {
    apply_overlay(c, state.provisional);
  } else if (state.escrow != 0) {
    accounts_[state.depositor].balance += state.escrow;
  }
}

std::vector<Address> Ledger::locked_by(const Hash256& key) const {
  std::vector<Address> out;
  for (const auto& [addr, c] : contracts_) {
    if (c.locked() && c.lock.holder->coordination_key == key) out.push_back(addr);
  }
  return out;
}

std::vector<Address> Ledger::finalize_holder(const Hash256& key, Decision decision) {
  std::vector<Address> addrs = locked_by(key);
  for (const auto& a : addrs) finalize(a, decision);
  return addrs;
}

Bytes Ledger::read_view(const Address& a, ByteView data, LockedViewPolicy policy, const Address& caller,
                        CrosschainCalls* calls) const {
  const Contract* c = contract(a);
  if (c == nullptr) throw LedgerError(LedgerError::Code::UnknownContract, "no contract at " + a.hex());
  const ProvisionalOverlay* visible = nullptr;
  if (c->locked()) {
    if (policy == LockedViewPolicy::FailIfLocked) {
      throw LedgerError(LedgerError::Code::Locked, "viewed contract is locked");
    }
    if (policy == LockedViewPolicy::AssumeCommitted) visible = &c->lock.provisional;
  }
  ExecutionOutcome out = run(*c, caller, 0, data, true, visible, calls);
  if (!out.ok()) throw LedgerError(LedgerError::Code::Revert, out.detail);
  return out.output;
}

ExecutionOutcome Ledger::execute_ordinary(const Address& signer, const U256& nonce, const Address& to,
                                          const U256& value, ByteView data) {
  Account acct = account(signer);
  if (nonce != acct.nonce) {
    return aborted(AbortReason::NonceMismatch, "expected nonce " + acct.nonce.str() + ", transaction has " + nonce.str());
  }
  if (acct.balance < value) return aborted(AbortReason::Revert, "sender cannot cover transaction value");
  const Contract* c = contract(to);
  ExecutionOutcome out;
  if (c != nullptr) {
    if (c->locked()) return aborted(AbortReason::LockContention, "target contract is locked");
    out = run(*c, signer, value, data, false, nullptr, nullptr);
    if (!out.ok()) return out;
  } else if (!data.empty()) {
    return aborted(AbortReason::UnknownContract, "no contract at " + to.hex());
  }
  Account& a = accounts_[signer];
  a.nonce += 1;
  a.balance -= value;
  if (c != nullptr) {
    apply_overlay(mutable_contract(to), out.overlay);
  } else {
    accounts_[to].balance += value;
  }
  return out;
}

U256 Ledger::total_value() const {
  U256 sum = 0;
  for (const auto& [_, a] : accounts_) sum += a.balance;
  for (const auto& [_, c] : contracts_) sum += c.balance + c.lock.escrow;
  return sum;
}

namespace {

RlpItem storage_item(const Storage& s) {
  std::vector<RlpItem> items;
  for (const auto& [k, v] : s) items.push_back(RlpItem::list({RlpItem::uint(k), RlpItem::uint(v)}));
  return RlpItem::list(std::move(items));
}

RlpItem address_item(const Address& a) { return RlpItem::string(Bytes(a.data.begin(), a.data.end())); }

}  // namespace

Hash256 Ledger::state_digest() const {
  std::vector<RlpItem> cs;
  for (const auto& [addr, c] : contracts_) {
    std::vector<RlpItem> f{address_item(addr), RlpItem::string(to_bytes(c.handler_id)),
                           RlpItem::uint(c.lockable ? 1 : 0), storage_item(c.storage), RlpItem::uint(c.balance)};
    if (c.locked()) {
      const auto& p = c.lock.provisional;
      f.push_back(RlpItem::string(Bytes(c.lock.holder->coordination_key.data.begin(),
                                        c.lock.holder->coordination_key.data.end())));
      f.push_back(storage_item(p.storage_delta));
      f.push_back(RlpItem::uint(p.balance_delta < 0 ? U256(-p.balance_delta) : U256(p.balance_delta)));
      f.push_back(RlpItem::uint(p.balance_delta < 0 ? 1 : 0));
      std::vector<RlpItem> pays;
      for (const auto& pay : p.payouts) pays.push_back(RlpItem::list({address_item(pay.to), RlpItem::uint(pay.amount)}));
      f.push_back(RlpItem::list(std::move(pays)));
      f.push_back(address_item(c.lock.depositor));
      f.push_back(RlpItem::uint(c.lock.escrow));
    }
    cs.push_back(RlpItem::list(std::move(f)));
  }
  std::vector<RlpItem> as;
  for (const auto& [addr, a] : accounts_) {
    as.push_back(RlpItem::list({address_item(addr), RlpItem::uint(a.balance), RlpItem::uint(a.nonce)}));
  }
  return crypto::keccak256(wire::rlp_encode(RlpItem::list({RlpItem::list(std::move(cs)), RlpItem::list(std::move(as))})));
}

std::string Ledger::dump_storage(const Address& a) const {
  const Contract* c = contract(a);
  if (c == nullptr) return {};
  std::string out;
  for (const auto& [k, v] : c->storage) {
    if (!out.empty()) out += ' ';
    out += u256_to_hex(k) + "=" + u256_to_hex(v);
  }
  return out;
}

void Ledger::poke_storage(const Address& a, const U256& key, const U256& value) {
  Contract& c = mutable_contract(a);
  if (c.locked()) throw LedgerError(LedgerError::Code::Locked, "cannot poke a locked contract");
  if (value == 0) {
    c.storage.erase(key);
  } else {
    c.storage[key] = value;
  }
}

}  // namespace xchain::ledger
