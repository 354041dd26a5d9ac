#include <algorithm>
#include <cstdlib>
#include <sstream>

#include "xchain/crypto/keccak.hpp"
#include "xchain/ledger/builtins.hpp"
#include "xchain/protocol/node.hpp"
#include "xchain/scenario/scenario.hpp"

namespace xchain::scenario {

using protocol::NodeId;

namespace {

const NodeId kScenarioNode = "scenario";

bool is_number(const std::string& s) {
  if (s.empty()) return false;
  if (s.rfind("0x", 0) == 0 || s.rfind("0X", 0) == 0) {
    return s.size() > 2 && std::all_of(s.begin() + 2, s.end(), [](char c) { return std::isxdigit(c) != 0; });
  }
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(c) != 0; });
}

bool is_address_literal(const std::string& s) { return s.size() == 42 && s.rfind("0x", 0) == 0 && is_number(s); }

wire::SidechainId parse_chain_id(const std::string& text, std::uint64_t fallback_private) {
  if (text.empty()) return wire::SidechainId::private_sidechain(fallback_private);
  if (text.rfind("private:", 0) == 0) {
    std::string k = text.substr(8);
    if (!is_number(k)) throw ScenarioError("bad private sidechain id '" + text + "'");
    return wire::SidechainId::private_sidechain(static_cast<std::uint64_t>(parse_u256(k)));
  }
  if (!is_number(text)) throw ScenarioError("bad sidechain id '" + text + "'");
  return wire::SidechainId{parse_u256(text)};
}

Address default_coordination_address(const std::string& name) {
  Hash256 h = crypto::keccak256(to_bytes("coordination:" + name));
  Address a;
  std::copy(h.data.end() - 20, h.data.end(), a.data.begin());
  return a;
}

Address default_deployer() {
  Address a;
  a.data.fill(0xDE);
  return a;
}

std::string str(const U256& v) { return v.str(); }

bool node_matches(const std::string& filter, const std::string& node) {
  if (filter.empty() || filter == node) return true;
  return node.rfind(filter + "/", 0) == 0;
}

}  // namespace

std::uint64_t effective_seed(const Scenario& s, const RunOptions& opt) {
  if (opt.seed) return *opt.seed;
  if (s.seed) return *s.seed;
  if (const char* env = std::getenv("XCHAIN_SIM_SEED"); env != nullptr && is_number(env)) {
    return static_cast<std::uint64_t>(parse_u256(env));
  }
  return 0;
}

Instance::Instance(const Scenario& scenario, const RunOptions& options)
    : scenario_(scenario), options_(options), seed_(effective_seed(scenario, options)) {
  build();
  schedule_actions();
}

Instance::~Instance() = default;

void Instance::build() {
  const Scenario& s = scenario_;
  protocol::WorldConfig cfg;
  cfg.sim.seed = seed_;
  cfg.sim.jitter = s.jitter;
  if (s.max_ticks) cfg.sim.max_ticks = *s.max_ticks;
  if (options_.max_ticks) cfg.sim.max_ticks = *options_.max_ticks;
  cfg.scheme = options_.scheme.value_or(s.scheme);
  cfg.timing = s.timing;
  cfg.view_policy = options_.locked_view_policy.value_or(s.locked_view_policy);
  world_ = std::make_unique<protocol::World>(cfg);

  for (std::size_t i = 0; i < s.accounts.size(); ++i) {
    accounts_.emplace(s.accounts[i].name, crypto::secp256k1::AccountKey::from_seed(s.accounts[i].seed));
  }

  for (std::size_t i = 0; i < s.coordination.size(); ++i) {
    const auto& c = s.coordination[i];
    coord::CoordinationConfig cc;
    cc.chain_id = parse_chain_id(c.id, 100 + i);
    cc.contract_address = c.contract.empty() ? default_coordination_address(c.name) : Address::from_hex(c.contract);
    cc.max_timeout_blocks = c.max_timeout_blocks;
    cc.grace_window = c.grace_window;
    world_->add_coordination_chain(c.name, cc, c.block_interval);
    coordination_[c.name] = {cc.chain_id, cc.contract_address};
  }

  for (std::size_t i = 0; i < s.sidechains.size(); ++i) {
    sidechains_[s.sidechains[i].name] = parse_chain_id(s.sidechains[i].id, i + 1);
  }

  auto to_policy = [&](const PolicySpec& p) {
    protocol::ValidatorPolicy v;
    auto addresses = [&](const std::vector<std::string>& names) {
      std::set<Address> out;
      for (const auto& n : names) out.insert(address(Value{n}));
      return out;
    };
    if (p.tx_allowed) v.tx_allowed = addresses(*p.tx_allowed);
    if (p.view_allowed) v.view_allowed = addresses(*p.view_allowed);
    if (p.trusted) {
      std::set<protocol::CoordRef> t;
      for (const auto& n : *p.trusted) t.insert(coordination_.at(n));
      v.trusted = t;
    }
    if (p.max_lock_horizon) v.max_lock_horizon = *p.max_lock_horizon;
    if (p.freshness_window) v.freshness_window = *p.freshness_window;
    if (p.clock_skew) v.clock_skew = *p.clock_skew;
    v.dissent_views = p.dissent_views;
    if (!p.spam_accounts.empty()) {
      std::set<Address> spam = addresses(p.spam_accounts);
      protocol::World* w = world_.get();
      v.refuse_start = [w, spam](const wire::CrosschainTransaction& tx) {
        auto signer = w->signer_of(tx);
        return signer && spam.count(*signer) != 0;
      };
    }
    return v;
  };

  for (std::size_t i = 0; i < s.sidechains.size(); ++i) {
    const auto& d = s.sidechains[i];
    protocol::SidechainSpec spec;
    spec.name = d.name;
    spec.id = sidechains_.at(d.name);
    spec.n = d.validators;
    spec.f = d.f;
    spec.m = d.m;
    spec.block_interval = d.block_interval;
    spec.policy = to_policy(d.policy);
    for (const auto& [idx, p] : d.overrides) {
      if (idx == 0 || idx > d.validators) throw ScenarioError(d.name + ": validator policy index out of range");
      spec.overrides[idx] = to_policy(p);
    }
    spec.keygen.seed = d.keygen_seed.value_or(seed_ * 1000 + i + 1);
    spec.keygen.dkg = d.dkg;
    spec.keygen.corrupt_dealers = {d.corrupt_dealers.begin(), d.corrupt_dealers.end()};
    try {
      world_->add_sidechain(std::move(spec));
    } catch (const std::invalid_argument& e) {
      throw ScenarioError(d.name + ": " + e.what());
    }
  }

  for (const auto& m : s.multichains) {
    std::map<wire::SidechainId, std::uint32_t> members;
    for (const auto& [chain, idx] : m.members) members[sidechain(chain)] = idx;
    try {
      world_->add_multichain(m.name, members);
    } catch (const std::invalid_argument& e) {
      throw ScenarioError("multichain " + m.name + ": " + e.what());
    }
  }
  world_->bootstrap_keys();

  // Deploy everything first so storage may reference any contract, then fill storage.
  for (const auto& c : s.contracts) {
    if (world_->registry().find(c.handler) == nullptr) throw ScenarioError("contract " + c.name + ": unknown handler " + c.handler);
    Address deployer = c.deployer.empty() ? default_deployer() : account(c.deployer).address();
    contracts_[c.name] = world_->deploy(sidechain(c.sidechain), deployer, c.handler, c.lockable, {}, word(c.balance));
    contract_handlers_[c.name] = c.handler;
  }
  for (const auto& c : s.contracts) {
    wire::SidechainId chain = sidechain(c.sidechain);
    ledger::Storage storage;
    for (const auto& [slot, v] : c.storage) storage[slot_key(c.handler, slot)] = word(v);
    if (!c.calls.empty()) {
      std::vector<ledger::SubordinateCall> calls;
      for (const auto& f : c.calls) {
        ledger::SubordinateCall call;
        call.is_view = f.view;
        call.sidechain = sidechain(f.sidechain);
        call.to = address(f.to);
        call.value = word(f.value);
        ledger::Args args;
        for (const auto& a : f.args) args.push_back(arg(a));
        call.data = ledger::encode_call(f.function, args);
        calls.push_back(std::move(call));
      }
      for (const auto& [k, v] : ledger::builtins::forwarder::describe(calls)) storage[k] = v;
    }
    for (const auto& [k, v] : storage) world_->poke_storage(chain, contracts_.at(c.name), k, v);
  }

  for (const auto& f : s.funding) world_->fund(sidechain(f.sidechain), account(f.account).address(), word(f.amount));

  for (const auto& [name, id] : sidechains_) {
    initial_value_[id] = world_->node(world_->sidechain(id)->nodes.front()).ledger().total_value();
  }

  std::vector<sim::FaultSpec> faults = s.faults;
  faults.insert(faults.end(), options_.extra_faults.begin(), options_.extra_faults.end());
  for (auto& f : faults) {
    try {
      world_->sim().inject(f);
    } catch (const std::invalid_argument& e) {
      throw ScenarioError("fault " + f.describe() + ": " + e.what());
    }
  }
  world_->start();
}

void Instance::schedule_actions() {
  for (const auto& a : scenario_.actions) {
    world_->sim().schedule(a.at, [this, &a]() { run_action(a); });
  }
}

protocol::EntryCall Instance::entry_of(const CallDecl& c) const {
  protocol::EntryCall e;
  e.sidechain = sidechain(c.sidechain);
  e.to = address(c.contract);
  ledger::Args args;
  for (const auto& a : c.args) args.push_back(arg(a));
  e.data = ledger::encode_call(c.function, args);
  e.value = word(c.value);
  return e;
}

void Instance::run_action(const ActionDecl& a) {
  auto& sim = world_->sim();
  std::string when = " at tick " + std::to_string(sim.now());
  switch (a.kind) {
    case ActionKind::Submit: {
      const std::string& coord = a.coordination.empty() ? scenario_.coordination.front().name : a.coordination;
      protocol::SubmitIntent in{.name = a.name,
                                .multichain = a.multichain,
                                .account = account(a.account),
                                .entry = entry_of(a.call),
                                .timeout_blocks = a.timeout_blocks,
                                .coordination = coordination_.at(coord),
                                .tx_id = std::nullopt,
                                .edit_tree = {},
                                .before_submit = {}};
      if (a.tx_id) in.tx_id = word(*a.tx_id);
      in.max_rounds = a.rounds;
      in.retry_backoff = a.retry_backoff;
      in.retry_jitter = a.retry_jitter;
      if (!a.before_submit.empty()) {
        in.before_submit = [this, &a]() {
          for (const auto& p : a.before_submit) apply_poke(p);
        };
      }
      sim.record(kScenarioNode, "submit", a.name);
      world_->schedule_submit(std::move(in), sim.now());
      return;
    }
    case ActionKind::View: {
      AssertionResult r;
      r.description = "view " + a.name + when;
      std::optional<ledger::LockedViewPolicy> policy;
      if (a.locked_view_policy) policy = ledger::parse_locked_view_policy(*a.locked_view_policy);
      std::string got;
      Bytes result;
      bool ok = true;
      try {
        result = world_->crosschain_view(a.multichain, entry_of(a.call), account(a.account).address(), policy);
        got = str(ledger::decode_word(result));
      } catch (const protocol::BuildError& e) {
        ok = false;
        got = "error:" + e.code();
      }
      sim.record(kScenarioNode, "view", a.name + "=" + got);
      if (ok && !a.bind.empty()) bindings_[a.bind] = result;
      if (!a.expect) return;
      const std::string& want = a.expect->text;
      if (want == "error") {
        r.passed = !ok;
      } else if (want.rfind("error:", 0) == 0) {
        r.passed = got == want;
      } else {
        r.passed = ok && ledger::decode_word(result) == word(*a.expect);
      }
      r.detail = "expected " + want + ", got " + got;
      action_checks_.push_back(r);
      return;
    }
    case ActionKind::Ordinary: {
      auto e = entry_of(a.call);
      auto out = world_->ordinary_tx(e.sidechain, account(a.account).address(), e.to, e.value, e.data);
      std::string got = ledger::to_string(out.reason);
      if (!a.expect) return;
      AssertionResult r;
      r.description = "ordinary " + a.name + when;
      r.passed = got == a.expect->text;
      r.detail = "expected " + a.expect->text + ", got " + got;
      action_checks_.push_back(r);
      return;
    }
    case ActionKind::ReplayStart: {
      AssertionResult r;
      r.description = "replayed Start of " + a.of + when + " is rejected";
      auto ref = tx_ref(a.of);
      protocol::CoordinationNode* cn = ref ? world_->coordination(ref->coordination_chain) : nullptr;
      const protocol::SignedMessage* start = nullptr;
      if (cn != nullptr) {
        for (const auto& m : cn->accepted()) {
          if (m.msg.kind == wire::MessageKind::Start && m.msg.tx_id == ref->tx_id &&
              m.msg.originating_sidechain == ref->originating) {
            start = &m;
          }
        }
      }
      if (start == nullptr) {
        r.detail = "no accepted Start to replay";
      } else {
        protocol::SignedMessage copy = *start;
        auto code = cn->apply(copy);
        r.passed = code && *code == "replay";
        r.detail = code ? "rejected with " + *code : "accepted";
      }
      action_checks_.push_back(r);
      return;
    }
    case ActionKind::Poke: {
      apply_poke(a.poke);
      sim.record(kScenarioNode, "poke", a.poke.contract.text + "." + a.poke.slot);
      return;
    }
  }
}

void Instance::apply_poke(const PokeDecl& p) {
  const std::string& t = p.contract.text;
  auto h = contract_handlers_.find(t.substr(!t.empty() && t[0] == '$'));
  std::string handler = h == contract_handlers_.end() ? std::string() : h->second;
  world_->poke_storage(sidechain(p.sidechain), address(p.contract), slot_key(handler, p.slot), word(p.value));
}

sim::RunResult Instance::run() { return world_->sim().run(); }

Address Instance::contract(const std::string& name) const {
  auto it = contracts_.find(name);
  if (it == contracts_.end()) throw ScenarioError("unknown contract " + name);
  return it->second;
}

wire::SidechainId Instance::sidechain(const std::string& name) const {
  auto it = sidechains_.find(name.substr(!name.empty() && name[0] == '$'));
  if (it == sidechains_.end()) throw ScenarioError("unknown sidechain " + name);
  return it->second;
}

const crypto::secp256k1::AccountKey& Instance::account(const std::string& name) const {
  auto it = accounts_.find(name);
  if (it == accounts_.end()) throw ScenarioError("unknown account " + name);
  return it->second;
}

std::optional<wire::TxRef> Instance::tx_ref(const std::string& submission, std::uint32_t round) const {
  auto refs = world_->submitted(submission);
  if (refs.empty()) return std::nullopt;
  if (round == 0) return refs.back();
  if (round > refs.size()) return std::nullopt;
  return refs[round - 1];
}

U256 Instance::word(const Value& v) const {
  const std::string& t = v.text;
  if (is_number(t)) return parse_u256(t);
  std::string name = t.substr(!t.empty() && t[0] == '$');
  if (auto c = contracts_.find(name); c != contracts_.end()) return ledger::address_to_word(c->second);
  if (auto a = accounts_.find(name); a != accounts_.end()) return ledger::address_to_word(a->second.address());
  if (auto s = sidechains_.find(name); s != sidechains_.end()) return s->second.value;
  if (auto b = bindings_.find(name); b != bindings_.end()) return ledger::decode_word(b->second);
  if (t == "true") return 1;
  if (t == "false") return 0;
  throw ScenarioError("cannot resolve value '" + t + "'");
}

Address Instance::address(const Value& v) const {
  const std::string& t = v.text;
  if (is_address_literal(t)) return Address::from_hex(t);
  std::string name = t.substr(!t.empty() && t[0] == '$');
  if (auto c = contracts_.find(name); c != contracts_.end()) return c->second;
  if (auto a = accounts_.find(name); a != accounts_.end()) return a->second.address();
  if (auto b = bindings_.find(name); b != bindings_.end()) return ledger::word_to_address(ledger::decode_word(b->second));
  throw ScenarioError("cannot resolve address '" + t + "'");
}

Bytes Instance::arg(const Value& v) const {
  const std::string& t = v.text;
  if (is_address_literal(t)) return ledger::encode_address(Address::from_hex(t));
  if (is_number(t)) return ledger::encode_word(parse_u256(t));
  std::string name = t.substr(!t.empty() && t[0] == '$');
  if (contracts_.count(name) || accounts_.count(name)) return ledger::encode_address(address(v));
  if (auto b = bindings_.find(name); b != bindings_.end()) return b->second;
  return ledger::encode_word(word(v));
}

U256 Instance::slot_key(const std::string& handler, const std::string& slot) const {
  if (is_number(slot)) return parse_u256(slot);
  if (auto k = ledger::builtins::slot_by_name(handler, slot)) return *k;
  throw ScenarioError("handler " + (handler.empty() ? std::string("?") : handler) + " has no slot named '" + slot + "'");
}

std::string Instance::coordination_state(const wire::TxRef& ref) const {
  const auto* cn = world_->coordination(ref.coordination_chain);
  if (cn == nullptr) return "absent";
  Hash256 key = wire::coordination_key(ref.tx_id, ref.originating);
  if (cn->chain().find(key) == nullptr) return "absent";
  return coord::to_string(cn->chain().effective_status(key));
}

AssertionResult Instance::atomicity(const std::vector<wire::TxRef>& refs) const {
  AssertionResult r;
  r.description = "atomicity across contracts";
  std::ostringstream problems;
  const auto& sim = world_->sim();
  for (const auto& ref : refs) {
    Hash256 key = wire::coordination_key(ref.tx_id, ref.originating);
    std::string state = coordination_state(ref);
    std::string tag = "tx " + str(ref.tx_id) + " (" + state + ")";
    std::set<std::pair<NodeId, Address>> committed, ignored;
    for (const auto& f : world_->finalizations()) {
      if (!(f.key == key)) continue;
      (f.decision == ledger::Decision::Commit ? committed : ignored).insert({f.node, f.contract});
    }
    if (!committed.empty() && !ignored.empty()) problems << tag << ": both commit and ignore finalizations; ";
    if (state == "Started") {
      bool locks = false;
      for (const auto& l : world_->locks()) locks = locks || (l.key == key && sim.alive(l.node));
      if (locks) problems << tag << ": unresolved at end of run; ";
    }
    if (state == "Committed") {
      for (const auto& l : world_->locks()) {
        if (l.key == key && sim.alive(l.node) && !committed.count({l.node, l.contract})) {
          problems << tag << ": " << l.node << " did not commit " << l.contract.hex() << "; ";
        }
      }
    } else if (!committed.empty()) {
      problems << tag << ": " << committed.size() << " commit finalizations without a commit; ";
    }
    for (const auto* n : world_->all_nodes()) {
      if (!sim.alive(n->id())) continue;
      if (!n->ledger().locked_by(key).empty()) problems << tag << ": " << n->id() << " still holds a lock; ";
    }
  }
  r.detail = problems.str();
  r.passed = r.detail.empty();
  if (r.passed) r.detail = std::to_string(refs.size()) + " transaction(s) consistent";
  return r;
}

std::vector<AssertionResult> Instance::evaluate(const std::vector<AssertionDecl>& assertions) const {
  std::vector<AssertionResult> out;
  const auto& sim = world_->sim();
  for (const auto& a : assertions) {
    AssertionResult r;
    std::ostringstream d;
    switch (a.kind) {
      case AssertionKind::StorageEquals: {
        wire::SidechainId chain = sidechain(a.sidechain);
        U256 want = word(a.value);
        std::string what = a.account.empty() ? a.contract + (a.balance ? ".balance" : "." + a.slot)
                                             : a.account + ".balance";
        r.description = "StorageEquals " + a.sidechain + " " + what + " == " + str(want);
        r.passed = true;
        std::size_t checked = 0;
        for (const auto& id : world_->sidechain(chain)->nodes) {
          if (!sim.alive(id)) continue;
          const auto& l = world_->node(id).ledger();
          U256 got = 0;
          if (!a.account.empty()) {
            got = l.account(account(a.account).address()).balance;
          } else {
            const auto* c = l.contract(contract(a.contract));
            if (c == nullptr) {
              d << id << ": contract missing; ";
              r.passed = false;
              continue;
            }
            if (a.balance) {
              got = c->balance;
            } else {
              auto it = c->storage.find(slot_key(c->handler_id, a.slot));
              got = it == c->storage.end() ? U256(0) : it->second;
            }
          }
          ++checked;
          if (got != want) {
            r.passed = false;
            d << id << " has " << str(got) << "; ";
          }
        }
        if (checked == 0 && r.passed) {
          r.passed = false;
          d << "no live replica";
        }
        if (r.passed) d << checked << " replica(s) agree";
        break;
      }
      case AssertionKind::TxOutcome: {
        std::ostringstream names;
        for (const auto& t : a.txs) names << (names.tellp() > 0 ? "," : "") << t;
        r.description = "TxOutcome " + names.str() + " round " + a.round + " " + a.expect;
        if (a.reason) r.description += " reason " + *a.reason;
        if (a.reason_contains) r.description += " reason~" + *a.reason_contains;
        auto matches = [&](const protocol::OutcomeRecord* o) {
          if (a.expect == "none") return o == nullptr;
          if (o == nullptr) return false;
          if ((a.expect == "committed") != o->committed) return false;
          if (a.reason && o->reason != *a.reason) return false;
          if (a.reason_contains && o->reason.find(*a.reason_contains) == std::string::npos) return false;
          return true;
        };
        bool any_mode = a.round == "any";
        bool any_hit = false, all_ok = true;
        for (const auto& t : a.txs) {
          std::uint32_t rounds = static_cast<std::uint32_t>(world_->submitted(t).size());
          std::map<std::uint32_t, const protocol::OutcomeRecord*> by_round;
          for (const auto& o : world_->outcomes()) {
            if (o.intent == t) by_round[o.round] = &o;
          }
          auto of_round = [&](std::uint32_t k) -> const protocol::OutcomeRecord* {
            auto it = by_round.find(k);
            return it == by_round.end() ? nullptr : it->second;
          };
          std::vector<std::uint32_t> selected;
          if (a.round == "last") {
            selected = {rounds};
          } else if (a.round == "first") {
            selected = {1};
          } else if (a.round == "all" || any_mode) {
            for (std::uint32_t k = 1; k <= rounds; ++k) selected.push_back(k);
          } else if (is_number(a.round)) {
            selected = {static_cast<std::uint32_t>(parse_u256(a.round))};
          } else {
            throw ScenarioError("TxOutcome: bad round '" + a.round + "'");
          }
          d << t << ":";
          for (auto k : selected) {
            const auto* o = of_round(k);
            bool ok = matches(o);
            any_hit = any_hit || ok;
            all_ok = all_ok && ok;
            d << " #" << k << "=" << (o == nullptr ? "none" : o->committed ? "committed" : "failed:" + o->reason);
          }
          if (selected.empty()) all_ok = all_ok && a.expect == "none";
          if (a.rounds && rounds != *a.rounds) {
            all_ok = false;
            any_hit = false;
            d << " (" << rounds << " rounds, expected " << *a.rounds << ")";
          }
          d << "; ";
        }
        r.passed = any_mode ? any_hit : all_ok;
        break;
      }
      case AssertionKind::AtomicityAcrossContracts: {
        std::vector<wire::TxRef> refs;
        std::vector<std::string> names = a.txs;
        if (names.empty()) {
          for (const auto& act : scenario_.actions) {
            if (act.kind == ActionKind::Submit) names.push_back(act.name);
          }
        }
        for (const auto& t : names) {
          auto rs = world_->submitted(t);
          refs.insert(refs.end(), rs.begin(), rs.end());
        }
        r = atomicity(refs);
        r.description = "AtomicityAcrossContracts";
        for (const auto& t : names) r.description += " " + t;
        out.push_back(r);
        continue;
      }
      case AssertionKind::CoordinationState: {
        std::uint32_t round = 0;
        if (a.round == "first") round = 1;
        if (is_number(a.round)) round = static_cast<std::uint32_t>(parse_u256(a.round));
        auto ref = tx_ref(a.txs.front(), round);
        std::string got = ref ? coordination_state(*ref) : "absent";
        r.description = "CoordinationState " + a.txs.front() + " == " + a.state;
        r.passed = got == a.state;
        d << "state " << got;
        break;
      }
      case AssertionKind::TraceContainsReason: {
        std::string pattern = a.reason ? *a.reason : a.reason_contains ? "~" + *a.reason_contains : "*";
        r.description = "TraceContainsReason " + pattern;
        if (!a.trace_kind.empty()) r.description += " kind " + a.trace_kind;
        if (!a.node.empty()) r.description += " node " + a.node;
        std::uint64_t n = 0;
        for (const auto& rec : sim.trace().records()) {
          if (!a.trace_kind.empty() && rec.kind != a.trace_kind) continue;
          if (!node_matches(a.node, rec.node)) continue;
          if (a.reason && rec.reason != *a.reason) continue;
          if (a.reason_contains && rec.reason.find(*a.reason_contains) == std::string::npos) continue;
          ++n;
        }
        if (a.absent) {
          r.description += " absent";
          r.passed = n == 0;
        } else if (a.count) {
          r.description += " x" + std::to_string(*a.count);
          r.passed = n == *a.count;
        } else {
          r.passed = n > 0;
        }
        d << n << " matching record(s)";
        break;
      }
      case AssertionKind::BalanceConservation: {
        r.description = "BalanceConservation" + (a.sidechain.empty() ? std::string() : " " + a.sidechain);
        r.passed = true;
        for (const auto& [name, id] : sidechains_) {
          if (!a.sidechain.empty() && name != a.sidechain) continue;
          U256 before = initial_value_.at(id);
          for (const auto& nid : world_->sidechain(id)->nodes) {
            if (!sim.alive(nid)) continue;
            U256 after = world_->node(nid).ledger().total_value();
            if (after != before) {
              r.passed = false;
              d << nid << ": " << str(before) << " -> " << str(after) << "; ";
            }
          }
        }
        if (r.passed) d << "total value unchanged";
        break;
      }
    }
    r.detail = d.str();
    out.push_back(r);
  }
  return out;
}

bool RunReport::passed() const {
  return std::all_of(results.begin(), results.end(), [](const AssertionResult& r) { return r.passed; });
}

RunReport run_scenario(const Scenario& s, const RunOptions& options) {
  Instance inst(s, options);
  RunReport rep;
  rep.scenario = s.name;
  rep.seed = inst.seed();
  rep.run = inst.run();
  AssertionResult done;
  done.description = "run reaches quiescence";
  done.passed = !rep.run.tick_limit_hit;
  done.detail = "final tick " + std::to_string(rep.run.final_tick) + ", " + std::to_string(rep.run.events) + " events";
  rep.results.push_back(done);
  for (const auto& c : inst.action_checks()) rep.results.push_back(c);
  for (auto& r : inst.evaluate(s.assertions)) rep.results.push_back(std::move(r));
  rep.trace = inst.world().sim().trace().serialize();
  return rep;
}

}  // namespace xchain::scenario
