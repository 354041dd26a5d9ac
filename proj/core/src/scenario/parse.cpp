#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

#include "xchain/protocol/steps.hpp"
#include "xchain/scenario/scenario.hpp"

namespace xchain::scenario {

namespace {

class Parser {
 public:
  explicit Parser(std::string origin) : origin_(std::move(origin)) {}

  [[noreturn]] void fail(const YAML::Node& n, const std::string& msg) const {
    std::string loc = origin_;
    if (n.IsDefined() && n.Mark().line >= 0) loc += ":" + std::to_string(n.Mark().line + 1);
    throw ScenarioError(loc + ": " + msg);
  }

  void expect_map(const YAML::Node& n, const std::string& what) const {
    if (!n.IsMap()) fail(n, what + " must be a mapping");
  }

  void allow_keys(const YAML::Node& n, const std::string& what, std::initializer_list<const char*> keys) const {
    expect_map(n, what);
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& kv : n) {
      auto k = kv.first.as<std::string>();
      if (!allowed.count(k)) fail(kv.first, "unknown key '" + k + "' in " + what);
    }
  }

  std::string text(const YAML::Node& n, const std::string& what) const {
    if (!n.IsScalar()) fail(n, what + " must be a scalar");
    return n.Scalar();
  }

  std::string req_str(const YAML::Node& m, const char* key, const std::string& what) const {
    if (!m[key]) fail(m, what + " needs '" + key + "'");
    return text(m[key], std::string(what) + "." + key);
  }

  std::string opt_str(const YAML::Node& m, const char* key, std::string def = {}) const {
    return m[key] ? text(m[key], key) : def;
  }

  template <class T>
  T num(const YAML::Node& n, const std::string& what) const {
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      fail(n, what + " must be an integer");
    }
  }

  template <class T>
  T opt_num(const YAML::Node& m, const char* key, T def) const {
    return m[key] ? num<T>(m[key], key) : def;
  }

  bool opt_bool(const YAML::Node& m, const char* key, bool def) const {
    if (!m[key]) return def;
    try {
      return m[key].as<bool>();
    } catch (const YAML::Exception&) {
      fail(m[key], std::string(key) + " must be true or false");
    }
  }

  Value value(const YAML::Node& n, const std::string& what) const { return Value{text(n, what)}; }

  std::vector<Value> values(const YAML::Node& n, const std::string& what) const {
    std::vector<Value> out;
    if (!n) return out;
    if (!n.IsSequence()) fail(n, what + " must be a list");
    for (const auto& x : n) out.push_back(value(x, what));
    return out;
  }

  std::vector<std::string> strings(const YAML::Node& n, const std::string& what) const {
    std::vector<std::string> out;
    if (!n) return out;
    if (n.IsScalar()) return {n.Scalar()};
    if (!n.IsSequence()) fail(n, what + " must be a list");
    for (const auto& x : n) out.push_back(text(x, what));
    return out;
  }

  PolicySpec policy(const YAML::Node& n) const {
    PolicySpec p;
    if (!n) return p;
    allow_keys(n, "policy",
               {"tx_allowed", "view_allowed", "trusted", "max_lock_horizon", "freshness_window", "clock_skew",
                "spam_accounts", "dissent_views"});
    if (n["tx_allowed"]) p.tx_allowed = strings(n["tx_allowed"], "tx_allowed");
    if (n["view_allowed"]) p.view_allowed = strings(n["view_allowed"], "view_allowed");
    if (n["trusted"]) p.trusted = strings(n["trusted"], "trusted");
    if (n["max_lock_horizon"]) p.max_lock_horizon = num<std::uint64_t>(n["max_lock_horizon"], "max_lock_horizon");
    if (n["freshness_window"]) p.freshness_window = num<std::uint64_t>(n["freshness_window"], "freshness_window");
    if (n["clock_skew"]) p.clock_skew = num<std::int64_t>(n["clock_skew"], "clock_skew");
    p.spam_accounts = strings(n["spam_accounts"], "spam_accounts");
    p.dissent_views = opt_bool(n, "dissent_views", false);
    return p;
  }

  CallDecl call(const YAML::Node& n, const std::string& what) const {
    CallDecl c;
    c.sidechain = req_str(n, "sidechain", what);
    c.contract = value(n["contract"] ? n["contract"] : n, what + ".contract");
    if (!n["contract"]) fail(n, what + " needs 'contract'");
    c.function = req_str(n, "function", what);
    c.args = values(n["args"], what + ".args");
    if (n["value"]) c.value = value(n["value"], what + ".value");
    return c;
  }

  PokeDecl poke(const YAML::Node& n) const {
    allow_keys(n, "poke", {"sidechain", "contract", "slot", "value"});
    PokeDecl p;
    p.sidechain = req_str(n, "sidechain", "poke");
    p.contract = Value{req_str(n, "contract", "poke")};
    p.slot = req_str(n, "slot", "poke");
    p.value = Value{req_str(n, "value", "poke")};
    return p;
  }

  sim::FaultSpec fault(const YAML::Node& n) const {
    allow_keys(n, "fault",
               {"kind", "step", "at", "node", "peer", "message", "side_a", "side_b", "duration", "delay", "count"});
    sim::FaultSpec f;
    std::string kind = req_str(n, "kind", "fault");
    auto k = sim::parse_fault_kind(kind);
    if (!k) fail(n["kind"], "unknown fault kind '" + kind + "'");
    f.kind = *k;
    f.step = opt_str(n, "step");
    if (!f.step.empty() && !protocol::steps::all().count(f.step)) fail(n["step"], "unknown protocol step '" + f.step + "'");
    f.at = opt_num<sim::Tick>(n, "at", 0);
    f.node = opt_str(n, "node");
    f.peer = opt_str(n, "peer");
    f.message_kind = opt_str(n, "message");
    f.side_a = strings(n["side_a"], "side_a");
    f.side_b = strings(n["side_b"], "side_b");
    f.duration = opt_num<sim::Tick>(n, "duration", 0);
    f.delay = opt_num<sim::Tick>(n, "delay", 0);
    f.count = opt_num<std::uint32_t>(n, "count", 0);
    return f;
  }

  std::vector<sim::FaultSpec> faults(const YAML::Node& n) const {
    std::vector<sim::FaultSpec> out;
    if (!n) return out;
    if (!n.IsSequence()) fail(n, "faults must be a list");
    for (const auto& f : n) out.push_back(fault(f));
    return out;
  }

  CellExpect cell_expect(const YAML::Node& n) const {
    std::string s = text(n, "expect");
    if (s == "commit") return CellExpect::Commit;
    if (s == "discard") return CellExpect::Discard;
    fail(n, "expected outcome must be 'commit' or 'discard'");
  }

  ActionDecl action(const YAML::Node& n) const {
    expect_map(n, "action");
    ActionDecl a;
    a.at = opt_num<sim::Tick>(n, "at", 0);
    int kinds = 0;
    for (const char* k : {"submit", "view", "replay_start", "ordinary", "poke"}) kinds += n[k] ? 1 : 0;
    if (kinds != 1) fail(n, "an action needs exactly one of submit, view, replay_start, ordinary, poke");
    for (const auto& kv : n) {
      auto k = kv.first.as<std::string>();
      if (k != "at" && k != "submit" && k != "view" && k != "replay_start" && k != "ordinary" && k != "poke") {
        fail(kv.first, "unknown key '" + k + "' in action");
      }
    }
    if (auto s = n["submit"]) {
      allow_keys(s, "submit",
                 {"name", "multichain", "account", "sidechain", "contract", "function", "args", "value",
                  "timeout_blocks", "coordination", "tx_id", "rounds", "retry_backoff", "retry_jitter",
                  "before_submit"});
      a.kind = ActionKind::Submit;
      a.name = req_str(s, "name", "submit");
      a.multichain = req_str(s, "multichain", "submit");
      a.account = req_str(s, "account", "submit");
      a.call = call(s, "submit");
      a.timeout_blocks = opt_num<std::uint64_t>(s, "timeout_blocks", 20);
      a.coordination = opt_str(s, "coordination");
      if (s["tx_id"]) a.tx_id = value(s["tx_id"], "tx_id");
      a.rounds = opt_num<std::uint32_t>(s, "rounds", 1);
      if (a.rounds == 0) fail(s["rounds"], "rounds must be at least 1");
      a.retry_backoff = opt_num<sim::Tick>(s, "retry_backoff", 0);
      a.retry_jitter = opt_num<sim::Tick>(s, "retry_jitter", 0);
      if (auto b = s["before_submit"]) {
        if (!b.IsSequence()) fail(b, "before_submit must be a list of pokes");
        for (const auto& p : b) a.before_submit.push_back(poke(p));
      }
    } else if (auto v = n["view"]) {
      allow_keys(v, "view",
                 {"name", "multichain", "account", "sidechain", "contract", "function", "args", "expect", "bind",
                  "locked_view_policy"});
      a.kind = ActionKind::View;
      a.name = opt_str(v, "name", "view");
      a.multichain = req_str(v, "multichain", "view");
      a.account = req_str(v, "account", "view");
      a.call = call(v, "view");
      if (v["expect"]) a.expect = value(v["expect"], "expect");
      a.bind = opt_str(v, "bind");
      if (v["locked_view_policy"]) {
        a.locked_view_policy = text(v["locked_view_policy"], "locked_view_policy");
        if (!ledger::parse_locked_view_policy(*a.locked_view_policy)) fail(v["locked_view_policy"], "unknown policy");
      }
    } else if (auto r = n["replay_start"]) {
      allow_keys(r, "replay_start", {"of"});
      a.kind = ActionKind::ReplayStart;
      a.of = req_str(r, "of", "replay_start");
      a.name = "replay:" + a.of;
    } else if (auto o = n["ordinary"]) {
      allow_keys(o, "ordinary", {"name", "account", "sidechain", "contract", "function", "args", "value", "expect"});
      a.kind = ActionKind::Ordinary;
      a.name = opt_str(o, "name", "ordinary");
      a.account = req_str(o, "account", "ordinary");
      a.call = call(o, "ordinary");
      if (o["expect"]) a.expect = value(o["expect"], "expect");
    } else {
      a.kind = ActionKind::Poke;
      a.poke = poke(n["poke"]);
      a.name = "poke";
    }
    return a;
  }

  AssertionDecl assertion(const YAML::Node& n) const {
    allow_keys(n, "assertion",
               {"kind", "tx", "round", "expect", "reason", "reason_contains", "rounds", "sidechain", "contract",
                "account", "slot", "balance", "value", "state", "trace_kind", "node", "count", "absent"});
    AssertionDecl a;
    std::string kind = req_str(n, "kind", "assertion");
    static const std::pair<const char*, AssertionKind> kKinds[] = {
        {"StorageEquals", AssertionKind::StorageEquals},
        {"TxOutcome", AssertionKind::TxOutcome},
        {"AtomicityAcrossContracts", AssertionKind::AtomicityAcrossContracts},
        {"CoordinationState", AssertionKind::CoordinationState},
        {"TraceContainsReason", AssertionKind::TraceContainsReason},
        {"BalanceConservation", AssertionKind::BalanceConservation},
    };
    bool found = false;
    for (const auto& [name, k] : kKinds) {
      if (kind == name) {
        a.kind = k;
        found = true;
      }
    }
    if (!found) fail(n["kind"], "unknown assertion kind '" + kind + "'");
    a.txs = strings(n["tx"], "tx");
    a.round = opt_str(n, "round", "last");
    a.expect = opt_str(n, "expect");
    if (n["reason"]) a.reason = text(n["reason"], "reason");
    if (n["reason_contains"]) a.reason_contains = text(n["reason_contains"], "reason_contains");
    if (n["rounds"]) a.rounds = num<std::uint32_t>(n["rounds"], "rounds");
    a.sidechain = opt_str(n, "sidechain");
    a.contract = opt_str(n, "contract");
    a.account = opt_str(n, "account");
    a.slot = opt_str(n, "slot");
    a.balance = opt_bool(n, "balance", false);
    if (n["value"]) a.value = value(n["value"], "value");
    a.state = opt_str(n, "state");
    a.trace_kind = opt_str(n, "trace_kind");
    a.node = opt_str(n, "node");
    if (n["count"]) a.count = num<std::uint64_t>(n["count"], "count");
    a.absent = opt_bool(n, "absent", false);

    switch (a.kind) {
      case AssertionKind::StorageEquals:
        if (a.sidechain.empty() || !n["value"]) fail(n, "StorageEquals needs sidechain and value");
        if (a.contract.empty() == a.account.empty()) fail(n, "StorageEquals needs exactly one of contract, account");
        if (!a.account.empty()) a.balance = true;
        if (!a.balance && a.slot.empty()) fail(n, "StorageEquals needs slot or balance: true");
        break;
      case AssertionKind::TxOutcome:
        if (a.txs.empty()) fail(n, "TxOutcome needs tx");
        if (a.expect != "committed" && a.expect != "failed" && a.expect != "none") {
          fail(n, "TxOutcome expect must be committed, failed or none");
        }
        break;
      case AssertionKind::CoordinationState:
        if (a.txs.size() != 1 || a.state.empty()) fail(n, "CoordinationState needs one tx and a state");
        break;
      case AssertionKind::TraceContainsReason:
        if (!a.reason && !a.reason_contains && a.trace_kind.empty()) {
          fail(n, "TraceContainsReason needs reason, reason_contains or trace_kind");
        }
        break;
      case AssertionKind::AtomicityAcrossContracts:
      case AssertionKind::BalanceConservation:
        break;
    }
    return a;
  }

  Scenario scenario(const YAML::Node& root) const {
    allow_keys(root, "scenario",
               {"name", "description", "seed", "scheme", "max_ticks", "jitter", "timing", "locked_view_policy",
                "coordination_chains", "sidechains", "accounts", "funding", "multichains", "contracts", "actions",
                "faults", "assertions", "sweep"});
    Scenario s;
    s.name = req_str(root, "name", "scenario");
    s.description = opt_str(root, "description");
    if (root["seed"]) s.seed = num<std::uint64_t>(root["seed"], "seed");
    std::string scheme = opt_str(root, "scheme", "bn254");
    if (scheme == "bn254") {
      s.scheme = crypto::threshold::SchemeKind::Bn254;
    } else if (scheme == "simulated") {
      s.scheme = crypto::threshold::SchemeKind::Simulated;
    } else {
      fail(root["scheme"], "scheme must be bn254 or simulated");
    }
    if (root["max_ticks"]) s.max_ticks = num<sim::Tick>(root["max_ticks"], "max_ticks");
    s.jitter = opt_num<sim::Tick>(root, "jitter", 0);
    if (auto t = root["timing"]) {
      allow_keys(t, "timing",
                 {"sidechain_latency", "crosschain_latency", "sign_deadline", "mine_deadline", "receipt_deadline",
                  "view_deadline", "ready_deadline", "timer_lag"});
      auto& tm = s.timing;
      tm.sidechain_latency = opt_num<sim::Tick>(t, "sidechain_latency", tm.sidechain_latency);
      tm.crosschain_latency = opt_num<sim::Tick>(t, "crosschain_latency", tm.crosschain_latency);
      tm.sign_deadline = opt_num<sim::Tick>(t, "sign_deadline", tm.sign_deadline);
      tm.mine_deadline = opt_num<sim::Tick>(t, "mine_deadline", tm.mine_deadline);
      tm.receipt_deadline = opt_num<sim::Tick>(t, "receipt_deadline", tm.receipt_deadline);
      tm.view_deadline = opt_num<sim::Tick>(t, "view_deadline", tm.view_deadline);
      tm.ready_deadline = opt_num<sim::Tick>(t, "ready_deadline", tm.ready_deadline);
      tm.timer_lag = opt_num<sim::Tick>(t, "timer_lag", tm.timer_lag);
    }
    if (root["locked_view_policy"]) {
      auto p = ledger::parse_locked_view_policy(text(root["locked_view_policy"], "locked_view_policy"));
      if (!p) fail(root["locked_view_policy"], "unknown locked view policy");
      s.locked_view_policy = *p;
    }

    for (const auto& c : list(root, "coordination_chains")) {
      allow_keys(c, "coordination chain", {"name", "id", "contract", "max_timeout_blocks", "block_interval", "grace_window"});
      CoordinationSpec cs;
      cs.name = req_str(c, "name", "coordination chain");
      cs.id = opt_str(c, "id");
      cs.contract = opt_str(c, "contract");
      cs.max_timeout_blocks = opt_num<std::uint64_t>(c, "max_timeout_blocks", 100);
      cs.block_interval = opt_num<std::uint64_t>(c, "block_interval", 10);
      if (cs.block_interval == 0) fail(c["block_interval"], "block_interval must be positive");
      cs.grace_window = opt_num<std::uint64_t>(c, "grace_window", 16);
      s.coordination.push_back(cs);
    }
    if (s.coordination.empty()) fail(root, "at least one coordination chain is required");

    for (const auto& c : list(root, "sidechains")) {
      allow_keys(c, "sidechain",
                 {"name", "id", "validators", "f", "m", "block_interval", "keygen", "keygen_seed", "corrupt_dealers",
                  "policy", "validator_policies"});
      SidechainDecl d;
      d.name = req_str(c, "name", "sidechain");
      d.id = opt_str(c, "id");
      d.validators = opt_num<std::uint32_t>(c, "validators", 4);
      d.f = opt_num<std::uint32_t>(c, "f", 1);
      if (c["m"]) d.m = num<std::uint32_t>(c["m"], "m");
      d.block_interval = opt_num<std::uint64_t>(c, "block_interval", 10);
      std::string kg = opt_str(c, "keygen", "dealer");
      if (kg != "dealer" && kg != "dkg") fail(c["keygen"], "keygen must be dealer or dkg");
      d.dkg = kg == "dkg";
      if (c["keygen_seed"]) d.keygen_seed = num<std::uint64_t>(c["keygen_seed"], "keygen_seed");
      if (auto cd = c["corrupt_dealers"]) {
        if (!cd.IsSequence()) fail(cd, "corrupt_dealers must be a list");
        for (const auto& x : cd) d.corrupt_dealers.push_back(num<std::uint32_t>(x, "dealer"));
      }
      d.policy = policy(c["policy"]);
      if (auto vp = c["validator_policies"]) {
        expect_map(vp, "validator_policies");
        for (const auto& kv : vp) {
          // Each override starts from the sidechain-wide policy.
          PolicySpec merged = d.policy;
          PolicySpec o = policy(kv.second);
          if (o.tx_allowed) merged.tx_allowed = o.tx_allowed;
          if (o.view_allowed) merged.view_allowed = o.view_allowed;
          if (o.trusted) merged.trusted = o.trusted;
          if (o.max_lock_horizon) merged.max_lock_horizon = o.max_lock_horizon;
          if (o.freshness_window) merged.freshness_window = o.freshness_window;
          if (o.clock_skew) merged.clock_skew = o.clock_skew;
          if (!o.spam_accounts.empty()) merged.spam_accounts = o.spam_accounts;
          if (kv.second["dissent_views"]) merged.dissent_views = o.dissent_views;
          d.overrides[num<std::uint32_t>(kv.first, "validator index")] = merged;
        }
      }
      s.sidechains.push_back(d);
    }

    if (auto acc = root["accounts"]) {
      expect_map(acc, "accounts");
      for (const auto& kv : acc) {
        AccountDecl a;
        a.name = kv.first.as<std::string>();
        if (kv.second.IsMap()) {
          allow_keys(kv.second, "account", {"seed"});
          a.seed = opt_num<std::uint64_t>(kv.second, "seed", 1);
        } else {
          a.seed = num<std::uint64_t>(kv.second, "account seed");
        }
        s.accounts.push_back(a);
      }
    }
    for (const auto& f : list(root, "funding")) {
      allow_keys(f, "funding", {"sidechain", "account", "amount"});
      s.funding.push_back({req_str(f, "sidechain", "funding"), req_str(f, "account", "funding"),
                           Value{req_str(f, "amount", "funding")}});
    }
    for (const auto& m : list(root, "multichains")) {
      allow_keys(m, "multichain", {"name", "members"});
      MultichainDecl d;
      d.name = req_str(m, "name", "multichain");
      auto mem = m["members"];
      if (!mem) fail(m, "multichain needs members");
      expect_map(mem, "members");
      for (const auto& kv : mem) d.members[kv.first.as<std::string>()] = num<std::uint32_t>(kv.second, "member index");
      s.multichains.push_back(d);
    }
    for (const auto& c : list(root, "contracts")) {
      allow_keys(c, "contract", {"name", "sidechain", "handler", "lockable", "deployer", "balance", "storage", "calls"});
      ContractDecl d;
      d.name = req_str(c, "name", "contract");
      d.sidechain = req_str(c, "sidechain", "contract");
      d.handler = req_str(c, "handler", "contract");
      d.lockable = opt_bool(c, "lockable", false);
      d.deployer = opt_str(c, "deployer");
      if (c["balance"]) d.balance = value(c["balance"], "balance");
      if (auto st = c["storage"]) {
        expect_map(st, "storage");
        for (const auto& kv : st) d.storage.emplace_back(kv.first.as<std::string>(), value(kv.second, "storage value"));
      }
      if (auto calls = c["calls"]) {
        if (!calls.IsSequence()) fail(calls, "calls must be a list");
        for (const auto& x : calls) {
          allow_keys(x, "forwarded call", {"kind", "sidechain", "to", "value", "function", "args"});
          ForwardCallDecl f;
          std::string kind = opt_str(x, "kind", "tx");
          if (kind != "tx" && kind != "view") fail(x["kind"], "forwarded call kind must be tx or view");
          f.view = kind == "view";
          f.sidechain = req_str(x, "sidechain", "forwarded call");
          f.to = Value{req_str(x, "to", "forwarded call")};
          if (x["value"]) f.value = value(x["value"], "value");
          f.function = req_str(x, "function", "forwarded call");
          f.args = values(x["args"], "args");
          d.calls.push_back(f);
        }
      }
      s.contracts.push_back(d);
    }
    for (const auto& a : list(root, "actions")) s.actions.push_back(action(a));
    s.faults = faults(root["faults"]);
    for (const auto& a : list(root, "assertions")) s.assertions.push_back(assertion(a));

    if (auto sw = root["sweep"]) {
      allow_keys(sw, "sweep", {"tx", "crash_steps", "default", "expect", "cells"});
      s.sweep.present = true;
      s.sweep.tx = req_str(sw, "tx", "sweep");
      if (auto cs = sw["crash_steps"]) {
        if (cs.IsScalar() && cs.Scalar() == "all") {
          for (auto r : {protocol::steps::Role::Origin, protocol::steps::Role::SubTx, protocol::steps::Role::SubView}) {
            for (const auto& st : protocol::steps::role_steps(r)) s.sweep.crash_steps.push_back(protocol::steps::qualified(r, st));
          }
        } else {
          for (const auto& st : strings(cs, "crash_steps")) {
            if (!protocol::steps::all().count(st)) fail(cs, "unknown protocol step '" + st + "'");
            s.sweep.crash_steps.push_back(st);
          }
        }
      }
      if (sw["default"]) s.sweep.default_expect = cell_expect(sw["default"]);
      if (auto ex = sw["expect"]) {
        expect_map(ex, "sweep.expect");
        for (const auto& kv : ex) {
          auto st = kv.first.as<std::string>();
          if (!protocol::steps::all().count(st)) fail(kv.first, "unknown protocol step '" + st + "'");
          s.sweep.expect[st] = cell_expect(kv.second);
        }
      }
      for (const auto& c : list(sw, "cells")) {
        allow_keys(c, "sweep cell", {"name", "expect", "faults"});
        SweepCell cell;
        cell.name = req_str(c, "name", "sweep cell");
        if (!c["expect"]) fail(c, "sweep cell needs expect");
        cell.expect = cell_expect(c["expect"]);
        cell.faults = faults(c["faults"]);
        s.sweep.cells.push_back(cell);
      }
    }
    validate(s, root);
    return s;
  }

 private:
  YAML::Node list(const YAML::Node& m, const char* key) const {
    YAML::Node n = m[key];
    if (!n) return YAML::Node(YAML::NodeType::Sequence);
    if (!n.IsSequence()) fail(n, std::string(key) + " must be a list");
    return n;
  }

  void validate(const Scenario& s, const YAML::Node& root) const {
    std::set<std::string> chains, accounts, contracts, mcs, coords, submissions;
    for (const auto& c : s.coordination) {
      if (!coords.insert(c.name).second) fail(root, "duplicate coordination chain " + c.name);
    }
    for (const auto& c : s.sidechains) {
      if (!chains.insert(c.name).second) fail(root, "duplicate sidechain " + c.name);
      for (const auto& t : c.policy.trusted.value_or(std::vector<std::string>{})) {
        if (!coords.count(t)) fail(root, "sidechain " + c.name + " trusts unknown coordination chain " + t);
      }
    }
    for (const auto& a : s.accounts) accounts.insert(a.name);
    for (const auto& f : s.funding) {
      if (!chains.count(f.sidechain)) fail(root, "funding: unknown sidechain " + f.sidechain);
      if (!accounts.count(f.account)) fail(root, "funding: unknown account " + f.account);
    }
    for (const auto& m : s.multichains) {
      if (!mcs.insert(m.name).second) fail(root, "duplicate multichain " + m.name);
      for (const auto& [c, i] : m.members) {
        if (!chains.count(c)) fail(root, "multichain " + m.name + ": unknown sidechain " + c);
      }
    }
    for (const auto& c : s.contracts) {
      if (!chains.count(c.sidechain)) fail(root, "contract " + c.name + ": unknown sidechain " + c.sidechain);
      if (!contracts.insert(c.name).second) fail(root, "duplicate contract " + c.name);
      if (!c.deployer.empty() && !accounts.count(c.deployer)) fail(root, "contract " + c.name + ": unknown deployer");
    }
    for (const auto& a : s.actions) {
      if (a.kind == ActionKind::Submit || a.kind == ActionKind::View) {
        if (!mcs.count(a.multichain)) fail(root, "action " + a.name + ": unknown multichain " + a.multichain);
      }
      if (a.kind == ActionKind::Submit || a.kind == ActionKind::View || a.kind == ActionKind::Ordinary) {
        if (!accounts.count(a.account)) fail(root, "action " + a.name + ": unknown account " + a.account);
        if (!chains.count(a.call.sidechain)) fail(root, "action " + a.name + ": unknown sidechain " + a.call.sidechain);
      }
      if (a.kind == ActionKind::Submit) {
        if (!submissions.insert(a.name).second) fail(root, "duplicate submission " + a.name);
        if (!a.coordination.empty() && !coords.count(a.coordination)) {
          fail(root, "action " + a.name + ": unknown coordination chain " + a.coordination);
        }
      }
      if (a.kind == ActionKind::ReplayStart && !submissions.count(a.of)) {
        fail(root, "replay_start: unknown submission " + a.of);
      }
    }
    for (const auto& a : s.assertions) {
      for (const auto& t : a.txs) {
        if (!submissions.count(t)) fail(root, std::string(to_string(a.kind)) + ": unknown submission " + t);
      }
      if (!a.sidechain.empty() && !chains.count(a.sidechain)) fail(root, "assertion: unknown sidechain " + a.sidechain);
      if (!a.contract.empty() && !contracts.count(a.contract)) fail(root, "assertion: unknown contract " + a.contract);
      if (!a.account.empty() && !accounts.count(a.account)) fail(root, "assertion: unknown account " + a.account);
    }
    if (s.sweep.present && !submissions.count(s.sweep.tx)) fail(root, "sweep: unknown submission " + s.sweep.tx);
  }

  std::string origin_;
};

}  // namespace

const char* to_string(AssertionKind k) {
  switch (k) {
    case AssertionKind::StorageEquals: return "StorageEquals";
    case AssertionKind::TxOutcome: return "TxOutcome";
    case AssertionKind::AtomicityAcrossContracts: return "AtomicityAcrossContracts";
    case AssertionKind::CoordinationState: return "CoordinationState";
    case AssertionKind::TraceContainsReason: return "TraceContainsReason";
    case AssertionKind::BalanceConservation: return "BalanceConservation";
  }
  return "?";
}

const char* to_string(CellExpect e) { return e == CellExpect::Commit ? "commit" : "discard"; }

Scenario parse_scenario(const std::string& text, const std::string& origin) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ScenarioError(origin + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  Parser p(origin);
  try {
    Scenario s = p.scenario(root);
    s.path = origin;
    return s;
  } catch (const YAML::Exception& e) {
    throw ScenarioError(origin + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(path + ": cannot open scenario file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path);
}

}  // namespace xchain::scenario
