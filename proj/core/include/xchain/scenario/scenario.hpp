#pragma once

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "xchain/protocol/world.hpp"

// Declarative scenario files: parsing, instantiation, assertions and fault sweeps.
namespace xchain::scenario {

/// Malformed or inconsistent scenario file (the CLI maps this to exit status 2).
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Literal or reference as written in the file: "42", "0x1f", "$control", "$sc2", "$alice", "$bound_result".
struct Value {
  std::string text;
};

struct PolicySpec {
  std::optional<std::vector<std::string>> tx_allowed;
  std::optional<std::vector<std::string>> view_allowed;
  std::optional<std::vector<std::string>> trusted;
  std::optional<std::uint64_t> max_lock_horizon;
  std::optional<std::uint64_t> freshness_window;
  std::optional<std::int64_t> clock_skew;
  /// Accounts whose transactions this validator refuses to start.
  std::vector<std::string> spam_accounts;
  bool dissent_views = false;
};

struct CoordinationSpec {
  std::string name;
  std::string id;
  std::string contract;
  std::uint64_t max_timeout_blocks = 100;
  std::uint64_t block_interval = 10;
  std::uint64_t grace_window = 16;
};

struct SidechainDecl {
  std::string name;
  std::string id;
  std::uint32_t validators = 4;
  std::uint32_t f = 1;
  std::optional<std::uint32_t> m;
  std::uint64_t block_interval = 10;
  bool dkg = false;
  std::optional<std::uint64_t> keygen_seed;
  std::vector<std::uint32_t> corrupt_dealers;
  PolicySpec policy;
  std::map<std::uint32_t, PolicySpec> overrides;
};

struct AccountDecl {
  std::string name;
  std::uint64_t seed = 1;
};

struct FundingDecl {
  std::string sidechain;
  std::string account;
  Value amount;
};

struct MultichainDecl {
  std::string name;
  std::map<std::string, std::uint32_t> members;
};

struct ForwardCallDecl {
  bool view = false;
  std::string sidechain;
  Value to;
  Value value{"0"};
  std::string function;
  std::vector<Value> args;
};

struct ContractDecl {
  std::string name;
  std::string sidechain;
  std::string handler;
  bool lockable = false;
  std::string deployer;
  Value balance{"0"};
  std::vector<std::pair<std::string, Value>> storage;
  std::vector<ForwardCallDecl> calls;
};

struct CallDecl {
  std::string sidechain;
  Value contract;
  std::string function;
  std::vector<Value> args;
  Value value{"0"};
};

struct PokeDecl {
  std::string sidechain;
  Value contract;
  std::string slot;
  Value value;
};

enum class ActionKind { Submit, View, ReplayStart, Ordinary, Poke };

struct ActionDecl {
  ActionKind kind = ActionKind::Submit;
  sim::Tick at = 0;
  std::string name;
  std::string multichain;
  std::string account;
  CallDecl call;
  // Submit.
  std::uint64_t timeout_blocks = 20;
  std::string coordination;
  std::optional<Value> tx_id;
  std::uint32_t rounds = 1;
  sim::Tick retry_backoff = 0;
  sim::Tick retry_jitter = 0;
  std::vector<PokeDecl> before_submit;
  // View and ordinary: expected result ("ok" or an abort code for ordinary transactions).
  std::optional<Value> expect;
  std::string bind;
  std::optional<std::string> locked_view_policy;
  // Replay: the submission whose accepted Start is resent.
  std::string of;
  // Poke.
  PokeDecl poke;
};

enum class AssertionKind {
  StorageEquals,
  TxOutcome,
  AtomicityAcrossContracts,
  CoordinationState,
  TraceContainsReason,
  BalanceConservation,
};

const char* to_string(AssertionKind k);

struct AssertionDecl {
  AssertionKind kind = AssertionKind::StorageEquals;
  /// Submission names; TxOutcome with several names and round "any" passes if any round of any commits.
  std::vector<std::string> txs;
  /// "last", "first", "all", "any" or a 1-based round number.
  std::string round = "last";
  std::string expect;
  std::optional<std::string> reason;
  std::optional<std::string> reason_contains;
  std::optional<std::uint32_t> rounds;
  std::string sidechain;
  std::string contract;
  std::string account;
  std::string slot;
  bool balance = false;
  Value value;
  std::string state;
  std::string trace_kind;
  std::string node;
  std::optional<std::uint64_t> count;
  bool absent = false;
};

/// What a sweep cell must end in.
enum class CellExpect { Commit, Discard };

struct SweepCell {
  std::string name;
  std::vector<sim::FaultSpec> faults;
  CellExpect expect = CellExpect::Discard;
};

struct SweepDecl {
  bool present = false;
  /// Submission judged by each cell.
  std::string tx;
  /// Protocol steps to crash at; "all" expands to every step.
  std::vector<std::string> crash_steps;
  CellExpect default_expect = CellExpect::Discard;
  std::map<std::string, CellExpect> expect;
  std::vector<SweepCell> cells;
};

struct Scenario {
  std::string name;
  std::string description;
  std::string path;
  std::optional<std::uint64_t> seed;
  crypto::threshold::SchemeKind scheme = crypto::threshold::SchemeKind::Bn254;
  std::optional<sim::Tick> max_ticks;
  sim::Tick jitter = 0;
  protocol::Timing timing;
  ledger::LockedViewPolicy locked_view_policy = ledger::LockedViewPolicy::FailIfLocked;
  std::vector<CoordinationSpec> coordination;
  std::vector<SidechainDecl> sidechains;
  std::vector<AccountDecl> accounts;
  std::vector<FundingDecl> funding;
  std::vector<MultichainDecl> multichains;
  std::vector<ContractDecl> contracts;
  std::vector<ActionDecl> actions;
  std::vector<sim::FaultSpec> faults;
  std::vector<AssertionDecl> assertions;
  SweepDecl sweep;
};

/// Throws ScenarioError with the offending location.
Scenario parse_scenario(const std::string& text, const std::string& origin = "<string>");
Scenario load_scenario(const std::string& path);

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<sim::Tick> max_ticks;
  std::optional<ledger::LockedViewPolicy> locked_view_policy;
  std::optional<crypto::threshold::SchemeKind> scheme;
  /// Added to the scenario's faults (sweep cells).
  std::vector<sim::FaultSpec> extra_faults;
};

/// Seed precedence: explicit option, then the scenario file, then XCHAIN_SIM_SEED, then 0.
std::uint64_t effective_seed(const Scenario& s, const RunOptions& opt);

struct AssertionResult {
  std::string description;
  bool passed = false;
  std::string detail;
};

/// One instantiated, runnable scenario.
class Instance {
 public:
  Instance(const Scenario& scenario, const RunOptions& options);
  ~Instance();

  protocol::World& world() { return *world_; }
  const protocol::World& world() const { return *world_; }
  std::uint64_t seed() const { return seed_; }

  sim::RunResult run();
  std::vector<AssertionResult> evaluate(const std::vector<AssertionDecl>& assertions) const;
  /// Inline checks of view, ordinary and replay actions, in execution order.
  const std::vector<AssertionResult>& action_checks() const { return action_checks_; }

  Address contract(const std::string& name) const;
  wire::SidechainId sidechain(const std::string& name) const;
  const crypto::secp256k1::AccountKey& account(const std::string& name) const;
  /// Last (or given 1-based) round's reference of a submission.
  std::optional<wire::TxRef> tx_ref(const std::string& submission, std::uint32_t round = 0) const;

  U256 word(const Value& v) const;
  Address address(const Value& v) const;
  Bytes arg(const Value& v) const;
  U256 slot_key(const std::string& contract_handler, const std::string& slot) const;

  AssertionResult atomicity(const std::vector<wire::TxRef>& refs) const;
  /// Committed, Ignored, TimedOut, Started or absent.
  std::string coordination_state(const wire::TxRef& ref) const;

 private:
  void build();
  void schedule_actions();
  void run_action(const ActionDecl& a);
  void apply_poke(const PokeDecl& p);
  protocol::EntryCall entry_of(const CallDecl& c) const;

  const Scenario& scenario_;
  RunOptions options_;
  std::uint64_t seed_ = 0;
  std::unique_ptr<protocol::World> world_;
  std::map<std::string, Address> contracts_;
  std::map<std::string, std::string> contract_handlers_;
  std::map<std::string, wire::SidechainId> sidechains_;
  std::map<std::string, crypto::secp256k1::AccountKey> accounts_;
  std::map<std::string, protocol::CoordRef> coordination_;
  std::map<std::string, Bytes> bindings_;
  std::map<wire::SidechainId, U256> initial_value_;
  std::vector<AssertionResult> action_checks_;
};

struct RunReport {
  std::string scenario;
  std::uint64_t seed = 0;
  sim::RunResult run;
  std::vector<AssertionResult> results;
  std::string trace;

  bool passed() const;
};

/// Runs the scenario once and evaluates its actions and assertions.
RunReport run_scenario(const Scenario& s, const RunOptions& options = {});

struct CellReport {
  std::string name;
  std::string faults;
  CellExpect expect = CellExpect::Discard;
  std::string coordination_state;
  std::size_t commits = 0;
  std::size_t ignores = 0;
  bool atomic = false;
  bool matches = false;
  std::string detail;
};

struct SweepFilter {
  /// Only cells whose faults are all of this kind.
  std::optional<sim::FaultKind> fault_kind;
  /// Restrict generated crash cells to these steps; empty keeps all.
  std::vector<std::string> steps;
  unsigned jobs = 0;
};

std::vector<SweepCell> sweep_cells(const Scenario& s, const SweepFilter& filter = {});
std::vector<CellReport> run_sweep(const Scenario& s, const RunOptions& options = {}, const SweepFilter& filter = {});
const char* to_string(CellExpect e);

}  // namespace xchain::scenario
