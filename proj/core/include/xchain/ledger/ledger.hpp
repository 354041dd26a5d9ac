#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xchain/ledger/handler.hpp"
#include "xchain/wire/transaction.hpp"

namespace xchain::ledger {

using Storage = std::map<U256, U256>;

enum class LockedViewPolicy { FailIfLocked, AssumeIgnored, AssumeCommitted };
enum class Decision { Commit, Ignore };

const char* to_string(LockedViewPolicy p);
std::optional<LockedViewPolicy> parse_locked_view_policy(std::string_view s);
const char* to_string(Decision d);

class LedgerError : public std::runtime_error {
 public:
  enum class Code { UnknownHandler, UnknownContract, NotLockable, AlreadyLocked, NotLocked, Locked, Revert };

  LedgerError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

struct Payout {
  Address to;
  U256 amount;
  friend bool operator==(const Payout&, const Payout&) = default;
};

struct ProvisionalOverlay {
  Storage storage_delta;
  /// Value received minus payouts.
  I256 balance_delta = 0;
  std::vector<Payout> payouts;

  bool empty() const { return storage_delta.empty() && balance_delta == 0 && payouts.empty(); }
  friend bool operator==(const ProvisionalOverlay&, const ProvisionalOverlay&) = default;
};

struct LockHolder {
  wire::TxRef ref;
  Hash256 coordination_key;
  friend bool operator==(const LockHolder&, const LockHolder&) = default;
};

enum class LockStatus { Unlocked, Locked };

struct LockState {
  LockStatus status = LockStatus::Unlocked;
  std::optional<LockHolder> holder;
  ProvisionalOverlay provisional;
  /// Value taken from the sender when the locking transaction was mined; refunded on Ignore.
  Address depositor;
  U256 escrow;
};

struct Contract {
  Address address;
  std::string handler_id;
  bool lockable = false;
  Storage storage;
  U256 balance;
  LockState lock;

  bool locked() const { return lock.status == LockStatus::Locked; }
};

struct Account {
  U256 balance;
  U256 nonce;
};

enum class AbortReason { None, UnknownContract, LockContention, NonlockableTarget, Mismatch, Revert, NonceMismatch };

/// Stable machine-readable code, used in traces.
const char* to_string(AbortReason r);

struct ExecutionOutcome {
  AbortReason reason = AbortReason::None;
  std::string detail;
  ProvisionalOverlay overlay;
  std::vector<SubordinateCall> emitted;
  Bytes output;

  bool ok() const { return reason == AbortReason::None; }
};

/// Matches a handler's crosschain calls against the subordinates of a signed transaction.
class CallFrame : public CrosschainCalls {
 public:
  CallFrame() = default;
  explicit CallFrame(std::vector<SubordinateCall> expected, std::map<std::size_t, Bytes> view_results = {});
  static CallFrame from_tree(const wire::CrosschainTransaction& tx, std::map<std::size_t, Bytes> view_results = {});

  Bytes view(const SubordinateCall& call) override;
  void transaction(const SubordinateCall& call) override;

  const std::vector<SubordinateCall>& expected() const { return expected_; }
  std::size_t cursor() const { return cursor_; }
  bool complete() const { return cursor_ == expected_.size(); }

 private:
  void match(const SubordinateCall& call);

  std::vector<SubordinateCall> expected_;
  std::size_t cursor_ = 0;
  std::map<std::size_t, Bytes> view_results_;
};

/// Thrown by CallFrame when an actual call differs from the signed one.
class CallMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

SubordinateCall call_of(const wire::CrosschainTransaction& sub);

/// One sidechain's world state.
class Ledger {
 public:
  Ledger(wire::SidechainId id, const HandlerRegistry* registry);

  const wire::SidechainId& id() const { return id_; }

  /// Address is the low 20 bytes of keccak(rlp[deployer, deployer nonce]); consumes the nonce.
  Address deploy(const Address& deployer, const std::string& handler_id, bool lockable = false,
                 Storage storage = {}, const U256& balance = 0);
  void fund(const Address& account, const U256& amount);

  const Contract* contract(const Address& a) const;
  Account account(const Address& a) const;
  const std::map<Address, Contract>& contracts() const { return contracts_; }
  const std::map<Address, Account>& accounts() const { return accounts_; }

  /// Runs a crosschain transaction or subordinate view without changing state. Transactions are checked
  /// for lockability, lock contention and nonce; views fail on locked contracts.
  ExecutionOutcome execute_local(const wire::CrosschainTransaction& tx, const Address& signer,
                                 CallFrame& frame) const;

  /// Runs a call against overlay-free state with no lock or nonce checks; for dry runs.
  ExecutionOutcome simulate(const Address& to, const Address& caller, const U256& value, ByteView data,
                            bool is_view, CrosschainCalls* calls) const;

  /// Mines a successfully executed crosschain transaction: consumes the nonce, escrows the value and
  /// locks the target with the outcome's overlay. Throws LedgerError if the lock cannot be taken.
  void apply_mined(const wire::CrosschainTransaction& tx, const Address& signer, const ExecutionOutcome& outcome,
                   const LockHolder& holder);

  void lock(const Address& a, const LockHolder& holder, ProvisionalOverlay overlay);
  void finalize(const Address& a, Decision decision);
  /// Finalizes every contract locked by the holder; returns their addresses.
  std::vector<Address> finalize_holder(const Hash256& coordination_key, Decision decision);
  std::vector<Address> locked_by(const Hash256& coordination_key) const;

  /// Read-only call under the given locked-contract policy.
  Bytes read_view(const Address& a, ByteView data, LockedViewPolicy policy, const Address& caller = {},
                  CrosschainCalls* calls = nullptr) const;

  /// Ordinary same-chain transaction, applied immediately when it succeeds.
  ExecutionOutcome execute_ordinary(const Address& signer, const U256& nonce, const Address& to, const U256& value,
                                    ByteView data);

  /// Accounts + contract balances + escrowed value.
  U256 total_value() const;
  Hash256 state_digest() const;
  /// "key=value" hex pairs in key order.
  std::string dump_storage(const Address& a) const;

  /// Test and scenario hook: overwrite one base storage slot of an unlocked contract.
  void poke_storage(const Address& a, const U256& key, const U256& value);

 private:
  Contract& mutable_contract(const Address& a);
  ExecutionOutcome run(const Contract& c, const Address& caller, const U256& value, ByteView data, bool read_only,
                       const ProvisionalOverlay* visible_overlay, CrosschainCalls* calls) const;
  void apply_overlay(Contract& c, const ProvisionalOverlay& overlay);

  wire::SidechainId id_;
  const HandlerRegistry* registry_;
  std::map<Address, Contract> contracts_;
  std::map<Address, Account> accounts_;
};

}  // namespace xchain::ledger
