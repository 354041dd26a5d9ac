#pragma once

#include <memory>
#include <string>
#include <vector>

#include "xchain/ledger/ledger.hpp"
#include "xchain/sim/simnet.hpp"
#include "xchain/wire/message.hpp"
#include "xchain/wire/transaction.hpp"

// Node-to-node protocol messages carried by the simulator.
namespace xchain::protocol {

using TxPtr = std::shared_ptr<const wire::CrosschainTransaction>;

struct SignedMessage {
  wire::ThresholdMessage msg;
  Bytes signature;

  Bytes encoded() const { return wire::encode_message(msg); }
};

/// Application -> originating coordinator.
struct SubmitTx : sim::Message {
  TxPtr tx;
  std::string kind() const override { return "submit-tx"; }
  Hash256 digest() const override { return wire::tx_hash(*tx); }
};

/// Originating coordinator -> application.
struct TxOutcome : sim::Message {
  wire::TxRef ref;
  bool committed = false;
  std::string reason;
  std::string kind() const override { return committed ? "outcome-committed" : "outcome-failed"; }
  Hash256 digest() const override;
};

/// Context a validator needs to decide whether to sign.
struct SignRequest : sim::Message {
  std::uint64_t request = 0;
  wire::ThresholdMessage msg;
  /// The transaction (sub)tree the message is about.
  TxPtr tx;
  /// Commit: one Ready per subordinate transaction. View result: the nested view results.
  std::vector<SignedMessage> evidence;
  std::string kind() const override { return std::string("sign-") + wire::to_string(msg.kind); }
  Hash256 digest() const override;
};

struct SignResponse : sim::Message {
  std::uint64_t request = 0;
  std::uint32_t index = 0;
  Bytes share;
  std::string kind() const override { return "sign-share"; }
  Hash256 digest() const override;
  sim::MessagePtr corrupted(std::uint64_t seed) const override;
};

struct SignRefusal : sim::Message {
  std::uint64_t request = 0;
  std::string reason;
  std::string kind() const override { return "sign-refusal"; }
  Hash256 digest() const override;
};

/// Coordinator -> coordination chain.
struct CoordinationSubmit : sim::Message {
  std::uint64_t request = 0;
  SignedMessage signed_msg;
  std::string kind() const override { return std::string("coord-") + wire::to_string(signed_msg.msg.kind); }
  Hash256 digest() const override;
};

struct CoordinationReceipt : sim::Message {
  std::uint64_t request = 0;
  bool accepted = false;
  std::string error;
  std::string kind() const override { return accepted ? "coord-accepted" : "coord-rejected"; }
  Hash256 digest() const override;
};

struct ViewRequest : sim::Message {
  std::uint64_t request = 0;
  TxPtr view;
  std::string kind() const override { return "view-request"; }
  Hash256 digest() const override { return wire::tx_hash(*view); }
};

struct ViewResponse : sim::Message {
  std::uint64_t request = 0;
  bool ok = false;
  SignedMessage result;
  std::string reason;
  std::string kind() const override { return ok ? "view-result" : "view-error"; }
  Hash256 digest() const override;
};

struct SubTxRequest : sim::Message {
  TxPtr tx;
  /// Where SubordinateTxReady and errors go.
  sim::NodeId originating_coordinator;
  std::string kind() const override { return "subtx-request"; }
  Hash256 digest() const override { return wire::tx_hash(*tx); }
};

struct SubTxReady : sim::Message {
  SignedMessage ready;
  std::string kind() const override { return "subtx-ready"; }
  Hash256 digest() const override;
};

struct SubTxError : sim::Message {
  wire::TxRef ref;
  Hash256 tx_hash;
  std::string reason;
  std::string kind() const override { return "subtx-error"; }
  Hash256 digest() const override { return tx_hash; }
};

/// Coordinator -> validators on its sidechain: proposal for the next block.
struct MineRequest : sim::Message {
  std::uint64_t request = 0;
  TxPtr tx;
  std::vector<SignedMessage> view_results;
  std::string kind() const override { return "mine-request"; }
  Hash256 digest() const override { return wire::tx_hash(*tx); }
};

struct MineVote : sim::Message {
  std::uint64_t request = 0;
  bool accept = false;
  std::string reason;
  std::string kind() const override { return accept ? "mine-accept" : "mine-reject"; }
  Hash256 digest() const override;
};

struct CheckCoordination : sim::Message {
  wire::TxRef ref;
  /// Coordinating nodes forward the request to their sidechain's validators.
  bool forward = false;
  std::string kind() const override { return "check-coordination"; }
  Hash256 digest() const override;
};

}  // namespace xchain::protocol
