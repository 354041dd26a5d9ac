#pragma once

#include "xchain/wire/rlp.hpp"
#include "xchain/wire/types.hpp"

namespace xchain::wire {

enum class MessageKind : std::uint8_t { Start = 0, Commit = 1, Ignore = 2, SubordinateTxReady = 3, SubordinateViewResult = 4 };

const char* to_string(MessageKind k);

/// A crosschain threshold message. Fields outside the kind's content list are ignored and
/// must be left default-initialised.
struct ThresholdMessage {
  MessageKind kind = MessageKind::Start;
  SidechainId originating_sidechain;
  CrosschainTxId tx_id;
  SidechainId coordination_chain;
  Address coordination_contract;
  // Start
  std::uint64_t timeout_blocks = 0;
  // SubordinateTxReady / SubordinateViewResult
  SidechainId executing_sidechain;
  Hash256 transaction_hash;
  // SubordinateViewResult
  std::uint64_t block_number = 0;
  Hash256 view_hash;
  Bytes result;

  TxRef ref() const { return {tx_id, originating_sidechain, coordination_chain, coordination_contract}; }

  static ThresholdMessage start(const TxRef& ref, std::uint64_t timeout_blocks);
  static ThresholdMessage commit(const TxRef& ref);
  static ThresholdMessage ignore(const TxRef& ref);
  static ThresholdMessage subordinate_tx_ready(const TxRef& ref, const SidechainId& executing, const Hash256& tx_hash);
  static ThresholdMessage subordinate_view_result(const TxRef& ref, const SidechainId& executing,
                                                  std::uint64_t block_number, const Hash256& view_hash, Bytes result);

  friend bool operator==(const ThresholdMessage&, const ThresholdMessage&) = default;
};

/// RLP list: [kind, originating, tx id, coordination chain, contract, kind-specific fields...].
Bytes encode_message(const ThresholdMessage& msg);
/// Throws WireError (Malformed, UnknownType, KindMismatch).
ThresholdMessage decode_message(ByteView bytes);

}  // namespace xchain::wire
