#pragma once

#include <optional>
#include <vector>

#include "xchain/crypto/secp256k1.hpp"
#include "xchain/wire/rlp.hpp"
#include "xchain/wire/types.hpp"

namespace xchain::wire {

enum class TxType : std::uint8_t { Originating = 0, SubordinateTx = 1, SubordinateView = 2 };

const char* to_string(TxType t);

struct CrosschainTransaction {
  TxType type = TxType::Originating;
  SidechainId coordination_chain;
  Address coordination_contract;
  /// Originating only.
  std::optional<std::uint64_t> timeout_blocks;
  CrosschainTxId tx_id;
  SidechainId originating_sidechain;
  /// Subordinate types only.
  std::optional<SidechainId> target_sidechain;
  U256 nonce;
  U256 gas_price;
  U256 gas_limit;
  Address to;
  U256 value;
  Bytes data;
  std::vector<CrosschainTransaction> subordinates;
  U256 sig_v;
  U256 sig_r;
  U256 sig_s;

  bool is_signed() const { return sig_v != 0 || sig_r != 0 || sig_s != 0; }
  bool is_view() const { return type == TxType::SubordinateView; }
  /// Sidechain this node executes on.
  SidechainId executing_sidechain() const { return target_sidechain ? *target_sidechain : originating_sidechain; }
  TxRef ref() const { return {tx_id, originating_sidechain, coordination_chain, coordination_contract}; }

  friend bool operator==(const CrosschainTransaction&, const CrosschainTransaction&) = default;
};

/// Throws WireError (Nesting, ReservedSidechain, Malformed) if the tree violates the format rules.
void validate_tree(const CrosschainTransaction& tx);

RlpItem to_rlp_item(const CrosschainTransaction& tx);
CrosschainTransaction from_rlp_item(const RlpItem& item, bool is_root = true);

Bytes rlp_encode(const CrosschainTransaction& tx);
CrosschainTransaction rlp_decode_tx(ByteView bytes);

/// keccak256 of the full canonical encoding.
Hash256 tx_hash(const CrosschainTransaction& tx);
/// keccak256 of the encoding with v, r, s emptied: the account-signature digest.
Hash256 signing_hash(const CrosschainTransaction& tx);

/// Signs this node only; subordinates are covered as encoded. Throws AlreadySigned.
CrosschainTransaction sign_tx(CrosschainTransaction tx, const crypto::secp256k1::AccountKey& key);
/// Signs every node bottom-up, so each parent's signature covers the signed children.
CrosschainTransaction sign_tree(CrosschainTransaction tx, const crypto::secp256k1::AccountKey& key);

/// Throws WireError(InvalidSignature).
Address recover_signer(const CrosschainTransaction& tx);

/// nullopt when every node recovers to the root's signer; otherwise a description of the first violation.
std::optional<std::string> common_signer_violation(const CrosschainTransaction& tx);

}  // namespace xchain::wire
