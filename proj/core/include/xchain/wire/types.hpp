#pragma once

#include <string>

#include "xchain/common/bytes.hpp"

namespace xchain::wire {

class WireError : public std::runtime_error {
 public:
  enum class Code { Malformed, UnknownType, Nesting, ReservedSidechain, AlreadySigned, InvalidSignature, KindMismatch };

  WireError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

enum class SidechainClass { EthereumChainId, Reserved, PrivateSidechain };

struct SidechainId {
  U256 value;

  /// Top byte 0xFF: private sidechains; values up to 0xFFFF: Ethereum chain ids; everything else reserved.
  SidechainClass classify() const;
  bool is_reserved() const { return classify() == SidechainClass::Reserved; }

  /// 0xFF00...00 + k.
  static SidechainId private_sidechain(std::uint64_t k);

  std::string hex() const { return u256_to_hex(value); }
  friend bool operator==(const SidechainId& a, const SidechainId& b) { return a.value == b.value; }
  friend bool operator<(const SidechainId& a, const SidechainId& b) { return a.value < b.value; }
};

using CrosschainTxId = U256;

/// Global reference for one crosschain transaction.
struct TxRef {
  CrosschainTxId tx_id;
  SidechainId originating;
  SidechainId coordination_chain;
  Address coordination_contract;

  friend bool operator==(const TxRef& a, const TxRef& b) {
    return a.tx_id == b.tx_id && a.originating == b.originating && a.coordination_chain == b.coordination_chain &&
           a.coordination_contract == b.coordination_contract;
  }
  friend bool operator<(const TxRef& a, const TxRef& b) {
    if (a.tx_id != b.tx_id) return a.tx_id < b.tx_id;
    if (!(a.originating == b.originating)) return a.originating < b.originating;
    if (!(a.coordination_chain == b.coordination_chain)) return a.coordination_chain < b.coordination_chain;
    return a.coordination_contract < b.coordination_contract;
  }
};

/// keccak256(rlp[tx_id, originating_sidechain_id]): the coordination contract's entry key.
Hash256 coordination_key(const CrosschainTxId& tx_id, const SidechainId& originating);

}  // namespace xchain::wire
