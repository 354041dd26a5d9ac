#include "xchain/wire/types.hpp"

#include "xchain/crypto/keccak.hpp"
#include "xchain/wire/rlp.hpp"

namespace xchain::wire {

SidechainClass SidechainId::classify() const {
  if (value <= 0xFFFF) return SidechainClass::EthereumChainId;
  if ((value >> 248) == 0xFF) return SidechainClass::PrivateSidechain;
  return SidechainClass::Reserved;
}

SidechainId SidechainId::private_sidechain(std::uint64_t k) { return {(U256(0xFF) << 248) + k}; }

Hash256 coordination_key(const CrosschainTxId& tx_id, const SidechainId& originating) {
  return crypto::keccak256(rlp_encode(RlpItem::list({RlpItem::uint(tx_id), RlpItem::uint(originating.value)})));
}

}  // namespace xchain::wire
