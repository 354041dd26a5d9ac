#include "xchain/wire/transaction.hpp"

#include "xchain/crypto/keccak.hpp"

namespace xchain::wire {
namespace {

constexpr std::size_t kFieldCount = 17;

void check_id(const SidechainId& id, const char* field) {
  if (id.is_reserved()) {
    throw WireError(WireError::Code::ReservedSidechain, std::string(field) + " is in the reserved range: " + id.hex());
  }
}

void validate_node(const CrosschainTransaction& tx, bool is_root, bool under_view) {
  if (is_root != (tx.type == TxType::Originating)) {
    throw WireError(WireError::Code::Nesting, "originating transaction must appear only at the root");
  }
  if (under_view && tx.type != TxType::SubordinateView) {
    throw WireError(WireError::Code::Nesting, "subordinate views may contain only subordinate views");
  }
  if (tx.timeout_blocks.has_value() != (tx.type == TxType::Originating)) {
    throw WireError(WireError::Code::Malformed, "timeout present iff originating");
  }
  if (tx.target_sidechain.has_value() == (tx.type == TxType::Originating)) {
    throw WireError(WireError::Code::Malformed, "target sidechain present iff subordinate");
  }
  check_id(tx.coordination_chain, "coordination chain id");
  check_id(tx.originating_sidechain, "originating sidechain id");
  if (tx.target_sidechain) check_id(*tx.target_sidechain, "target sidechain id");
  for (const auto& sub : tx.subordinates) validate_node(sub, false, under_view || tx.is_view());
}

Bytes fixed(const RlpItem& item, std::size_t width, const char* what) {
  if (item.is_list || item.bytes.size() != width) {
    throw WireError(WireError::Code::Malformed, std::string("bad ") + what + " width");
  }
  return item.bytes;
}

SidechainId read_id(const RlpItem& item) {
  SidechainId id{rlp_to_uint(item)};
  check_id(id, "sidechain id");
  return id;
}

bool is_empty_string(const RlpItem& item) { return !item.is_list && item.bytes.empty(); }

}  // namespace

const char* to_string(TxType t) {
  switch (t) {
    case TxType::Originating:
      return "originating";
    case TxType::SubordinateTx:
      return "subordinate-tx";
    case TxType::SubordinateView:
      return "subordinate-view";
  }
  return "?";
}

void validate_tree(const CrosschainTransaction& tx) { validate_node(tx, true, false); }

RlpItem to_rlp_item(const CrosschainTransaction& tx) {
  std::vector<RlpItem> subs;
  for (const auto& s : tx.subordinates) subs.push_back(to_rlp_item(s));
  return RlpItem::list({
      RlpItem::uint(static_cast<unsigned>(tx.type)),
      RlpItem::uint(tx.coordination_chain.value),
      RlpItem::string(Bytes(tx.coordination_contract.data.begin(), tx.coordination_contract.data.end())),
      tx.timeout_blocks ? RlpItem::uint(*tx.timeout_blocks) : RlpItem::string({}),
      RlpItem::uint(tx.tx_id),
      RlpItem::uint(tx.originating_sidechain.value),
      tx.target_sidechain ? RlpItem::uint(tx.target_sidechain->value) : RlpItem::string({}),
      RlpItem::uint(tx.nonce),
      RlpItem::uint(tx.gas_price),
      RlpItem::uint(tx.gas_limit),
      RlpItem::string(Bytes(tx.to.data.begin(), tx.to.data.end())),
      RlpItem::uint(tx.value),
      RlpItem::string(tx.data),
      RlpItem::list(std::move(subs)),
      RlpItem::uint(tx.sig_v),
      RlpItem::uint(tx.sig_r),
      RlpItem::uint(tx.sig_s),
  });
}

CrosschainTransaction from_rlp_item(const RlpItem& item, bool is_root) {
  try {
    if (!item.is_list || item.items.size() != kFieldCount) {
      throw WireError(WireError::Code::Malformed, "transaction must be a 17-element list");
    }
    const auto& f = item.items;
    CrosschainTransaction tx;
    U256 tag = rlp_to_uint(f[0]);
    if (tag > 2) throw WireError(WireError::Code::UnknownType, "unknown tx type tag " + u256_to_hex(tag));
    tx.type = static_cast<TxType>(static_cast<unsigned>(tag));
    tx.coordination_chain = read_id(f[1]);
    tx.coordination_contract = Address::from_view(fixed(f[2], 20, "contract address"));
    if (tx.type == TxType::Originating) {
      tx.timeout_blocks = rlp_to_u64(f[3]);
    } else if (!is_empty_string(f[3])) {
      throw WireError(WireError::Code::Malformed, "timeout on subordinate");
    }
    tx.tx_id = rlp_to_uint(f[4]);
    tx.originating_sidechain = read_id(f[5]);
    if (tx.type != TxType::Originating) {
      tx.target_sidechain = read_id(f[6]);
    } else if (!is_empty_string(f[6])) {
      throw WireError(WireError::Code::Malformed, "target sidechain on originating transaction");
    }
    tx.nonce = rlp_to_uint(f[7]);
    tx.gas_price = rlp_to_uint(f[8]);
    tx.gas_limit = rlp_to_uint(f[9]);
    tx.to = Address::from_view(fixed(f[10], 20, "to address"));
    tx.value = rlp_to_uint(f[11]);
    if (f[12].is_list) throw WireError(WireError::Code::Malformed, "data must be a byte string");
    tx.data = f[12].bytes;
    if (!f[13].is_list) throw WireError(WireError::Code::Malformed, "subordinates must be a list");
    for (const auto& s : f[13].items) tx.subordinates.push_back(from_rlp_item(s, false));
    tx.sig_v = rlp_to_uint(f[14]);
    tx.sig_r = rlp_to_uint(f[15]);
    tx.sig_s = rlp_to_uint(f[16]);
    if (is_root) validate_tree(tx);
    return tx;
  } catch (const RlpError& e) {
    throw WireError(WireError::Code::Malformed, e.what());
  }
}

Bytes rlp_encode(const CrosschainTransaction& tx) {
  validate_tree(tx);
  return rlp_encode(to_rlp_item(tx));
}

CrosschainTransaction rlp_decode_tx(ByteView bytes) {
  RlpItem item;
  try {
    item = rlp_decode(bytes);
  } catch (const RlpError& e) {
    throw WireError(WireError::Code::Malformed, e.what());
  }
  return from_rlp_item(item, true);
}

Hash256 tx_hash(const CrosschainTransaction& tx) { return crypto::keccak256(rlp_encode(to_rlp_item(tx))); }

Hash256 signing_hash(const CrosschainTransaction& tx) {
  RlpItem item = to_rlp_item(tx);
  for (std::size_t i = 14; i < kFieldCount; ++i) item.items[i] = RlpItem::string({});
  return crypto::keccak256(rlp_encode(item));
}

CrosschainTransaction sign_tx(CrosschainTransaction tx, const crypto::secp256k1::AccountKey& key) {
  if (tx.is_signed()) throw WireError(WireError::Code::AlreadySigned, "transaction already signed");
  auto sig = key.sign(signing_hash(tx));
  tx.sig_v = sig.v;
  tx.sig_r = u256_from_be(sig.r.view());
  tx.sig_s = u256_from_be(sig.s.view());
  return tx;
}

CrosschainTransaction sign_tree(CrosschainTransaction tx, const crypto::secp256k1::AccountKey& key) {
  for (auto& sub : tx.subordinates) sub = sign_tree(std::move(sub), key);
  return sign_tx(std::move(tx), key);
}

Address recover_signer(const CrosschainTransaction& tx) {
  if (!tx.is_signed()) throw WireError(WireError::Code::InvalidSignature, "transaction is not signed");
  if (tx.sig_v > 255) {
    throw WireError(WireError::Code::InvalidSignature, "signature component out of range");
  }
  crypto::secp256k1::RecoverableSignature sig;
  sig.v = static_cast<std::uint8_t>(tx.sig_v);
  sig.r = Hash256::from_view(u256_to_be(tx.sig_r));
  sig.s = Hash256::from_view(u256_to_be(tx.sig_s));
  auto addr = crypto::secp256k1::recover_address(signing_hash(tx), sig);
  if (!addr) throw WireError(WireError::Code::InvalidSignature, "signature does not recover");
  return *addr;
}

std::optional<std::string> common_signer_violation(const CrosschainTransaction& tx) {
  Address root = recover_signer(tx);
  std::vector<const CrosschainTransaction*> stack;
  for (const auto& s : tx.subordinates) stack.push_back(&s);
  while (!stack.empty()) {
    const auto* node = stack.back();
    stack.pop_back();
    Address signer;
    try {
      signer = recover_signer(*node);
    } catch (const WireError& e) {
      return std::string("subordinate signature invalid: ") + e.what();
    }
    if (signer != root) return "subordinate signed by " + signer.hex() + ", root by " + root.hex();
    for (const auto& s : node->subordinates) stack.push_back(&s);
  }
  return std::nullopt;
}

}  // namespace xchain::wire
