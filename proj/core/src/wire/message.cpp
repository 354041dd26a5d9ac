#include "xchain/wire/message.hpp"

namespace xchain::wire {
namespace {

std::size_t field_count(MessageKind k) {
  switch (k) {
    case MessageKind::Start:
      return 6;
    case MessageKind::Commit:
    case MessageKind::Ignore:
      return 5;
    case MessageKind::SubordinateTxReady:
      return 7;
    case MessageKind::SubordinateViewResult:
      return 9;
  }
  return 0;
}

RlpItem bytes_item(ByteView b) { return RlpItem::string(Bytes(b.begin(), b.end())); }

Bytes fixed(const RlpItem& item, std::size_t width) {
  if (item.is_list || item.bytes.size() != width) throw WireError(WireError::Code::Malformed, "bad fixed-width field");
  return item.bytes;
}

SidechainId read_id(const RlpItem& item) {
  SidechainId id{rlp_to_uint(item)};
  if (id.is_reserved()) throw WireError(WireError::Code::ReservedSidechain, "reserved sidechain id " + id.hex());
  return id;
}

ThresholdMessage base(MessageKind kind, const TxRef& ref) {
  ThresholdMessage m;
  m.kind = kind;
  m.originating_sidechain = ref.originating;
  m.tx_id = ref.tx_id;
  m.coordination_chain = ref.coordination_chain;
  m.coordination_contract = ref.coordination_contract;
  return m;
}

}  // namespace

const char* to_string(MessageKind k) {
  switch (k) {
    case MessageKind::Start:
      return "start";
    case MessageKind::Commit:
      return "commit";
    case MessageKind::Ignore:
      return "ignore";
    case MessageKind::SubordinateTxReady:
      return "subordinate-tx-ready";
    case MessageKind::SubordinateViewResult:
      return "subordinate-view-result";
  }
  return "?";
}

ThresholdMessage ThresholdMessage::start(const TxRef& ref, std::uint64_t timeout_blocks) {
  auto m = base(MessageKind::Start, ref);
  m.timeout_blocks = timeout_blocks;
  return m;
}
ThresholdMessage ThresholdMessage::commit(const TxRef& ref) { return base(MessageKind::Commit, ref); }
ThresholdMessage ThresholdMessage::ignore(const TxRef& ref) { return base(MessageKind::Ignore, ref); }

ThresholdMessage ThresholdMessage::subordinate_tx_ready(const TxRef& ref, const SidechainId& executing,
                                                        const Hash256& hash) {
  auto m = base(MessageKind::SubordinateTxReady, ref);
  m.executing_sidechain = executing;
  m.transaction_hash = hash;
  return m;
}

ThresholdMessage ThresholdMessage::subordinate_view_result(const TxRef& ref, const SidechainId& executing,
                                                           std::uint64_t block_number, const Hash256& view_hash,
                                                           Bytes result) {
  auto m = base(MessageKind::SubordinateViewResult, ref);
  m.executing_sidechain = executing;
  m.block_number = block_number;
  m.view_hash = view_hash;
  m.result = std::move(result);
  return m;
}

Bytes encode_message(const ThresholdMessage& msg) {
  std::vector<RlpItem> items{
      RlpItem::uint(static_cast<unsigned>(msg.kind)),
      RlpItem::uint(msg.originating_sidechain.value),
      RlpItem::uint(msg.tx_id),
      RlpItem::uint(msg.coordination_chain.value),
      bytes_item(msg.coordination_contract.view()),
  };
  switch (msg.kind) {
    case MessageKind::Start:
      items.push_back(RlpItem::uint(msg.timeout_blocks));
      break;
    case MessageKind::Commit:
    case MessageKind::Ignore:
      break;
    case MessageKind::SubordinateTxReady:
      items.push_back(RlpItem::uint(msg.executing_sidechain.value));
      items.push_back(bytes_item(msg.transaction_hash.view()));
      break;
    case MessageKind::SubordinateViewResult:
      items.push_back(RlpItem::uint(msg.executing_sidechain.value));
      items.push_back(RlpItem::uint(msg.block_number));
      items.push_back(bytes_item(msg.view_hash.view()));
      items.push_back(RlpItem::string(msg.result));
      break;
  }
  return rlp_encode(RlpItem::list(std::move(items)));
}

ThresholdMessage decode_message(ByteView bytes) {
  try {
    RlpItem item = rlp_decode(bytes);
    if (!item.is_list || item.items.empty()) throw WireError(WireError::Code::Malformed, "message must be a list");
    const auto& f = item.items;
    U256 tag = rlp_to_uint(f[0]);
    if (tag > 4) throw WireError(WireError::Code::UnknownType, "unknown message kind " + u256_to_hex(tag));
    ThresholdMessage m;
    m.kind = static_cast<MessageKind>(static_cast<unsigned>(tag));
    if (f.size() != field_count(m.kind)) {
      throw WireError(WireError::Code::KindMismatch, std::string("wrong field count for ") + to_string(m.kind));
    }
    m.originating_sidechain = read_id(f[1]);
    m.tx_id = rlp_to_uint(f[2]);
    m.coordination_chain = read_id(f[3]);
    m.coordination_contract = Address::from_view(fixed(f[4], 20));
    switch (m.kind) {
      case MessageKind::Start:
        m.timeout_blocks = rlp_to_u64(f[5]);
        break;
      case MessageKind::Commit:
      case MessageKind::Ignore:
        break;
      case MessageKind::SubordinateTxReady:
        m.executing_sidechain = read_id(f[5]);
        m.transaction_hash = Hash256::from_view(fixed(f[6], 32));
        break;
      case MessageKind::SubordinateViewResult:
        m.executing_sidechain = read_id(f[5]);
        m.block_number = rlp_to_u64(f[6]);
        m.view_hash = Hash256::from_view(fixed(f[7], 32));
        if (f[8].is_list) throw WireError(WireError::Code::Malformed, "result must be a byte string");
        m.result = f[8].bytes;
        break;
    }
    return m;
  } catch (const RlpError& e) {
    throw WireError(WireError::Code::Malformed, e.what());
  }
}

}  // namespace xchain::wire
