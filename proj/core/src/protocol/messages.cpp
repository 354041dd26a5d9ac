#include "xchain/protocol/messages.hpp"

#include "xchain/crypto/keccak.hpp"

namespace xchain::protocol {

namespace {

Hash256 digest_of(std::string_view tag, const std::vector<wire::RlpItem>& fields) {
  std::vector<wire::RlpItem> items;
  items.push_back(wire::RlpItem::string(Bytes(tag.begin(), tag.end())));
  items.insert(items.end(), fields.begin(), fields.end());
  return crypto::keccak256(wire::rlp_encode(wire::RlpItem::list(std::move(items))));
}

wire::RlpItem str(std::string_view s) { return wire::RlpItem::string(Bytes(s.begin(), s.end())); }
wire::RlpItem num(std::uint64_t v) { return wire::RlpItem::string(u256_to_minimal_be(U256(v))); }
wire::RlpItem bytes(ByteView b) { return wire::RlpItem::string(Bytes(b.begin(), b.end())); }
wire::RlpItem ref_item(const wire::TxRef& r) {
  return bytes(coordination_key(r.tx_id, r.originating).view());
}

}  // namespace

Hash256 TxOutcome::digest() const {
  return digest_of("outcome", {ref_item(ref), num(committed ? 1 : 0), str(reason)});
}

Hash256 SignRequest::digest() const {
  return digest_of("sign-request", {num(request), bytes(wire::encode_message(msg))});
}

Hash256 SignResponse::digest() const { return digest_of("sign-share", {num(request), num(index), bytes(share)}); }

sim::MessagePtr SignResponse::corrupted(std::uint64_t seed) const {
  auto copy = std::make_shared<SignResponse>(*this);
  if (copy->share.empty()) copy->share.push_back(0);
  copy->share[seed % copy->share.size()] ^= static_cast<std::uint8_t>(1 + (seed >> 8) % 255);
  return copy;
}

Hash256 SignRefusal::digest() const { return digest_of("sign-refusal", {num(request), str(reason)}); }

Hash256 CoordinationSubmit::digest() const {
  return digest_of("coord-submit", {num(request), bytes(signed_msg.encoded()), bytes(signed_msg.signature)});
}

Hash256 CoordinationReceipt::digest() const {
  return digest_of("coord-receipt", {num(request), num(accepted ? 1 : 0), str(error)});
}

Hash256 ViewResponse::digest() const {
  return digest_of("view-response", {num(request), num(ok ? 1 : 0), bytes(result.encoded()), str(reason)});
}

Hash256 SubTxReady::digest() const { return digest_of("subtx-ready", {bytes(ready.encoded())}); }

Hash256 MineVote::digest() const { return digest_of("mine-vote", {num(request), num(accept ? 1 : 0), str(reason)}); }

Hash256 CheckCoordination::digest() const { return digest_of("check", {ref_item(ref), num(forward ? 1 : 0)}); }

}  // namespace xchain::protocol
