#include "xchain/coord/coordination.hpp"

#include "xchain/crypto/keccak.hpp"
#include "xchain/wire/rlp.hpp"

namespace xchain::coord {

using Code = CoordinationError::Code;

const char* to_string(EntryState s) {
  switch (s) {
    case EntryState::Started:
      return "Started";
    case EntryState::Committed:
      return "Committed";
    case EntryState::Ignored:
      return "Ignored";
  }
  return "?";
}

const char* to_string(EffectiveStatus s) {
  switch (s) {
    case EffectiveStatus::Started:
      return "Started";
    case EffectiveStatus::Committed:
      return "Committed";
    case EffectiveStatus::Ignored:
      return "Ignored";
    case EffectiveStatus::TimedOut:
      return "TimedOut";
  }
  return "?";
}

const char* to_string(Code c) {
  switch (c) {
    case Code::Replay:
      return "replay";
    case Code::BadSignature:
      return "bad-signature";
    case Code::TimeoutTooLarge:
      return "timeout-too-large";
    case Code::UnknownEntry:
      return "unknown-entry";
    case Code::AlreadyTerminal:
      return "already-terminal";
    case Code::TimedOut:
      return "timed-out";
    case Code::BadAuthorization:
      return "bad-authorization";
    case Code::UnknownSidechain:
      return "unknown-sidechain";
    case Code::AlreadyRegistered:
      return "already-registered";
    case Code::WrongKind:
      return "wrong-kind";
    case Code::WrongContract:
      return "wrong-contract";
  }
  return "?";
}

EffectiveStatus effective_status(const CoordinationEntry& entry, std::uint64_t at_block) {
  switch (entry.state) {
    case EntryState::Committed:
      return EffectiveStatus::Committed;
    case EntryState::Ignored:
      return EffectiveStatus::Ignored;
    case EntryState::Started:
      return at_block > entry.timeout_block ? EffectiveStatus::TimedOut : EffectiveStatus::Started;
  }
  return EffectiveStatus::Started;
}

CoordinationChain::CoordinationChain(CoordinationConfig config,
                                     std::shared_ptr<const crypto::threshold::SignatureScheme> scheme)
    : config_(std::move(config)), scheme_(std::move(scheme)) {}

Bytes CoordinationChain::key_update_message(const wire::SidechainId& sidechain, ByteView new_key) {
  using wire::RlpItem;
  Hash256 h = crypto::keccak256(wire::rlp_encode(RlpItem::list(
      {RlpItem::string(to_bytes("key-update")), RlpItem::uint(sidechain.value),
       RlpItem::string(Bytes(new_key.begin(), new_key.end()))})));
  return Bytes(h.data.begin(), h.data.end());
}

void CoordinationChain::register_pubkey(const wire::SidechainId& sidechain, const Bytes& new_key,
                                        const std::optional<Bytes>& authorization) {
  auto it = keys_.find(sidechain);
  if (!authorization) {
    if (it != keys_.end()) throw CoordinationError(Code::AlreadyRegistered, "bootstrap refused: key already set");
    keys_[sidechain] = KeyRecord{new_key, std::nullopt, 0};
    return;
  }
  if (it == keys_.end()) throw CoordinationError(Code::UnknownSidechain, "no key registered for " + sidechain.hex());
  if (!scheme_->verify(it->second.current, key_update_message(sidechain, new_key), *authorization)) {
    throw CoordinationError(Code::BadAuthorization, "key update not signed by the current key");
  }
  it->second.previous = it->second.current;
  it->second.previous_expiry = block_number_ + config_.grace_window;
  it->second.current = new_key;
}

std::optional<Bytes> CoordinationChain::current_key(const wire::SidechainId& sidechain) const {
  auto it = keys_.find(sidechain);
  if (it == keys_.end()) return std::nullopt;
  return it->second.current;
}

bool CoordinationChain::verify_signed_by(const wire::SidechainId& sidechain, ByteView message,
                                         ByteView signature) const {
  auto it = keys_.find(sidechain);
  if (it == keys_.end()) return false;
  if (scheme_->verify(it->second.current, message, signature)) return true;
  return it->second.previous && block_number_ <= it->second.previous_expiry &&
         scheme_->verify(*it->second.previous, message, signature);
}

void CoordinationChain::check_envelope(const wire::ThresholdMessage& msg, wire::MessageKind expected) const {
  if (msg.kind != expected) throw CoordinationError(Code::WrongKind, std::string("expected ") + wire::to_string(expected));
  if (msg.coordination_chain != config_.chain_id || msg.coordination_contract != config_.contract_address) {
    throw CoordinationError(Code::WrongContract, "message addressed to another coordination contract");
  }
}

void CoordinationChain::check_signature(const wire::ThresholdMessage& msg, ByteView signature) const {
  if (!verify_signed_by(msg.originating_sidechain, wire::encode_message(msg), signature)) {
    throw CoordinationError(Code::BadSignature, "threshold signature does not verify under the originating key");
  }
}

void CoordinationChain::start(const wire::ThresholdMessage& msg, ByteView signature) {
  check_envelope(msg, wire::MessageKind::Start);
  Hash256 key = wire::coordination_key(msg.tx_id, msg.originating_sidechain);
  if (entries_.count(key) != 0) throw CoordinationError(Code::Replay, "entry already exists");
  if (msg.timeout_blocks > config_.max_timeout_blocks) {
    throw CoordinationError(Code::TimeoutTooLarge, "timeout exceeds configured maximum");
  }
  check_signature(msg, signature);
  entries_[key] = CoordinationEntry{key, msg.ref(), EntryState::Started, block_number_,
                                    block_number_ + msg.timeout_blocks};
}

void CoordinationChain::finish(const wire::ThresholdMessage& msg, ByteView signature, wire::MessageKind kind,
                               EntryState target) {
  check_envelope(msg, kind);
  Hash256 key = wire::coordination_key(msg.tx_id, msg.originating_sidechain);
  auto it = entries_.find(key);
  if (it == entries_.end()) throw CoordinationError(Code::UnknownEntry, "no such crosschain transaction");
  check_signature(msg, signature);
  if (it->second.state != EntryState::Started) {
    throw CoordinationError(Code::AlreadyTerminal, std::string("entry already ") + to_string(it->second.state));
  }
  if (block_number_ > it->second.timeout_block) throw CoordinationError(Code::TimedOut, "past timeout block");
  it->second.state = target;
}

void CoordinationChain::commit(const wire::ThresholdMessage& msg, ByteView signature) {
  finish(msg, signature, wire::MessageKind::Commit, EntryState::Committed);
}

void CoordinationChain::ignore(const wire::ThresholdMessage& msg, ByteView signature) {
  finish(msg, signature, wire::MessageKind::Ignore, EntryState::Ignored);
}

const CoordinationEntry* CoordinationChain::find(const Hash256& key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

EffectiveStatus CoordinationChain::effective_status(const Hash256& key, std::uint64_t at_block) const {
  const auto* e = find(key);
  if (!e) throw CoordinationError(Code::UnknownEntry, "no such crosschain transaction");
  return coord::effective_status(*e, at_block);
}

}  // namespace xchain::coord
