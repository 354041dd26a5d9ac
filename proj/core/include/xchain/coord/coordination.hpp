#pragma once

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>

#include "xchain/crypto/threshold.hpp"
#include "xchain/wire/message.hpp"

namespace xchain::coord {

enum class EntryState { Started, Committed, Ignored };
enum class EffectiveStatus { Started, Committed, Ignored, TimedOut };

const char* to_string(EntryState s);
const char* to_string(EffectiveStatus s);

struct CoordinationEntry {
  Hash256 key;
  wire::TxRef ref;
  EntryState state = EntryState::Started;
  std::uint64_t start_block = 0;
  std::uint64_t timeout_block = 0;
};

/// Started entries past their timeout block report TimedOut; terminal states report themselves.
EffectiveStatus effective_status(const CoordinationEntry& entry, std::uint64_t at_block);

class CoordinationError : public std::runtime_error {
 public:
  enum class Code {
    Replay,
    BadSignature,
    TimeoutTooLarge,
    UnknownEntry,
    AlreadyTerminal,
    TimedOut,
    BadAuthorization,
    UnknownSidechain,
    AlreadyRegistered,
    WrongKind,
    WrongContract,
  };

  CoordinationError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

const char* to_string(CoordinationError::Code c);

struct CoordinationConfig {
  wire::SidechainId chain_id;
  Address contract_address;
  std::uint64_t max_timeout_blocks = 100;
  /// Blocks during which a rotated-out key still verifies.
  std::uint64_t grace_window = 16;
};

/// Deterministic model of a coordination blockchain hosting one coordination contract.
class CoordinationChain {
 public:
  CoordinationChain(CoordinationConfig config, std::shared_ptr<const crypto::threshold::SignatureScheme> scheme);

  const CoordinationConfig& config() const { return config_; }
  std::uint64_t block_number() const { return block_number_; }
  void advance_block(std::uint64_t n = 1) { block_number_ += n; }

  /// Digest a rotation authorization signs: keccak256(rlp["key-update", sidechain, new key]).
  static Bytes key_update_message(const wire::SidechainId& sidechain, ByteView new_key);

  /// authorization == nullopt is a bootstrap, permitted only when the sidechain has no key.
  void register_pubkey(const wire::SidechainId& sidechain, const Bytes& new_key,
                       const std::optional<Bytes>& authorization);
  std::optional<Bytes> current_key(const wire::SidechainId& sidechain) const;
  /// True if the signature verifies under the current key, or the previous key within its grace window.
  bool verify_signed_by(const wire::SidechainId& sidechain, ByteView message, ByteView signature) const;

  void start(const wire::ThresholdMessage& msg, ByteView signature);
  void commit(const wire::ThresholdMessage& msg, ByteView signature);
  void ignore(const wire::ThresholdMessage& msg, ByteView signature);

  const CoordinationEntry* find(const Hash256& key) const;
  /// Throws UnknownEntry.
  EffectiveStatus effective_status(const Hash256& key, std::uint64_t at_block) const;
  EffectiveStatus effective_status(const Hash256& key) const { return effective_status(key, block_number_); }

  const std::map<Hash256, CoordinationEntry>& entries() const { return entries_; }

 private:
  struct KeyRecord {
    Bytes current;
    std::optional<Bytes> previous;
    std::uint64_t previous_expiry = 0;
  };

  void check_envelope(const wire::ThresholdMessage& msg, wire::MessageKind expected) const;
  void check_signature(const wire::ThresholdMessage& msg, ByteView signature) const;
  void finish(const wire::ThresholdMessage& msg, ByteView signature, wire::MessageKind kind, EntryState target);

  CoordinationConfig config_;
  std::shared_ptr<const crypto::threshold::SignatureScheme> scheme_;
  std::uint64_t block_number_ = 0;
  std::map<Hash256, CoordinationEntry> entries_;
  std::map<wire::SidechainId, KeyRecord> keys_;
};

}  // namespace xchain::coord
