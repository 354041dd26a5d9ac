#pragma once

#include <stdexcept>
#include <vector>

#include "xchain/common/bytes.hpp"

// Recursive Length Prefix encoding as used by Ethereum.
namespace xchain::wire {

class RlpError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RlpItem {
  bool is_list = false;
  Bytes bytes;
  std::vector<RlpItem> items;

  static RlpItem string(Bytes b) { return RlpItem{false, std::move(b), {}}; }
  static RlpItem list(std::vector<RlpItem> items) { return RlpItem{true, {}, std::move(items)}; }
  static RlpItem uint(const U256& v) { return string(u256_to_minimal_be(v)); }

  friend bool operator==(const RlpItem&, const RlpItem&) = default;
};

Bytes rlp_encode(const RlpItem& item);

/// Strict decode: rejects non-canonical length prefixes and trailing bytes.
RlpItem rlp_decode(ByteView data);

/// Canonical scalar: no leading zero bytes, at most 32 bytes.
U256 rlp_to_uint(const RlpItem& item);
std::uint64_t rlp_to_u64(const RlpItem& item);

}  // namespace xchain::wire
