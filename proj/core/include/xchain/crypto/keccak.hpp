#pragma once

#include <array>
#include <cstdint>

#include "xchain/common/bytes.hpp"

namespace xchain::crypto {

/// Incremental Keccak-256 with the original (pre-SHA3) 0x01 padding used by Ethereum.
class Keccak256 {
 public:
  Keccak256& update(ByteView data);
  Hash256 finalize();

 private:
  static constexpr std::size_t kRate = 136;

  void absorb_block();

  std::array<std::uint64_t, 25> state_{};
  std::array<Byte, kRate> buffer_{};
  std::size_t buffered_ = 0;
};

Hash256 keccak256(ByteView data);
Hash256 keccak256(std::string_view text);

}  // namespace xchain::crypto
