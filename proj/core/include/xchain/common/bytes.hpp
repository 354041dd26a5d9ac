#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace xchain {

using Byte = std::uint8_t;
using Bytes = std::vector<Byte>;
using ByteView = std::span<const Byte>;

/// Protocol-level 256-bit unsigned integer (identifiers, balances, storage words).
using U256 = boost::multiprecision::uint256_t;
/// Signed companion used for balance deltas.
using I256 = boost::multiprecision::int256_t;

std::string to_hex(ByteView bytes, bool prefix = true);
/// Accepts an optional 0x prefix; throws std::invalid_argument on odd length or bad digits.
Bytes from_hex(std::string_view hex);

/// Fixed-width big-endian encoding; throws std::overflow_error if the value does not fit.
Bytes u256_to_be(const U256& value, std::size_t width = 32);
/// Minimal big-endian encoding (zero encodes as the empty string), as used by RLP scalars.
Bytes u256_to_minimal_be(const U256& value);
U256 u256_from_be(ByteView bytes);
/// Parses decimal or 0x-prefixed hex.
U256 parse_u256(std::string_view text);
std::string u256_to_hex(const U256& value);

template <std::size_t N>
struct FixedBytes {
  std::array<Byte, N> data{};

  static constexpr std::size_t size() { return N; }
  ByteView view() const { return ByteView(data.data(), N); }
  bool is_zero() const {
    for (Byte b : data) {
      if (b != 0) return false;
    }
    return true;
  }
  std::string hex() const { return to_hex(view()); }

  static FixedBytes from_view(ByteView bytes) {
    if (bytes.size() != N) {
      throw std::invalid_argument("fixed-width value has wrong length: expected " +
                                  std::to_string(N) + ", got " + std::to_string(bytes.size()));
    }
    FixedBytes out;
    std::copy(bytes.begin(), bytes.end(), out.data.begin());
    return out;
  }
  static FixedBytes from_hex(std::string_view hex) { return from_view(xchain::from_hex(hex)); }

  friend auto operator<=>(const FixedBytes&, const FixedBytes&) = default;
};

using Hash256 = FixedBytes<32>;
using Address = FixedBytes<20>;

inline void append(Bytes& out, ByteView more) { out.insert(out.end(), more.begin(), more.end()); }

inline Bytes to_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

}  // namespace xchain
