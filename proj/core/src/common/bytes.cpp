#include "xchain/common/bytes.hpp"

namespace xchain {
namespace {

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::string_view strip_prefix(std::string_view hex) {
  if (hex.size() >= 2 && hex[0] == '0' && (hex[1] == 'x' || hex[1] == 'X')) {
    hex.remove_prefix(2);
  }
  return hex;
}

}  // namespace

std::string to_hex(ByteView bytes, bool prefix) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2 + 2);
  if (prefix) out += "0x";
  for (Byte b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0f]);
  }
  return out;
}

Bytes from_hex(std::string_view hex) {
  hex = strip_prefix(hex);
  if (hex.size() % 2 != 0) throw std::invalid_argument("hex string has odd length");
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = hex_digit(hex[2 * i]);
    int lo = hex_digit(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw std::invalid_argument("invalid hex digit");
    out[i] = static_cast<Byte>((hi << 4) | lo);
  }
  return out;
}

Bytes u256_to_be(const U256& value, std::size_t width) {
  Bytes out(width, 0);
  U256 v = value;
  for (std::size_t i = 0; i < width; ++i) {
    out[width - 1 - i] = static_cast<Byte>(v & 0xff);
    v >>= 8;
  }
  if (v != 0) throw std::overflow_error("value does not fit in " + std::to_string(width) + " bytes");
  return out;
}

Bytes u256_to_minimal_be(const U256& value) {
  Bytes out;
  U256 v = value;
  while (v != 0) {
    out.push_back(static_cast<Byte>(v & 0xff));
    v >>= 8;
  }
  return Bytes(out.rbegin(), out.rend());
}

U256 u256_from_be(ByteView bytes) {
  if (bytes.size() > 32) throw std::overflow_error("more than 32 bytes for a 256-bit value");
  U256 v = 0;
  for (Byte b : bytes) {
    v <<= 8;
    v |= b;
  }
  return v;
}

U256 parse_u256(std::string_view text) {
  if (text.empty()) throw std::invalid_argument("empty integer literal");
  std::string_view hex = strip_prefix(text);
  U256 v = 0;
  if (hex.size() != text.size()) {
    if (hex.empty() || hex.size() > 64) throw std::invalid_argument("bad hex integer literal");
    for (char c : hex) {
      int d = hex_digit(c);
      if (d < 0) throw std::invalid_argument("bad hex integer literal");
      v = (v << 4) | d;
    }
    return v;
  }
  for (char c : text) {
    if (c < '0' || c > '9') throw std::invalid_argument("bad decimal integer literal");
    U256 next = v * 10 + (c - '0');
    if (next / 10 != v) throw std::overflow_error("decimal literal exceeds 256 bits");
    v = next;
  }
  return v;
}

std::string u256_to_hex(const U256& value) {
  Bytes b = u256_to_minimal_be(value);
  if (b.empty()) return "0x0";
  std::string s = to_hex(b, false);
  if (s[0] == '0') s.erase(0, 1);
  return "0x" + s;
}

}  // namespace xchain
