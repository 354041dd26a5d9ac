#include "xchain/wire/rlp.hpp"

#include <limits>

namespace xchain::wire {
namespace {

void put_length(Bytes& out, std::size_t len, Byte short_base, Byte long_base) {
  if (len <= 55) {
    out.push_back(static_cast<Byte>(short_base + len));
    return;
  }
  Bytes be;
  for (std::size_t v = len; v != 0; v >>= 8) be.insert(be.begin(), static_cast<Byte>(v & 0xff));
  out.push_back(static_cast<Byte>(long_base + be.size()));
  append(out, be);
}

void encode_into(Bytes& out, const RlpItem& item) {
  if (!item.is_list) {
    if (item.bytes.size() == 1 && item.bytes[0] < 0x80) {
      out.push_back(item.bytes[0]);
      return;
    }
    put_length(out, item.bytes.size(), 0x80, 0xb7);
    append(out, item.bytes);
    return;
  }
  Bytes payload;
  for (const auto& child : item.items) encode_into(payload, child);
  put_length(out, payload.size(), 0xc0, 0xf7);
  append(out, payload);
}

struct Cursor {
  ByteView data;
  std::size_t pos = 0;

  std::size_t remaining() const { return data.size() - pos; }
  void need(std::size_t n) const {
    if (remaining() < n) throw RlpError("rlp: truncated input");
  }
};

std::size_t read_long_length(Cursor& c, std::size_t len_of_len) {
  c.need(len_of_len);
  if (c.data[c.pos] == 0) throw RlpError("rlp: length with leading zero");
  if (len_of_len > 8) throw RlpError("rlp: length too large");
  std::size_t len = 0;
  for (std::size_t i = 0; i < len_of_len; ++i) len = (len << 8) | c.data[c.pos + i];
  c.pos += len_of_len;
  if (len <= 55) throw RlpError("rlp: long form used for short payload");
  return len;
}

RlpItem decode_item(Cursor& c) {
  c.need(1);
  Byte prefix = c.data[c.pos++];
  if (prefix < 0x80) return RlpItem::string({prefix});
  if (prefix <= 0xbf) {
    std::size_t len = prefix <= 0xb7 ? prefix - 0x80 : read_long_length(c, prefix - 0xb7);
    c.need(len);
    Bytes b(c.data.begin() + c.pos, c.data.begin() + c.pos + len);
    c.pos += len;
    if (len == 1 && b[0] < 0x80) throw RlpError("rlp: single byte not encoded as itself");
    return RlpItem::string(std::move(b));
  }
  std::size_t len = prefix <= 0xf7 ? prefix - 0xc0 : read_long_length(c, prefix - 0xf7);
  c.need(len);
  Cursor inner{c.data.subspan(c.pos, len)};
  c.pos += len;
  RlpItem out = RlpItem::list({});
  while (inner.remaining() > 0) out.items.push_back(decode_item(inner));
  return out;
}

}  // namespace

Bytes rlp_encode(const RlpItem& item) {
  Bytes out;
  encode_into(out, item);
  return out;
}

RlpItem rlp_decode(ByteView data) {
  Cursor c{data};
  RlpItem item = decode_item(c);
  if (c.remaining() != 0) throw RlpError("rlp: trailing bytes after item");
  return item;
}

U256 rlp_to_uint(const RlpItem& item) {
  if (item.is_list) throw RlpError("rlp: expected scalar, found list");
  if (item.bytes.size() > 32) throw RlpError("rlp: scalar exceeds 256 bits");
  if (!item.bytes.empty() && item.bytes[0] == 0) throw RlpError("rlp: scalar with leading zero");
  return u256_from_be(item.bytes);
}

std::uint64_t rlp_to_u64(const RlpItem& item) {
  U256 v = rlp_to_uint(item);
  if (v > std::numeric_limits<std::uint64_t>::max()) throw RlpError("rlp: scalar exceeds 64 bits");
  return static_cast<std::uint64_t>(v);
}

}  // namespace xchain::wire
