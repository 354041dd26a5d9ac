#include "xchain/ledger/handler.hpp"

#include <algorithm>

#include "xchain/crypto/keccak.hpp"
#include "xchain/wire/rlp.hpp"

namespace xchain::ledger {

const Function* HandlerDef::find(ByteView sel) const {
  for (const auto& f : functions) {
    auto s = selector(f.signature);
    if (std::equal(s.begin(), s.end(), sel.begin(), sel.end())) return &f;
  }
  return nullptr;
}

void HandlerRegistry::add(HandlerDef def) {
  std::string id = def.id;
  if (!handlers_.emplace(id, std::move(def)).second) {
    throw std::invalid_argument("handler already registered: " + id);
  }
}

const HandlerDef* HandlerRegistry::find(std::string_view id) const {
  auto it = handlers_.find(id);
  return it == handlers_.end() ? nullptr : &it->second;
}

std::vector<std::string> HandlerRegistry::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, _] : handlers_) out.push_back(id);
  return out;
}

HandlerRegistry HandlerRegistry::with_builtins() {
  HandlerRegistry r;
  register_builtin_handlers(r);
  return r;
}

std::array<Byte, 4> selector(std::string_view signature) {
  Hash256 h = crypto::keccak256(signature);
  return {h.data[0], h.data[1], h.data[2], h.data[3]};
}

Bytes encode_call(std::string_view signature, const Args& args) {
  auto sel = selector(signature);
  Bytes out(sel.begin(), sel.end());
  std::vector<wire::RlpItem> items;
  for (const auto& a : args) items.push_back(wire::RlpItem::string(a));
  append(out, wire::rlp_encode(wire::RlpItem::list(std::move(items))));
  return out;
}

std::pair<std::array<Byte, 4>, Args> decode_call(ByteView data) {
  if (data.size() < 4) throw Revert("call data shorter than a selector");
  std::array<Byte, 4> sel{data[0], data[1], data[2], data[3]};
  Args args;
  ByteView rest = data.subspan(4);
  if (rest.empty()) return {sel, args};
  wire::RlpItem item;
  try {
    item = wire::rlp_decode(rest);
  } catch (const wire::RlpError& e) {
    throw Revert(std::string("malformed call arguments: ") + e.what());
  }
  if (!item.is_list) throw Revert("call arguments must be a list");
  for (const auto& a : item.items) {
    if (a.is_list) throw Revert("nested call argument");
    args.push_back(a.bytes);
  }
  return {sel, args};
}

Bytes encode_word(const U256& value) { return u256_to_minimal_be(value); }

Bytes encode_address(const Address& a) { return Bytes(a.data.begin(), a.data.end()); }

U256 arg_word(const Args& args, std::size_t i) {
  if (i >= args.size()) throw Revert("missing argument " + std::to_string(i));
  if (args[i].size() > 32) throw Revert("argument " + std::to_string(i) + " wider than a word");
  return u256_from_be(args[i]);
}

Address arg_address(const Args& args, std::size_t i) {
  if (i >= args.size()) throw Revert("missing argument " + std::to_string(i));
  if (args[i].size() != 20) throw Revert("argument " + std::to_string(i) + " is not an address");
  return Address::from_view(args[i]);
}

U256 decode_word(ByteView output) {
  if (output.size() > 32) throw Revert("output wider than a word");
  return u256_from_be(output);
}

Address word_to_address(const U256& w) {
  Bytes b = u256_to_be(w & ((U256(1) << 160) - 1), 32);
  return Address::from_view(ByteView(b).subspan(12));
}

U256 address_to_word(const Address& a) { return u256_from_be(a.view()); }

}  // namespace xchain::ledger
