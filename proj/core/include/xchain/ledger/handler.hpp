#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "xchain/common/bytes.hpp"
#include "xchain/wire/types.hpp"

namespace xchain::ledger {

/// Raised by handler code to abort the current call.
class Revert : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A crosschain call made by a handler, in the shape recorded in the signed tree.
struct SubordinateCall {
  bool is_view = false;
  wire::SidechainId sidechain;
  Address to;
  U256 value;
  Bytes data;

  friend bool operator==(const SubordinateCall& a, const SubordinateCall& b) {
    return a.is_view == b.is_view && a.sidechain == b.sidechain && a.to == b.to && a.value == b.value &&
           a.data == b.data;
  }
};

/// Resolves crosschain calls for a running handler. Implementations either match against a signed
/// tree (CallFrame) or evaluate the call for real (dry-run builder, crosschain views).
class CrosschainCalls {
 public:
  virtual ~CrosschainCalls() = default;
  virtual Bytes view(const SubordinateCall& call) = 0;
  virtual void transaction(const SubordinateCall& call) = 0;
};

/// What a handler can see and do.
class Host {
 public:
  virtual ~Host() = default;

  virtual U256 sload(const U256& key) = 0;
  virtual void sstore(const U256& key, const U256& value) = 0;
  /// Contract balance including value received by this call and transfers made so far.
  virtual U256 self_balance() = 0;
  virtual void transfer(const Address& to, const U256& amount) = 0;

  virtual Address self() const = 0;
  virtual Address caller() const = 0;
  virtual U256 call_value() const = 0;
  virtual wire::SidechainId sidechain() const = 0;

  virtual Bytes call_subordinate_view(const wire::SidechainId& sidechain, const Address& to, ByteView data) = 0;
  virtual void emit_subordinate_tx(const wire::SidechainId& sidechain, const Address& to, ByteView data,
                                   const U256& value) = 0;
};

using Args = std::vector<Bytes>;
using FunctionBody = std::function<Bytes(Host&, const Args&)>;

struct Function {
  /// Canonical signature such as "buy(uint256)"; the selector is its first four keccak bytes.
  std::string signature;
  FunctionBody body;
};

struct HandlerDef {
  std::string id;
  std::vector<Function> functions;

  /// nullptr for an unknown selector.
  const Function* find(ByteView selector) const;
};

class HandlerRegistry {
 public:
  /// Throws std::invalid_argument on a duplicate id.
  void add(HandlerDef def);
  const HandlerDef* find(std::string_view id) const;
  std::vector<std::string> ids() const;

  /// Registry holding the shipped example handlers.
  static HandlerRegistry with_builtins();

 private:
  std::map<std::string, HandlerDef, std::less<>> handlers_;
};

void register_builtin_handlers(HandlerRegistry& registry);

// Call data is selector || rlp([arg...]) with every argument an RLP string.

std::array<Byte, 4> selector(std::string_view signature);
Bytes encode_call(std::string_view signature, const Args& args = {});
/// Throws Revert on short or malformed call data.
std::pair<std::array<Byte, 4>, Args> decode_call(ByteView data);

Bytes encode_word(const U256& value);
Bytes encode_address(const Address& a);
/// Throws Revert when the argument is missing or too wide.
U256 arg_word(const Args& args, std::size_t i);
Address arg_address(const Args& args, std::size_t i);
/// Interprets handler output as a minimal big-endian integer.
U256 decode_word(ByteView output);
Address word_to_address(const U256& w);
U256 address_to_word(const Address& a);

}  // namespace xchain::ledger
