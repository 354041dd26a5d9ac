#include "xchain/ledger/builtins.hpp"

#include "xchain/ledger/handler.hpp"

namespace xchain::ledger {
namespace {

using wire::SidechainId;

SidechainId slot_sidechain(Host& h, unsigned slot) { return SidechainId{h.sload(slot)}; }
Address slot_address(Host& h, unsigned slot) { return word_to_address(h.sload(slot)); }

void add_to(Host& h, const U256& slot, const U256& amount) { h.sstore(slot, h.sload(slot) + amount); }

HandlerDef oracle() {
  using namespace builtins::oracle;
  return {"Oracle",
          {{"rate()", [](Host& h, const Args&) { return encode_word(h.sload(kRate)); }},
           {"setRate(uint256)", [](Host& h, const Args& a) {
              h.sstore(kRate, arg_word(a, 0));
              return Bytes{};
            }}}};
}

HandlerDef control() {
  using namespace builtins::control;
  return {"Control",
          {{"condBuy(uint256)", [](Host& h, const Args& a) {
             U256 qty = arg_word(a, 0);
             Bytes r = h.call_subordinate_view(slot_sidechain(h, kOracleChain), slot_address(h, kOracle),
                                               encode_call("rate()"));
             U256 rate = decode_word(r);
             h.sstore(kLastRate, rate);
             if (rate < kBuyBelow) {
               h.emit_subordinate_tx(slot_sidechain(h, kCommodityChain), slot_address(h, kCommodity),
                                     encode_call("buy(uint256)", {encode_word(qty)}), 0);
               add_to(h, kOrders, 1);
             }
             return Bytes{};
           }}}};
}

HandlerDef commodity() {
  using namespace builtins::commodity;
  return {"Commodity",
          {{"buy(uint256)",
            [](Host& h, const Args& a) {
              U256 qty = arg_word(a, 0);
              U256 stock = h.sload(kStock);
              if (stock < qty) throw Revert("insufficient stock");
              h.sstore(kStock, stock - qty);
              add_to(h, kSold, qty);
              return Bytes{};
            }},
           {"sell(uint256)",
            [](Host& h, const Args& a) {
              U256 qty = arg_word(a, 0);
              add_to(h, kStock, qty);
              add_to(h, kBought, qty);
              return Bytes{};
            }},
           {"stock()", [](Host& h, const Args&) { return encode_word(h.sload(kStock)); }}}};
}

/// Two callers that issue the same pair of subordinate calls in opposite orders.
HandlerDef livelock_caller(const char* id, const char* fn, bool buy_first) {
  using namespace builtins::livelock;
  return {id,
          {{fn, [buy_first](Host& h, const Args&) {
             auto buy = [&] {
               h.emit_subordinate_tx(slot_sidechain(h, kBuyChain), slot_address(h, kBuyContract),
                                     encode_call("buy(uint256)", {encode_word(1)}), 0);
             };
             auto sell = [&] {
               h.emit_subordinate_tx(slot_sidechain(h, kSellChain), slot_address(h, kSellContract),
                                     encode_call("sell(uint256)", {encode_word(1)}), 0);
             };
             if (buy_first) {
               buy();
               sell();
             } else {
               sell();
               buy();
             }
             add_to(h, kCalls, 1);
             return Bytes{};
           }}}};
}

HandlerDef swap_registration() {
  using namespace builtins::swap_registration;
  return {"AtomicSwapRegistration",
          {{"register(address,uint256,uint256,address,address)",
            [](Host& h, const Args& a) {
              U256 n = h.sload(kCount);
              U256 base = entry_base(n);
              h.sstore(base + kExec, address_to_word(arg_address(a, 0)));
              h.sstore(base + kRate, arg_word(a, 1));
              h.sstore(base + kCounterChain, arg_word(a, 2));
              h.sstore(base + kCounterRegistration, address_to_word(arg_address(a, 3)));
              h.sstore(base + kCounterExec, address_to_word(arg_address(a, 4)));
              h.sstore(kCount, n + 1);
              return Bytes{};
            }},
           {"isRegistered(address)",
            [](Host& h, const Args& a) {
              U256 want = address_to_word(arg_address(a, 0));
              U256 n = h.sload(kCount);
              for (U256 i = 0; i < n; ++i) {
                if (h.sload(entry_base(i) + kExec) == want) return encode_word(1);
              }
              return encode_word(0);
            }},
           {"match(uint256)",
            [](Host& h, const Args& a) {
              U256 max_rate = arg_word(a, 0);
              U256 n = h.sload(kCount);
              for (U256 i = 0; i < n; ++i) {
                U256 base = entry_base(i);
                if (h.sload(base + kRate) > max_rate) continue;
                Bytes r = h.call_subordinate_view(
                    SidechainId{h.sload(base + kCounterChain)}, word_to_address(h.sload(base + kCounterRegistration)),
                    encode_call("isRegistered(address)", {encode_address(word_to_address(h.sload(base + kCounterExec)))}));
                if (decode_word(r) == 1) return encode_address(word_to_address(h.sload(base + kExec)));
              }
              throw Revert("no matching swap offer");
            }}}};
}

HandlerDef swap_execution() {
  using namespace builtins::swap_execution;
  return {"AtomicSwapExecution",
          {{"exchange(uint256)",
            [](Host& h, const Args& a) {
              U256 amount = arg_word(a, 0);
              if (amount == 0) throw Revert("zero swap amount");
              if (amount > h.self_balance()) throw Revert("swap amount exceeds offer");
              h.transfer(h.caller(), amount);
              U256 counter_value = amount * h.sload(kRate);
              h.emit_subordinate_tx(slot_sidechain(h, kCounterChain), slot_address(h, kCounterExec),
                                    encode_call("settle(uint256)", {encode_word(amount)}), counter_value);
              add_to(h, kSwapped, amount);
              return Bytes{};
            }},
           {"settle(uint256)",
            [](Host& h, const Args& a) {
              U256 amount = arg_word(a, 0);
              if (h.call_value() != amount * h.sload(kRate)) throw Revert("settlement value does not match rate");
              add_to(h, kSwapped, h.call_value());
              return Bytes{};
            }},
           {"available()", [](Host& h, const Args&) { return encode_word(h.self_balance()); }},
           {"rate()", [](Host& h, const Args&) { return encode_word(h.sload(kRate)); }}}};
}

/// Issues the crosschain calls described in its own storage. Lets tests change an actual call
/// after the signed tree was built.
HandlerDef forwarder() {
  using namespace builtins::forwarder;
  return {"Forwarder",
          {{"run()",
            [](Host& h, const Args&) {
              U256 n = h.sload(kCount);
              Bytes last;
              for (U256 i = 0; i < n; ++i) {
                U256 base = call_base(i);
                U256 len = h.sload(base + kDataLength);
                if (len > kMaxData) throw Revert("forwarded data too long");
                Bytes data;
                for (U256 j = 0; j < len; ++j) {
                  U256 word = h.sload(base + kData + j / 32);
                  unsigned shift = 8 * (31 - static_cast<unsigned>(j % 32));
                  data.push_back(static_cast<Byte>((word >> shift) & 0xff));
                }
                SidechainId sc{h.sload(base + kChain)};
                Address to = word_to_address(h.sload(base + kTo));
                if (h.sload(base + kKind) == kKindView) {
                  last = h.call_subordinate_view(sc, to, data);
                } else {
                  h.emit_subordinate_tx(sc, to, data, h.sload(base + kValue));
                }
              }
              add_to(h, kRuns, 1);
              return last;
            }},
           {"poke(uint256,uint256)", [](Host& h, const Args& a) {
              h.sstore(arg_word(a, 0), arg_word(a, 1));
              return Bytes{};
            }}}};
}

}  // namespace

Storage builtins::forwarder::describe(const std::vector<SubordinateCall>& calls) {
  Storage s;
  s[kCount] = calls.size();
  for (std::size_t i = 0; i < calls.size(); ++i) {
    const auto& c = calls[i];
    U256 base = call_base(i);
    s[base + kKind] = c.is_view ? kKindView : kKindTx;
    s[base + kChain] = c.sidechain.value;
    s[base + kTo] = address_to_word(c.to);
    s[base + kValue] = c.value;
    s[base + kDataLength] = c.data.size();
    for (std::size_t w = 0; w * 32 < c.data.size(); ++w) {
      Bytes chunk(32, 0);
      for (std::size_t j = 0; j < 32 && w * 32 + j < c.data.size(); ++j) chunk[j] = c.data[w * 32 + j];
      s[base + kData + w] = u256_from_be(chunk);
    }
  }
  return s;
}

std::optional<unsigned> builtins::slot_by_name(std::string_view handler_id, std::string_view name) {
  struct Named {
    std::string_view handler, name;
    unsigned slot;
  };
  static constexpr Named kSlots[] = {
      {"Oracle", "rate", oracle::kRate},
      {"Control", "oracle_chain", control::kOracleChain},
      {"Control", "oracle", control::kOracle},
      {"Control", "commodity_chain", control::kCommodityChain},
      {"Control", "commodity", control::kCommodity},
      {"Control", "last_rate", control::kLastRate},
      {"Control", "orders", control::kOrders},
      {"Commodity", "stock", commodity::kStock},
      {"Commodity", "sold", commodity::kSold},
      {"Commodity", "bought", commodity::kBought},
      {"Contract1", "buy_chain", livelock::kBuyChain},
      {"Contract1", "buy_contract", livelock::kBuyContract},
      {"Contract1", "sell_chain", livelock::kSellChain},
      {"Contract1", "sell_contract", livelock::kSellContract},
      {"Contract1", "calls", livelock::kCalls},
      {"Contract2", "buy_chain", livelock::kBuyChain},
      {"Contract2", "buy_contract", livelock::kBuyContract},
      {"Contract2", "sell_chain", livelock::kSellChain},
      {"Contract2", "sell_contract", livelock::kSellContract},
      {"Contract2", "calls", livelock::kCalls},
      {"AtomicSwapRegistration", "count", swap_registration::kCount},
      {"AtomicSwapExecution", "owner", swap_execution::kOwner},
      {"AtomicSwapExecution", "rate", swap_execution::kRate},
      {"AtomicSwapExecution", "counter_chain", swap_execution::kCounterChain},
      {"AtomicSwapExecution", "counter_exec", swap_execution::kCounterExec},
      {"AtomicSwapExecution", "swapped", swap_execution::kSwapped},
      {"Forwarder", "count", forwarder::kCount},
      {"Forwarder", "runs", forwarder::kRuns},
  };
  for (const auto& n : kSlots) {
    if (n.handler == handler_id && n.name == name) return n.slot;
  }
  return std::nullopt;
}

void register_builtin_handlers(HandlerRegistry& registry) {
  registry.add(oracle());
  registry.add(control());
  registry.add(commodity());
  registry.add(livelock_caller("Contract1", "foo()", true));
  registry.add(livelock_caller("Contract2", "bar()", false));
  registry.add(swap_registration());
  registry.add(swap_execution());
  registry.add(forwarder());
}

}  // namespace xchain::ledger
