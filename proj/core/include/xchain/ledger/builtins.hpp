#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "xchain/ledger/ledger.hpp"

// Storage layouts of the shipped handlers.
namespace xchain::ledger::builtins {

namespace oracle {
inline constexpr unsigned kRate = 0;
}  // namespace oracle

namespace control {
inline constexpr unsigned kOracleChain = 0;
inline constexpr unsigned kOracle = 1;
inline constexpr unsigned kCommodityChain = 2;
inline constexpr unsigned kCommodity = 3;
inline constexpr unsigned kLastRate = 4;
inline constexpr unsigned kOrders = 5;
inline constexpr unsigned kBuyBelow = 100;
}  // namespace control

namespace commodity {
inline constexpr unsigned kStock = 0;
inline constexpr unsigned kSold = 1;
inline constexpr unsigned kBought = 2;
}  // namespace commodity

/// Contract1 and Contract2.
namespace livelock {
inline constexpr unsigned kBuyChain = 0;
inline constexpr unsigned kBuyContract = 1;
inline constexpr unsigned kSellChain = 2;
inline constexpr unsigned kSellContract = 3;
inline constexpr unsigned kCalls = 4;
}  // namespace livelock

namespace swap_registration {
inline constexpr unsigned kCount = 0;
inline constexpr unsigned kExec = 0;
inline constexpr unsigned kRate = 1;
inline constexpr unsigned kCounterChain = 2;
inline constexpr unsigned kCounterRegistration = 3;
inline constexpr unsigned kCounterExec = 4;
inline U256 entry_base(const U256& i) { return 16 + i * 8; }
}  // namespace swap_registration

namespace swap_execution {
inline constexpr unsigned kOwner = 0;
/// Counter-chain units paid per unit taken on this chain.
inline constexpr unsigned kRate = 1;
inline constexpr unsigned kCounterChain = 2;
inline constexpr unsigned kCounterExec = 3;
inline constexpr unsigned kSwapped = 4;
}  // namespace swap_execution

namespace forwarder {
inline constexpr unsigned kCount = 0;
inline constexpr unsigned kRuns = 1;
inline constexpr unsigned kKind = 0;
inline constexpr unsigned kChain = 1;
inline constexpr unsigned kTo = 2;
inline constexpr unsigned kValue = 3;
inline constexpr unsigned kDataLength = 4;
inline constexpr unsigned kData = 5;
inline constexpr unsigned kKindTx = 0;
inline constexpr unsigned kKindView = 1;
inline constexpr unsigned kMaxData = 1024;
inline U256 call_base(const U256& i) { return 0x100 + i * 0x100; }

/// Initial storage that makes run() issue exactly these calls.
Storage describe(const std::vector<SubordinateCall>& calls);
}  // namespace forwarder

/// Named slot lookup for scenario files, e.g. ("Control", "oracle") -> 1.
std::optional<unsigned> slot_by_name(std::string_view handler_id, std::string_view name);

}  // namespace xchain::ledger::builtins
