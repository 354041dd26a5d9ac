#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "xchain/common/bytes.hpp"

namespace xchain::sim {

using Tick = std::uint64_t;

inline constexpr std::string_view kTraceHeader = "# xchain-trace v1";

/// One line of the trace: tick, node, kind, reason, digest, tab separated.
struct TraceRecord {
  Tick tick = 0;
  std::string node;
  std::string kind;
  std::string reason;
  /// First eight bytes of a keccak digest as hex, or "-".
  std::string digest = "-";

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

std::string short_digest(const Hash256& h);
std::string short_digest(ByteView payload);

class Trace {
 public:
  void add(TraceRecord r) { records_.push_back(std::move(r)); }
  const std::vector<TraceRecord>& records() const { return records_; }
  bool empty() const { return records_.empty(); }

  bool contains(std::string_view kind, std::string_view reason) const;
  std::size_t count(std::string_view kind, std::string_view reason = {}) const;

  std::string serialize() const;
  void write(std::ostream& out) const;
  /// Throws std::invalid_argument on a missing or different header or malformed line.
  static Trace parse(std::string_view text);

 private:
  std::vector<TraceRecord> records_;
};

struct TraceDiff {
  /// Index of the first differing record; npos when identical.
  std::size_t first_difference = npos;
  std::vector<std::string> lines;
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  bool identical() const { return first_difference == npos; }
};

/// Record-by-record comparison. With ignore_digests, payload digests are not compared.
TraceDiff diff_traces(const Trace& a, const Trace& b, bool ignore_digests = false, std::size_t max_lines = 20);

}  // namespace xchain::sim
