#include "xchain/sim/trace.hpp"

#include <ostream>
#include <sstream>
#include <stdexcept>

#include "xchain/crypto/keccak.hpp"

namespace xchain::sim {

std::string short_digest(const Hash256& h) { return to_hex(h.view().first(8), false); }

std::string short_digest(ByteView payload) { return short_digest(crypto::keccak256(payload)); }

bool Trace::contains(std::string_view kind, std::string_view reason) const {
  for (const auto& r : records_) {
    if (r.kind == kind && r.reason == reason) return true;
  }
  return false;
}

std::size_t Trace::count(std::string_view kind, std::string_view reason) const {
  std::size_t n = 0;
  for (const auto& r : records_) {
    if (r.kind == kind && (reason.empty() || r.reason == reason)) ++n;
  }
  return n;
}

void Trace::write(std::ostream& out) const {
  out << kTraceHeader << '\n';
  for (const auto& r : records_) {
    out << r.tick << '\t' << r.node << '\t' << r.kind << '\t' << (r.reason.empty() ? "-" : r.reason) << '\t'
        << r.digest << '\n';
  }
}

std::string Trace::serialize() const {
  std::ostringstream out;
  write(out);
  return out.str();
}

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

Trace Trace::parse(std::string_view text) {
  Trace t;
  auto lines = split(text, '\n');
  if (lines.empty() || lines[0] != kTraceHeader) throw std::invalid_argument("not an xchain-trace v1 file");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    if (line.empty()) continue;
    auto f = split(line, '\t');
    if (f.size() != 5) throw std::invalid_argument("trace line " + std::to_string(i + 1) + " has wrong field count");
    TraceRecord r;
    try {
      r.tick = std::stoull(std::string(f[0]));
    } catch (const std::exception&) {
      throw std::invalid_argument("trace line " + std::to_string(i + 1) + " has a bad tick");
    }
    r.node = f[1];
    r.kind = f[2];
    r.reason = f[3] == "-" ? std::string() : std::string(f[3]);
    r.digest = f[4];
    t.add(std::move(r));
  }
  return t;
}

namespace {

std::string render(const TraceRecord& r) {
  return std::to_string(r.tick) + " " + r.node + " " + r.kind + " " + (r.reason.empty() ? "-" : r.reason) + " " +
         r.digest;
}

}  // namespace

TraceDiff diff_traces(const Trace& a, const Trace& b, bool ignore_digests, std::size_t max_lines) {
  TraceDiff d;
  const auto& ra = a.records();
  const auto& rb = b.records();
  std::size_t n = std::max(ra.size(), rb.size());
  for (std::size_t i = 0; i < n; ++i) {
    bool same = i < ra.size() && i < rb.size();
    if (same) {
      TraceRecord x = ra[i];
      TraceRecord y = rb[i];
      if (ignore_digests) x.digest = y.digest = "-";
      same = x == y;
    }
    if (same) continue;
    if (d.identical()) d.first_difference = i;
    if (d.lines.size() >= max_lines) break;
    d.lines.push_back("@" + std::to_string(i) + " < " + (i < ra.size() ? render(ra[i]) : "(end)"));
    d.lines.push_back("@" + std::to_string(i) + " > " + (i < rb.size() ? render(rb[i]) : "(end)"));
  }
  return d;
}

}  // namespace xchain::sim
