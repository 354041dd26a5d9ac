#include "xchain/sim/simnet.hpp"

#include <stdexcept>

namespace xchain::sim {

const char* to_string(FaultKind k) {
  switch (k) {
    case FaultKind::CrashNode: return "CrashNode";
    case FaultKind::DropMessage: return "DropMessage";
    case FaultKind::Partition: return "Partition";
    case FaultKind::DelayMessage: return "DelayMessage";
    case FaultKind::CorruptShare: return "CorruptShare";
    case FaultKind::RemoveValidator: return "RemoveValidator";
  }
  return "?";
}

std::optional<FaultKind> parse_fault_kind(std::string_view s) {
  for (auto k : {FaultKind::CrashNode, FaultKind::DropMessage, FaultKind::Partition, FaultKind::DelayMessage,
                 FaultKind::CorruptShare, FaultKind::RemoveValidator}) {
    if (s == to_string(k)) return k;
  }
  return std::nullopt;
}

std::string FaultSpec::describe() const {
  std::string out = to_string(kind);
  if (!node.empty()) out += " node=" + node;
  if (!peer.empty()) out += " peer=" + peer;
  if (!message_kind.empty()) out += " msg=" + message_kind;
  if (!step.empty()) {
    out += " step=" + step;
  } else {
    out += " at=" + std::to_string(at);
  }
  return out;
}

Simulator::Simulator(SimConfig config)
    : config_(config),
      jitter_rng_(config.seed),
      app_rng_(config.seed ^ 0x9e3779b97f4a7c15ULL),
      fault_rng_(config.seed ^ 0xc2b2ae3d27d4eb4fULL) {}

void Simulator::add_node(const NodeId& id, Endpoint* endpoint, std::string group) {
  if (!nodes_.emplace(id, NodeInfo{endpoint, std::move(group), true}).second) {
    throw std::invalid_argument("duplicate node id " + id);
  }
}

bool Simulator::alive(const NodeId& id) const {
  auto it = nodes_.find(id);
  return it != nodes_.end() && it->second.alive;
}

const std::string& Simulator::group_of(const NodeId& id) const {
  static const std::string kNone;
  auto it = nodes_.find(id);
  return it == nodes_.end() ? kNone : it->second.group;
}

void Simulator::push(Tick at, Event e) {
  if (!e.background) ++foreground_;
  queue_.emplace(std::make_pair(at, seq_++), std::move(e));
}

void Simulator::schedule(Tick at, std::function<void()> fn, bool background) {
  push(std::max(at, now_), Event{std::move(fn), background});
}

bool Simulator::window_open(const Armed& a) const {
  if (!a.active) return false;
  if (a.spec.duration != 0 && now_ >= a.since + a.spec.duration) return false;
  if (a.spec.count != 0 && a.used >= a.spec.count) return false;
  return true;
}

bool Simulator::on_side(const std::vector<std::string>& side, const NodeId& node) const {
  const std::string& g = group_of(node);
  for (const auto& s : side) {
    if (s == node || s == g) return true;
  }
  return false;
}

bool Simulator::matches_link(const FaultSpec& f, const NodeId& from, const NodeId& to, const Message& msg) const {
  if (!f.node.empty() && f.node != from) return false;
  if (!f.peer.empty() && f.peer != to) return false;
  if (!f.message_kind.empty() && f.message_kind != msg.kind()) return false;
  return true;
}

void Simulator::send(const NodeId& from, const NodeId& to, MessagePtr msg, Tick base_latency) {
  if (!alive(from)) return;
  std::string label = msg->kind() + ">" + to;
  Tick extra = 0;
  for (auto& a : faults_) {
    if (!window_open(a)) continue;
    const FaultSpec& f = a.spec;
    switch (f.kind) {
      case FaultKind::DropMessage:
        if (matches_link(f, from, to, *msg)) {
          ++a.used;
          record(from, "drop", label, short_digest(msg->digest()));
          return;
        }
        break;
      case FaultKind::Partition:
        if ((on_side(f.side_a, from) && on_side(f.side_b, to)) || (on_side(f.side_b, from) && on_side(f.side_a, to))) {
          ++a.used;
          record(from, "drop", "partition:" + label, short_digest(msg->digest()));
          return;
        }
        break;
      case FaultKind::DelayMessage:
        if (matches_link(f, from, to, *msg)) {
          ++a.used;
          extra += f.delay;
        }
        break;
      case FaultKind::CorruptShare:
        if ((f.node.empty() || f.node == from) && (f.message_kind.empty() || f.message_kind == msg->kind())) {
          if (auto bad = msg->corrupted(fault_rng_())) {
            ++a.used;
            msg = std::move(bad);
            record(from, "corrupt", label, short_digest(msg->digest()));
          }
        }
        break;
      case FaultKind::CrashNode:
      case FaultKind::RemoveValidator:
        break;
    }
  }
  Tick jitter = 0;
  if (config_.jitter != 0) jitter = std::uniform_int_distribution<Tick>(0, config_.jitter)(jitter_rng_);
  record(from, "send", label, short_digest(msg->digest()));
  push(now_ + base_latency + jitter + extra, Event{[this, from, to, msg]() {
                                                   auto it = nodes_.find(to);
                                                   if (it == nodes_.end() || !it->second.alive) {
                                                     record(to, "drop", "receiver-down:" + msg->kind(),
                                                            short_digest(msg->digest()));
                                                     return;
                                                   }
                                                   record(to, "recv", msg->kind() + "<" + from,
                                                          short_digest(msg->digest()));
                                                   it->second.endpoint->on_message(from, msg);
                                                 },
                                                 false});
}

std::uint64_t Simulator::set_timer(const NodeId& node, Tick delay) {
  if (!alive(node)) return 0;
  std::uint64_t id = next_timer_++;
  push(now_ + delay, Event{[this, node, id]() {
                             if (cancelled_timers_.erase(id) != 0) return;
                             auto it = nodes_.find(node);
                             if (it == nodes_.end() || !it->second.alive) return;
                             record(node, "timer", "t" + std::to_string(id));
                             it->second.endpoint->on_timer(id);
                           },
                           false});
  return id;
}

void Simulator::cancel_timer(std::uint64_t id) {
  if (id != 0) cancelled_timers_.insert(id);
}

void Simulator::inject(FaultSpec fault) {
  if (!fault.step.empty() && !known_steps_.count(fault.step)) {
    throw std::invalid_argument("unknown protocol step: " + fault.step);
  }
  if (!fault.node.empty() && !has_node(fault.node)) throw std::invalid_argument("unknown node: " + fault.node);
  if (!fault.peer.empty() && !has_node(fault.peer)) throw std::invalid_argument("unknown node: " + fault.peer);
  bool targets_node = fault.kind == FaultKind::CrashNode || fault.kind == FaultKind::RemoveValidator;
  if (targets_node && fault.node.empty() && fault.step.empty()) {
    throw std::invalid_argument(std::string(to_string(fault.kind)) + " needs a node or a step");
  }
  if (fault.kind == FaultKind::Partition && (fault.side_a.empty() || fault.side_b.empty())) {
    throw std::invalid_argument("Partition needs two non-empty sides");
  }
  faults_.push_back(Armed{std::move(fault)});
  if (faults_.back().spec.step.empty()) {
    std::size_t idx = faults_.size() - 1;
    schedule(faults_.back().spec.at, [this, idx]() { activate(faults_[idx]); }, true);
  }
}

void Simulator::activate(Armed& a) {
  if (a.active) return;
  a.active = true;
  a.since = now_;
  record(a.spec.node.empty() ? "*" : a.spec.node, "fault", to_string(a.spec.kind));
  if (a.spec.kind == FaultKind::CrashNode) crash(a.spec.node, "crash");
  if (a.spec.kind == FaultKind::RemoveValidator) crash(a.spec.node, "removed");
}

bool Simulator::step(const NodeId& node, std::string_view step, std::string digest) {
  if (!alive(node)) return false;
  record(node, "step", step, std::move(digest));
  for (auto& a : faults_) {
    if (a.active || a.spec.step != step) continue;
    if (!a.spec.node.empty() && a.spec.node != node) continue;
    bool targets_node = a.spec.kind == FaultKind::CrashNode || a.spec.kind == FaultKind::RemoveValidator;
    if (targets_node && a.spec.node.empty()) a.spec.node = node;
    activate(a);
  }
  return alive(node);
}

void Simulator::crash(const NodeId& node, std::string_view reason) {
  auto it = nodes_.find(node);
  if (it == nodes_.end() || !it->second.alive) return;
  record(node, "crash", reason);
  it->second.alive = false;
}

void Simulator::record(const NodeId& node, std::string_view kind, std::string_view reason, std::string digest) {
  trace_.add(TraceRecord{now_, node, std::string(kind), std::string(reason), std::move(digest)});
}

RunResult Simulator::run() {
  RunResult r;
  while (true) {
    if (queue_.empty() || foreground_ == 0) {
      r.quiescent = true;
      break;
    }
    auto it = queue_.begin();
    if (it->first.first > config_.max_ticks) {
      r.tick_limit_hit = true;
      record("sim", "tick-limit", std::to_string(config_.max_ticks));
      break;
    }
    Event e = std::move(it->second);
    now_ = it->first.first;
    queue_.erase(it);
    if (!e.background) --foreground_;
    ++r.events;
    e.fn();
  }
  r.final_tick = now_;
  return r;
}

}  // namespace xchain::sim
