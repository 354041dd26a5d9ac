#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "xchain/sim/trace.hpp"

namespace xchain::sim {

using NodeId = std::string;

class Message {
 public:
  virtual ~Message() = default;
  virtual std::string kind() const = 0;
  virtual Hash256 digest() const = 0;
  /// Copy whose signature share is replaced by an invalid one; nullptr if the message carries no share.
  virtual std::shared_ptr<const Message> corrupted(std::uint64_t /*seed*/) const { return nullptr; }
};

using MessagePtr = std::shared_ptr<const Message>;

class Endpoint {
 public:
  virtual ~Endpoint() = default;
  virtual void on_message(const NodeId& from, const MessagePtr& msg) = 0;
  virtual void on_timer(std::uint64_t timer_id) = 0;
};

enum class FaultKind { CrashNode, DropMessage, Partition, DelayMessage, CorruptShare, RemoveValidator };

const char* to_string(FaultKind k);
std::optional<FaultKind> parse_fault_kind(std::string_view s);

struct FaultSpec {
  FaultKind kind = FaultKind::CrashNode;
  /// Step trigger; when empty the fault arms at tick `at`.
  std::string step;
  Tick at = 0;
  /// Node reaching the step (step triggers), the victim (crash, removal, corruption) or the sender
  /// filter (drop, delay). Empty matches any node.
  std::string node;
  /// Receiver filter for drop and delay.
  std::string peer;
  /// Message kind filter for drop, delay and corruption.
  std::string message_kind;
  /// Partition sides: node ids or group labels.
  std::vector<std::string> side_a;
  std::vector<std::string> side_b;
  /// Active window after arming; 0 means until the end of the run.
  Tick duration = 0;
  /// Extra latency for DelayMessage.
  Tick delay = 0;
  /// Messages affected before the fault disarms; 0 means unlimited.
  std::uint32_t count = 0;

  std::string describe() const;
};

struct SimConfig {
  std::uint64_t seed = 0;
  /// Uniform extra latency in [0, jitter] per message.
  Tick jitter = 0;
  Tick max_ticks = 1'000'000;
};

struct RunResult {
  bool quiescent = false;
  bool tick_limit_hit = false;
  Tick final_tick = 0;
  std::uint64_t events = 0;
};

/// Single-threaded discrete-event scheduler, transport and fault injector.
class Simulator {
 public:
  explicit Simulator(SimConfig config);

  Tick now() const { return now_; }
  const SimConfig& config() const { return config_; }
  /// Randomness for actors above the network (applications, retries); independent of jitter.
  std::mt19937_64& app_rng() { return app_rng_; }

  void add_node(const NodeId& id, Endpoint* endpoint, std::string group);
  bool has_node(const NodeId& id) const { return nodes_.count(id) != 0; }
  bool alive(const NodeId& id) const;
  const std::string& group_of(const NodeId& id) const;

  void send(const NodeId& from, const NodeId& to, MessagePtr msg, Tick base_latency);
  std::uint64_t set_timer(const NodeId& node, Tick delay);
  void cancel_timer(std::uint64_t id);

  /// Arbitrary world action. Background events (block production) do not keep the run alive.
  void schedule(Tick at, std::function<void()> fn, bool background = false);

  /// Step names accepted by fault triggers; inject() rejects others.
  void set_known_steps(std::set<std::string> steps) { known_steps_ = std::move(steps); }
  const std::set<std::string>& known_steps() const { return known_steps_; }
  /// Throws std::invalid_argument for unknown step or node names.
  void inject(FaultSpec fault);

  /// Records a protocol step and fires faults bound to it. Returns false if the node is no longer alive.
  bool step(const NodeId& node, std::string_view step, std::string digest = "-");
  void crash(const NodeId& node, std::string_view reason);

  void record(const NodeId& node, std::string_view kind, std::string_view reason, std::string digest = "-");
  Trace& trace() { return trace_; }
  const Trace& trace() const { return trace_; }

  /// Runs until only background events remain or the tick limit is reached.
  RunResult run();

 private:
  struct Event {
    std::function<void()> fn;
    bool background = false;
  };
  struct Armed {
    FaultSpec spec;
    bool active = false;
    Tick since = 0;
    std::uint32_t used = 0;
  };
  struct NodeInfo {
    Endpoint* endpoint = nullptr;
    std::string group;
    bool alive = true;
  };

  void push(Tick at, Event e);
  void activate(Armed& a);
  bool window_open(const Armed& a) const;
  bool matches_link(const FaultSpec& f, const NodeId& from, const NodeId& to, const Message& msg) const;
  bool on_side(const std::vector<std::string>& side, const NodeId& node) const;

  SimConfig config_;
  std::mt19937_64 jitter_rng_;
  std::mt19937_64 app_rng_;
  std::mt19937_64 fault_rng_;
  Tick now_ = 0;
  std::uint64_t seq_ = 0;
  std::uint64_t foreground_ = 0;
  std::map<std::pair<Tick, std::uint64_t>, Event> queue_;
  std::map<NodeId, NodeInfo> nodes_;
  std::set<std::uint64_t> cancelled_timers_;
  std::uint64_t next_timer_ = 1;
  std::set<std::string> known_steps_;
  std::vector<Armed> faults_;
  Trace trace_;
};

}  // namespace xchain::sim
