#include <gtest/gtest.h>

#include "xchain/crypto/keccak.hpp"
#include "xchain/sim/simnet.hpp"

using namespace xchain;
using namespace xchain::sim;

namespace {

struct Ping : Message {
  std::string label;
  explicit Ping(std::string l) : label(std::move(l)) {}
  std::string kind() const override { return "ping"; }
  Hash256 digest() const override { return crypto::keccak256(label); }
};

/// Records deliveries and optionally echoes each message back once.
struct Recorder : Endpoint {
  Simulator* sim = nullptr;
  NodeId self;
  bool echo = false;
  std::vector<std::pair<Tick, std::string>> got;
  std::vector<std::uint64_t> timers;

  void on_message(const NodeId& from, const MessagePtr& msg) override {
    const auto& p = dynamic_cast<const Ping&>(*msg);
    got.emplace_back(sim->now(), p.label);
    if (echo) sim->send(self, from, std::make_shared<Ping>("re:" + p.label), 1);
  }
  void on_timer(std::uint64_t id) override { timers.push_back(id); }
};

struct Net {
  Simulator sim;
  Recorder a, b, c;
  explicit Net(SimConfig cfg = {}) : sim(cfg) {
    for (auto [r, id, g] : {std::tuple{&a, "a", "left"}, std::tuple{&b, "b", "right"}, std::tuple{&c, "c", "right"}}) {
      r->sim = &sim;
      r->self = id;
      sim.add_node(id, r, g);
    }
  }
};

}  // namespace

TEST(Simnet, EmptyRunIsQuiescent) {
  Simulator sim({});
  auto r = sim.run();
  EXPECT_TRUE(r.quiescent);
  EXPECT_EQ(r.events, 0u);
  EXPECT_EQ(r.final_tick, 0u);
}

TEST(Simnet, DeliversAfterLatency) {
  Net n;
  n.sim.send("a", "b", std::make_shared<Ping>("x"), 3);
  n.sim.run();
  ASSERT_EQ(n.b.got.size(), 1u);
  EXPECT_EQ(n.b.got[0].first, 3u);
}

TEST(Simnet, SameTickEventsRunInSendOrder) {
  Net n;
  for (int i = 0; i < 5; ++i) n.sim.send("a", "b", std::make_shared<Ping>(std::to_string(i)), 2);
  n.sim.run();
  ASSERT_EQ(n.b.got.size(), 5u);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(n.b.got[i].second, std::to_string(i));
}

TEST(Simnet, SameSeedSameTrace) {
  auto run = [](std::uint64_t seed) {
    Net n({seed, 5, 1000});
    n.b.echo = true;
    for (int i = 0; i < 20; ++i) n.sim.send("a", "b", std::make_shared<Ping>(std::to_string(i)), 1);
    n.sim.run();
    return n.sim.trace().serialize();
  };
  EXPECT_EQ(run(11), run(11));
  EXPECT_NE(run(11), run(12));
}

TEST(Simnet, DropFaultCountsAndDisarms) {
  Net n;
  FaultSpec f;
  f.kind = FaultKind::DropMessage;
  f.node = "a";
  f.count = 2;
  n.sim.inject(f);
  n.sim.schedule(1, [&] {
    for (int i = 0; i < 4; ++i) n.sim.send("a", "b", std::make_shared<Ping>(std::to_string(i)), 1);
  });
  n.sim.run();
  ASSERT_EQ(n.b.got.size(), 2u);
  EXPECT_EQ(n.b.got[0].second, "2");
  EXPECT_EQ(n.sim.trace().count("drop", "ping>b"), 2u);
}

TEST(Simnet, PartitionSeparatesGroupsForItsDuration) {
  Net n;
  FaultSpec f;
  f.kind = FaultKind::Partition;
  f.side_a = {"left"};
  f.side_b = {"right"};
  f.at = 0;
  f.duration = 10;
  n.sim.inject(f);
  n.sim.schedule(1, [&] {
    n.sim.send("a", "b", std::make_shared<Ping>("in"), 1);
    n.sim.send("a", "c", std::make_shared<Ping>("in"), 1);
    n.sim.send("b", "c", std::make_shared<Ping>("same-side"), 1);
  });
  n.sim.schedule(20, [&] { n.sim.send("a", "b", std::make_shared<Ping>("after"), 1); });
  n.sim.run();
  ASSERT_EQ(n.b.got.size(), 1u);
  EXPECT_EQ(n.b.got[0].second, "after");
  ASSERT_EQ(n.c.got.size(), 1u);
  EXPECT_EQ(n.c.got[0].second, "same-side");
}

TEST(Simnet, CrashedNodeNeitherSendsNorReceives) {
  Net n;
  FaultSpec f;
  f.kind = FaultKind::CrashNode;
  f.node = "b";
  f.at = 5;
  n.sim.inject(f);
  n.sim.schedule(1, [&] { n.sim.send("a", "b", std::make_shared<Ping>("early"), 1); });
  n.sim.schedule(6, [&] {
    n.sim.send("a", "b", std::make_shared<Ping>("late"), 1);
    n.sim.send("b", "c", std::make_shared<Ping>("from-dead"), 1);
  });
  n.sim.run();
  ASSERT_EQ(n.b.got.size(), 1u);
  EXPECT_TRUE(n.c.got.empty());
  EXPECT_TRUE(n.sim.trace().contains("drop", "receiver-down:ping"));
  EXPECT_FALSE(n.sim.alive("b"));
  EXPECT_TRUE(n.sim.alive("a"));
}

TEST(Simnet, StepTriggeredCrashBindsToReachingNode) {
  Net n;
  n.sim.set_known_steps({"origin/mined"});
  FaultSpec f;
  f.kind = FaultKind::CrashNode;
  f.step = "origin/mined";
  n.sim.inject(f);
  EXPECT_TRUE(n.sim.step("a", "other"));
  EXPECT_FALSE(n.sim.step("c", "origin/mined"));
  EXPECT_FALSE(n.sim.alive("c"));
  EXPECT_TRUE(n.sim.step("a", "origin/mined"));
}

TEST(Simnet, UnknownStepOrNodeRejected) {
  Net n;
  n.sim.set_known_steps({"origin/mined"});
  FaultSpec f;
  f.kind = FaultKind::CrashNode;
  f.step = "origin/nope";
  EXPECT_THROW(n.sim.inject(f), std::invalid_argument);
  f.step.clear();
  f.node = "zz";
  EXPECT_THROW(n.sim.inject(f), std::invalid_argument);
}

TEST(Simnet, TimersFireAndCancel) {
  Net n;
  auto t1 = n.sim.set_timer("a", 4);
  auto t2 = n.sim.set_timer("a", 6);
  n.sim.cancel_timer(t2);
  n.sim.run();
  ASSERT_EQ(n.a.timers.size(), 1u);
  EXPECT_EQ(n.a.timers[0], t1);
}

TEST(Simnet, BackgroundEventsDoNotKeepRunAlive) {
  Net n;
  int ticks = 0;
  std::function<void()> tick = [&] {
    ++ticks;
    n.sim.schedule(n.sim.now() + 10, tick, true);
  };
  n.sim.schedule(10, tick, true);
  n.sim.send("a", "b", std::make_shared<Ping>("x"), 35);
  auto r = n.sim.run();
  EXPECT_TRUE(r.quiescent);
  EXPECT_EQ(ticks, 3);
}

TEST(Simnet, TickLimitStopsRun) {
  Net n({0, 0, 50});
  n.b.echo = true;
  n.a.echo = true;
  n.sim.send("a", "b", std::make_shared<Ping>("loop"), 1);
  auto r = n.sim.run();
  EXPECT_TRUE(r.tick_limit_hit);
  EXPECT_TRUE(n.sim.trace().contains("tick-limit", "50"));
}

TEST(Simnet, TraceRoundTripsAndDiffs) {
  Net n;
  n.b.echo = true;
  n.sim.send("a", "b", std::make_shared<Ping>("x"), 1);
  n.sim.run();
  std::string text = n.sim.trace().serialize();
  Trace parsed = Trace::parse(text);
  EXPECT_EQ(parsed.serialize(), text);
  EXPECT_TRUE(diff_traces(parsed, n.sim.trace()).identical());

  Net m;
  m.sim.send("a", "b", std::make_shared<Ping>("y"), 1);
  m.sim.run();
  auto d = diff_traces(m.sim.trace(), n.sim.trace());
  EXPECT_FALSE(d.identical());
  EXPECT_TRUE(diff_traces(m.sim.trace(), n.sim.trace(), true).first_difference != 0);
}
