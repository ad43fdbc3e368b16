#include <functional>
#include <map>

#include "doctest.h"
#include "mktsim/kernel.hpp"

using namespace mktsim;

namespace {

struct Seen {
  AgentId agent;
  SimTime at;
  MessageKind kind;
  SimTime sent;
};

/// Agent whose behavior is supplied by the test.
class Scripted : public Agent {
 public:
  Scripted(AgentId id, std::string type, std::vector<Seen>& seen) : Agent(id, "S" + std::to_string(id), std::move(type)), seen_(seen) {}

  std::function<void(Scripted&, SimTime)> onWake;
  std::function<void(Scripted&, SimTime, const Message&)> onMessage;
  bool wakeAtStart = true;

  void kernelStarting(SimTime t) override {
    if (wakeAtStart) Agent::kernelStarting(t);
  }
  void wakeup(SimTime now) override {
    Agent::wakeup(now);
    seen_.push_back({id(), now, MessageKind::WakeupCall, now});
    if (onWake) onWake(*this, now);
  }
  void receiveMessage(SimTime now, const Message& m) override {
    Agent::receiveMessage(now, m);
    seen_.push_back({id(), now, m.kind(), m.sentTime});
    if (onMessage) onMessage(*this, now, m);
  }

  using Agent::kernel;
  using Agent::sendMessage;
  using Agent::setWakeup;

 private:
  std::vector<Seen>& seen_;
};

struct Rig {
  std::vector<Seen> seen;
  std::vector<Scripted*> agents;
  std::vector<std::unique_ptr<Agent>> owned;
  MemorySink sink;

  Scripted& add(std::string type = "Scripted") {
    auto a = std::make_unique<Scripted>(static_cast<AgentId>(owned.size()), std::move(type), seen);
    agents.push_back(a.get());
    owned.push_back(std::move(a));
    return *agents.back();
  }
  Kernel build(Duration latency = Duration::ns(500), std::uint64_t seed = 1) {
    return Kernel(std::move(owned), LatencyModel(agents.size(), latency), seed, sink);
  }
};

}  // namespace

TEST_CASE("a lone agent receives exactly one wakeup at start") {
  Rig rig;
  rig.add();
  auto k = rig.build();
  const auto r = k.run(SimTime{1'000}, SimTime{10'000});
  REQUIRE(rig.seen.size() == 1);
  CHECK(rig.seen[0].at.nanos == 1'000);
  CHECK(r.eventsDelivered == 1);
  CHECK(r.abandoned == 0);
}

TEST_CASE("send arithmetic uses agent time, computation delay, extra delay and latency") {
  for (auto [extra, sent, delivered] : {std::tuple{0, 1'050, 1'550}, std::tuple{200, 1'250, 1'750}}) {
    Rig rig;
    auto& a = rig.add();
    rig.add();
    a.onWake = [extra](Scripted& s, SimTime) { s.sendMessage(1, msg::QueryLastTrade{"IBM"}, Duration::ns(extra)); };
    auto k = rig.build();
    k.setComputationDelay(0, Duration::ns(50));
    k.run(SimTime{1'000}, SimTime{10'000});
    const auto it = std::find_if(rig.seen.begin(), rig.seen.end(),
                                 [](const Seen& s) { return s.kind == MessageKind::QueryLastTrade; });
    REQUIRE(it != rig.seen.end());
    CHECK(it->sent.nanos == sent);
    CHECK(it->at.nanos == delivered);
  }
}

TEST_CASE("jittered delivery stays within bounds and replays identically") {
  auto once = [] {
    Rig rig;
    auto& a = rig.add();
    rig.add();
    a.onWake = [](Scripted& s, SimTime now) {
      s.sendMessage(1, msg::QueryLastTrade{"IBM"});
      if (now.nanos < 5'000) s.setWakeup(now + Duration::ns(100));
    };
    LatencyModel lat(2, Duration::ns(500));
    lat.setDefaultJitter(JitterSpec::uniform(0, 10));
    Kernel k(std::move(rig.owned), std::move(lat), 9, rig.sink);
    k.setComputationDelay(0, Duration::ns(50));
    k.run(SimTime{1'000}, SimTime{100'000});
    std::vector<std::int64_t> deliveries;
    for (const auto& s : rig.seen) {
      if (s.kind != MessageKind::QueryLastTrade) continue;
      CHECK(s.at.nanos - s.sent.nanos >= 500);
      CHECK(s.at.nanos - s.sent.nanos <= 510);
      deliveries.push_back(s.at.nanos);
    }
    return deliveries;
  };
  const auto a = once();
  CHECK(a.size() == 41);
  CHECK(a.front() >= 1'550);
  CHECK(a.front() <= 1'560);
  CHECK(a == once());
}

TEST_CASE("an event for an agent still busy is deferred to its clock") {
  Rig rig;
  auto& busy = rig.add();
  auto& sender = rig.add();
  sender.onWake = [](Scripted& s, SimTime) { s.sendMessage(0, msg::QueryLastTrade{"IBM"}); };
  busy.onWake = [](Scripted&, SimTime) {};
  auto k = rig.build(Duration::ns(100));
  k.setComputationDelay(0, Duration::ns(150));  // busy until 150
  std::vector<DeliveryTrace> traces;
  k.setTraceHook([&](const DeliveryTrace& t) { traces.push_back(t); });
  const auto r = k.run(SimTime{0}, SimTime{1'000});
  const auto& last = rig.seen.back();
  CHECK(last.kind == MessageKind::QueryLastTrade);
  CHECK(last.at.nanos == 150);
  CHECK(r.deferrals == 1);
  // Original delivery at 100, deferred, then redelivered.
  REQUIRE(traces.size() == 4);
  CHECK(traces[2].deferred);
  CHECK(traces[2].deliveryTime.nanos == 100);
  CHECK(traces[3].deliveryTime.nanos == 150);
  CHECK(traces[3].sequence > traces[2].sequence);
}

TEST_CASE("wakeup requested inside a computation delay is deferred") {
  Rig rig;
  auto& a = rig.add();
  int wakes = 0;
  a.onWake = [&](Scripted& s, SimTime now) {
    if (++wakes == 1) {
      s.kernel().setComputationDelay(0, Duration::ns(1'000));
      s.setWakeup(now);  // lands before the delay is served
    }
  };
  auto k = rig.build();
  k.run(SimTime{0}, SimTime{10'000});
  REQUIRE(rig.seen.size() == 2);
  CHECK(rig.seen[1].at.nanos == 1'000);
}

TEST_CASE("same-time events follow enqueue order on every replay") {
  auto once = [] {
    Rig rig;
    auto& hub = rig.add();
    for (int i = 0; i < 5; ++i) rig.add().wakeAtStart = false;
    hub.onWake = [](Scripted& s, SimTime) {
      for (AgentId to : {5, 2, 4, 1, 3}) s.sendMessage(to, msg::MarketOpenTime{});
    };
    auto k = rig.build(Duration::ns(500));
    k.run(SimTime{0}, SimTime{1'000});
    std::vector<AgentId> order;
    for (const auto& s : rig.seen) {
      if (s.kind == MessageKind::MarketOpenTime) {
        CHECK(s.at.nanos == 500);
        order.push_back(s.agent);
      }
    }
    return order;
  };
  CHECK(once() == std::vector<AgentId>{5, 2, 4, 1, 3});
  CHECK(once() == once());
}

TEST_CASE("a wakeup at the current time runs after earlier same-time events") {
  Rig rig;
  auto& a = rig.add();
  auto& b = rig.add();
  b.wakeAtStart = false;
  int wakes = 0;
  a.onWake = [&](Scripted& s, SimTime now) {
    if (++wakes == 1) {
      s.sendMessage(0, msg::MarketOpenTime{});  // self-message, zero latency on the diagonal
      s.setWakeup(now);
    }
  };
  auto k = rig.build();
  k.run(SimTime{0}, SimTime{1'000});
  REQUIRE(rig.seen.size() == 3);
  CHECK(rig.seen[1].kind == MessageKind::MarketOpenTime);
  CHECK(rig.seen[2].kind == MessageKind::WakeupCall);
}

TEST_CASE("wakeups land exactly and bypass latency") {
  Rig rig;
  auto& a = rig.add();
  a.onWake = [](Scripted& s, SimTime now) {
    if (now.nanos == 0) s.setWakeup(now + Duration::seconds(60));
  };
  auto k = rig.build(Duration::ns(999));
  k.run(SimTime{0}, SimTime{Duration::minutes(5).nanos});
  REQUIRE(rig.seen.size() == 2);
  CHECK(rig.seen[1].at.nanos == 60'000'000'000);
}

TEST_CASE("service errors") {
  Rig rig;
  auto& a = rig.add();
  std::string e1, e2, e3;
  a.onWake = [&](Scripted& s, SimTime now) {
    try { s.sendMessage(0, msg::MarketOpenTime{}, Duration::ns(-1)); } catch (const std::exception& e) { e1 = e.what(); }
    try { s.sendMessage(7, msg::MarketOpenTime{}); } catch (const std::exception& e) { e2 = e.what(); }
    try { s.setWakeup(now - Duration::ns(1)); } catch (const std::exception& e) { e3 = e.what(); }
  };
  auto k = rig.build();
  k.run(SimTime{100}, SimTime{1'000});
  CHECK_FALSE(e1.empty());
  CHECK_FALSE(e2.empty());
  CHECK(e3.find("past") != std::string::npos);
}

TEST_CASE("an agent failure names the agent and the phase") {
  Rig rig;
  rig.add();
  auto& bad = rig.add();
  bad.onWake = [](Scripted&, SimTime) { throw std::runtime_error("boom"); };
  auto k = rig.build();
  try {
    k.run(SimTime{0}, SimTime{10});
    FAIL("run did not abort");
  } catch (const KernelError& e) {
    CHECK(e.agent() == 1);
    CHECK(e.phase() == "wakeup");
    CHECK(std::string(e.what()).find("boom") != std::string::npos);
  }
}

TEST_CASE("findAgentByType returns the lowest matching id") {
  Rig rig;
  for (int i = 0; i < 8; ++i) rig.add(i == 3 || i == 7 ? "Exchange" : "Other");
  auto k = rig.build();
  CHECK(k.findAgentByType("Exchange") == 3);
  CHECK(k.findAgentByType("Exchange") == 3);
  CHECK_FALSE(k.findAgentByType("Nothing"));
}

TEST_CASE("events past stop are abandoned and stopping still runs") {
  Rig rig;
  auto& a = rig.add();
  a.onWake = [](Scripted& s, SimTime now) { s.setWakeup(now + Duration::ns(600)); };
  auto k = rig.build();
  const auto r = k.run(SimTime{0}, SimTime{1'000});
  CHECK(rig.seen.size() == 2);  // 0 and 600; 1200 is past stop
  CHECK(r.abandoned == 1);
  CHECK(r.finalGvt.nanos == 1'200);
}

TEST_CASE("GVT and per-agent activity times never go backwards") {
  Rig rig;
  for (int i = 0; i < 4; ++i) {
    auto& a = rig.add();
    a.onWake = [i](Scripted& s, SimTime now) {
      s.sendMessage((i + 1) % 4, msg::QueryLastTrade{"X"});
      s.setWakeup(now + Duration::ns(37 * (i + 1)));
    };
    a.onMessage = [i](Scripted& s, SimTime, const Message& m) {
      if (m.kind() == MessageKind::QueryLastTrade) s.sendMessage((i + 3) % 4, msg::MarketOpenTime{}, Duration::ns(i));
    };
  }
  LatencyModel lat(4, Duration::ns(20));
  lat.setDefaultJitter(JitterSpec::uniform(0, 40));
  Kernel k(std::move(rig.owned), std::move(lat), 5, rig.sink);
  for (AgentId i = 0; i < 4; ++i) k.setComputationDelay(i, Duration::ns(15 * i));
  SimTime gvt{};
  int backwards = 0;
  k.setTraceHook([&](const DeliveryTrace& t) {
    backwards += t.gvt < gvt;
    backwards += t.deliveryTime < t.sentTime;
    gvt = t.gvt;
  });
  k.run(SimTime{0}, SimTime{5'000});
  std::map<AgentId, SimTime> last;
  for (const auto& s : rig.seen) {
    if (last.contains(s.agent)) backwards += s.at < last[s.agent];
    last[s.agent] = s.at;
  }
  CHECK(backwards == 0);
  CHECK(rig.seen.size() > 200);
}

TEST_CASE("writeLog archives one sorted file per agent and skips empty logs") {
  Rig rig;
  auto& a = rig.add();
  auto& b = rig.add();
  a.setLogMessages(false);
  b.setLogMessages(false);
  a.onWake = [](Scripted& s, SimTime) {
    s.kernel().writeLog(0, {{SimTime{3}, "C", "z"}, {SimTime{1}, "A", "x"}, {SimTime{2}, "B", "y"}});
    s.kernel().writeLog(1, {});
  };
  auto k = rig.build();
  k.run(SimTime{0}, SimTime{10});
  REQUIRE(rig.sink.files.contains(agentLogFileName(0, "S0")));
  const auto rows = parseAgentLog(rig.sink.files.at(agentLogFileName(0, "S0")));
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].type == "A");
  CHECK(rows[2].type == "C");
  CHECK_FALSE(rig.sink.files.contains(agentLogFileName(1, "S1")));
}
