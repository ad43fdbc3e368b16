#pragma once

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "mktsim/agent.hpp"
#include "mktsim/latency.hpp"
#include "mktsim/random.hpp"

namespace mktsim {

class KernelError : public std::runtime_error {
 public:
  KernelError(AgentId agent, std::string agentName, std::string phase, const std::string& what)
      : std::runtime_error("agent " + std::to_string(agent) + " (" + agentName + ") failed during " + phase + ": " +
                           what),
        agent_(agent),
        phase_(std::move(phase)) {}
  AgentId agent() const { return agent_; }
  const std::string& phase() const { return phase_; }

 private:
  AgentId agent_;
  std::string phase_;
};

struct QueuedEvent {
  SimTime deliveryTime{};
  std::uint64_t sequence = 0;
  AgentId target = 0;
  Message payload;  // WakeupCall body for wakeups
};

/// Emitted once per dequeued event, for auditing the event loop.
struct DeliveryTrace {
  SimTime gvt{};
  AgentId sender = 0;
  AgentId target = 0;
  MessageKind kind{};
  SimTime sentTime{};
  SimTime deliveryTime{};
  std::uint64_t sequence = 0;
  bool deferred = false;  // re-queued instead of delivered
};

struct RunResult {
  SimTime startTime{};
  SimTime stopTime{};
  SimTime finalGvt{};
  std::uint64_t eventsDelivered = 0;
  std::uint64_t deferrals = 0;
  std::uint64_t abandoned = 0;  // left in the queue past stopTime
};

/// Single-threaded discrete-event engine. Owns the agents, the event queue,
/// per-agent clocks and computation delays, and the latency model.
class Kernel final : public KernelServices {
 public:
  Kernel(std::vector<std::unique_ptr<Agent>> agents, LatencyModel latency, std::uint64_t masterSeed, LogSink& sink);

  RunResult run(SimTime startTime, SimTime stopTime);

  void sendMessage(AgentId sender, AgentId recipient, MessageBody body, Duration extraDelay = {}) override;
  void setWakeup(AgentId sender, SimTime requestedTime) override;
  std::optional<AgentId> findAgentByType(std::string_view type) const override;
  void writeLog(AgentId sender, const std::vector<LogRecord>& records) override;
  void writeArchive(AgentId sender, const std::string& name, const std::string& contents) override;
  void setComputationDelay(AgentId agent, Duration delay) override;
  Duration computationDelay(AgentId agent) const override;

  void setTraceHook(std::function<void(const DeliveryTrace&)> hook) { trace_ = std::move(hook); }

  SimTime currentTime() const { return currentTime_; }
  SimTime agentTime(AgentId id) const { return agentTimes_.at(index(id)); }
  const RandomPlan& randomPlan() const { return plan_; }
  std::size_t agentCount() const { return agents_.size(); }

  /// Post-run inspection for analysis and tests; not reachable from agents.
  const Agent& agent(AgentId id) const { return *agents_.at(index(id)); }

 private:
  struct Later {
    bool operator()(const QueuedEvent& a, const QueuedEvent& b) const {
      return a.deliveryTime != b.deliveryTime ? a.deliveryTime > b.deliveryTime : a.sequence > b.sequence;
    }
  };

  std::size_t index(AgentId id) const;
  void push(QueuedEvent ev);
  QueuedEvent pop();
  template <class Fn>
  void guarded(Agent& agent, const char* phase, Fn&& fn);

  std::vector<std::unique_ptr<Agent>> agents_;
  LatencyModel latency_;
  RandomPlan plan_;
  LogSink& sink_;

  std::vector<QueuedEvent> heap_;
  std::uint64_t nextSequence_ = 0;
  SimTime currentTime_{};
  std::vector<SimTime> agentTimes_;
  std::vector<Duration> computationDelay_;
  std::function<void(const DeliveryTrace&)> trace_;
};

}  // namespace mktsim
