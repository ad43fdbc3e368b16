#include "mktsim/kernel.hpp"

#include <algorithm>

namespace mktsim {

Kernel::Kernel(std::vector<std::unique_ptr<Agent>> agents, LatencyModel latency, std::uint64_t masterSeed,
               LogSink& sink)
    : agents_(std::move(agents)), latency_(std::move(latency)), sink_(sink) {
  if (agents_.empty()) throw std::invalid_argument("kernel needs at least one agent");
  std::vector<AgentId> ids;
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    if (!agents_[i] || agents_[i]->id() != static_cast<AgentId>(i)) {
      throw std::invalid_argument("agent ids must be dense and match list position (index " + std::to_string(i) + ")");
    }
    ids.push_back(static_cast<AgentId>(i));
  }
  if (latency_.size() != agents_.size()) {
    throw std::invalid_argument("latency matrix is " + std::to_string(latency_.size()) + "x" +
                                std::to_string(latency_.size()) + " for " + std::to_string(agents_.size()) + " agents");
  }
  plan_ = deriveSeeds(masterSeed, ids);
  latency_.seedStreams(masterSeed);
  agentTimes_.assign(agents_.size(), SimTime{});
  computationDelay_.assign(agents_.size(), Duration{});
}

std::size_t Kernel::index(AgentId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= agents_.size()) {
    throw std::out_of_range("unknown agent id " + std::to_string(id));
  }
  return static_cast<std::size_t>(id);
}

void Kernel::push(QueuedEvent ev) {
  ev.sequence = nextSequence_++;
  heap_.push_back(std::move(ev));
  std::push_heap(heap_.begin(), heap_.end(), Later{});
}

QueuedEvent Kernel::pop() {
  std::pop_heap(heap_.begin(), heap_.end(), Later{});
  QueuedEvent ev = std::move(heap_.back());
  heap_.pop_back();
  return ev;
}

template <class Fn>
void Kernel::guarded(Agent& agent, const char* phase, Fn&& fn) {
  try {
    fn();
  } catch (const KernelError&) {
    throw;
  } catch (const std::exception& e) {
    throw KernelError(agent.id(), agent.name(), phase, e.what());
  }
}

RunResult Kernel::run(SimTime startTime, SimTime stopTime) {
  if (!(startTime < stopTime)) throw std::invalid_argument("start time must precede stop time");
  RunResult result{.startTime = startTime, .stopTime = stopTime};
  currentTime_ = startTime;
  std::fill(agentTimes_.begin(), agentTimes_.end(), startTime);

  for (auto& a : agents_) {
    guarded(*a, "kernelInitializing", [&] {
      a->attach(*this, plan_.agentSeed(a->id()));
      a->kernelInitializing(*this);
    });
  }
  for (auto& a : agents_) guarded(*a, "kernelStarting", [&] { a->kernelStarting(startTime); });

  while (!heap_.empty()) {
    QueuedEvent ev = pop();
    currentTime_ = ev.deliveryTime;
    if (currentTime_ > stopTime) {
      result.abandoned = heap_.size() + 1;
      break;
    }
    const auto slot = index(ev.target);
    DeliveryTrace trace{.gvt = currentTime_,
                        .sender = ev.payload.sender,
                        .target = ev.target,
                        .kind = ev.payload.kind(),
                        .sentTime = ev.payload.sentTime,
                        .deliveryTime = ev.deliveryTime,
                        .sequence = ev.sequence};

    if (agentTimes_[slot] > currentTime_) {
      ev.deliveryTime = agentTimes_[slot];
      ev.payload.deliveryTime = ev.deliveryTime;
      ++result.deferrals;
      trace.deferred = true;
      if (trace_) trace_(trace);
      push(std::move(ev));
      continue;
    }
    if (trace_) trace_(trace);

    agentTimes_[slot] = ev.deliveryTime;
    Agent& target = *agents_[slot];
    if (std::holds_alternative<msg::WakeupCall>(ev.payload.body)) {
      guarded(target, "wakeup", [&] { target.wakeup(ev.deliveryTime); });
    } else {
      guarded(target, "receiveMessage", [&] { target.receiveMessage(ev.deliveryTime, ev.payload); });
    }
    agentTimes_[slot] = agentTimes_[slot] + computationDelay_[slot];
    ++result.eventsDelivered;
  }
  result.finalGvt = currentTime_;

  for (auto& a : agents_) guarded(*a, "kernelStopping", [&] { a->kernelStopping(); });
  for (auto& a : agents_) guarded(*a, "kernelTerminating", [&] { a->kernelTerminating(); });
  heap_.clear();
  return result;
}

void Kernel::sendMessage(AgentId sender, AgentId recipient, MessageBody body, Duration extraDelay) {
  if (extraDelay.nanos < 0) throw std::invalid_argument("extra delay must be non-negative");
  const auto from = index(sender);
  index(recipient);
  if (std::holds_alternative<msg::WakeupCall>(body)) {
    throw std::invalid_argument("wakeup calls are scheduled with setWakeup, not sent");
  }
  const SimTime sent = agentTimes_[from] + computationDelay_[from] + extraDelay;
  const SimTime delivery = sent + latency_.latency(sender, recipient) + latency_.drawJitter(sender, recipient);
  Message m{.sender = sender, .recipient = recipient, .sentTime = sent, .deliveryTime = delivery, .body = std::move(body)};
  push(QueuedEvent{.deliveryTime = delivery, .target = recipient, .payload = std::move(m)});
}

void Kernel::setWakeup(AgentId sender, SimTime requestedTime) {
  const auto slot = index(sender);
  if (requestedTime < agentTimes_[slot]) {
    throw std::invalid_argument("wakeup requested in the past: " + formatTime(requestedTime) + " < " +
                                formatTime(agentTimes_[slot]));
  }
  Message m{.sender = sender,
            .recipient = sender,
            .sentTime = agentTimes_[slot],
            .deliveryTime = requestedTime,
            .body = msg::WakeupCall{}};
  push(QueuedEvent{.deliveryTime = requestedTime, .target = sender, .payload = std::move(m)});
}

std::optional<AgentId> Kernel::findAgentByType(std::string_view type) const {
  for (const auto& a : agents_) {
    if (a->type() == type) return a->id();
  }
  return std::nullopt;
}

void Kernel::writeLog(AgentId sender, const std::vector<LogRecord>& records) {
  const auto& a = *agents_[index(sender)];
  if (records.empty()) return;
  auto sorted = records;
  std::stable_sort(sorted.begin(), sorted.end(), [](const LogRecord& x, const LogRecord& y) { return x.time < y.time; });
  sink_.write(agentLogFileName(a.id(), a.name()), formatAgentLog(sorted));
}

void Kernel::writeArchive(AgentId sender, const std::string& name, const std::string& contents) {
  const auto& a = *agents_[index(sender)];
  const auto base = agentLogFileName(a.id(), a.name());
  sink_.write(base.substr(0, base.size() - 4) + "." + name, contents);
}

void Kernel::setComputationDelay(AgentId agent, Duration delay) {
  if (delay.nanos < 0) throw std::invalid_argument("computation delay must be non-negative");
  computationDelay_[index(agent)] = delay;
}

Duration Kernel::computationDelay(AgentId agent) const { return computationDelay_[index(agent)]; }

}  // namespace mktsim
