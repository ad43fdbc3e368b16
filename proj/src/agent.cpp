#include "mktsim/agent.hpp"

#include <stdexcept>

namespace mktsim {

Agent::Agent(AgentId id, std::string name, std::string type)
    : id_(id), name_(std::move(name)), type_(std::move(type)) {}

void Agent::attach(KernelServices& kernel, std::uint64_t seed) {
  kernel_ = &kernel;
  rng_.seed(seed);
}

void Agent::kernelInitializing(KernelServices& kernel) { kernel_ = &kernel; }

void Agent::kernelStarting(SimTime startTime) {
  currentTime_ = startTime;
  setWakeup(startTime);
}

void Agent::kernelStopping() {}

void Agent::kernelTerminating() {
  if (!log_.empty()) kernel().writeLog(id_, log_);
}

void Agent::receiveMessage(SimTime now, const Message& message) {
  currentTime_ = now;
  if (logMessages_) logEvent("MSG_RECEIVED", encodeRecord(message));
}

void Agent::wakeup(SimTime now) { currentTime_ = now; }

void Agent::logEvent(std::string type, std::string payload) {
  log_.push_back({currentTime_, std::move(type), std::move(payload)});
}

KernelServices& Agent::kernel() const {
  if (!kernel_) throw std::logic_error("agent " + name_ + " is not attached to a kernel");
  return *kernel_;
}

void Agent::sendMessage(AgentId recipient, MessageBody body, Duration extraDelay) {
  kernel().sendMessage(id_, recipient, std::move(body), extraDelay);
}

void Agent::setWakeup(SimTime t) { kernel().setWakeup(id_, t); }

}  // namespace mktsim
