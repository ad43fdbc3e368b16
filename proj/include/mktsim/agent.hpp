#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mktsim/log_sink.hpp"
#include "mktsim/message.hpp"
#include "mktsim/random.hpp"

namespace mktsim {

/// What an agent may ask of the kernel. Agents never see each other, only ids.
class KernelServices {
 public:
  virtual ~KernelServices() = default;
  virtual void sendMessage(AgentId sender, AgentId recipient, MessageBody body, Duration extraDelay = {}) = 0;
  virtual void setWakeup(AgentId sender, SimTime requestedTime) = 0;
  virtual std::optional<AgentId> findAgentByType(std::string_view type) const = 0;
  virtual void writeLog(AgentId sender, const std::vector<LogRecord>& records) = 0;
  /// Extra per-agent archive (order stream, book snapshots).
  virtual void writeArchive(AgentId sender, const std::string& name, const std::string& contents) = 0;
  virtual void setComputationDelay(AgentId agent, Duration delay) = 0;
  virtual Duration computationDelay(AgentId agent) const = 0;
};

/// Base participant. Every lifecycle hook is called exactly once per run;
/// wakeup and receiveMessage are called in delivery-time order.
class Agent {
 public:
  Agent(AgentId id, std::string name, std::string type);
  virtual ~Agent() = default;
  Agent(const Agent&) = delete;
  Agent& operator=(const Agent&) = delete;

  AgentId id() const { return id_; }
  const std::string& name() const { return name_; }
  const std::string& type() const { return type_; }

  /// Called by the kernel before kernelInitializing.
  void attach(KernelServices& kernel, std::uint64_t seed);

  virtual void kernelInitializing(KernelServices& kernel);
  /// Base behavior: wake at `startTime`.
  virtual void kernelStarting(SimTime startTime);
  virtual void kernelStopping();
  /// Base behavior: archive the event log if it has entries.
  virtual void kernelTerminating();

  virtual void receiveMessage(SimTime now, const Message& message);
  virtual void wakeup(SimTime now);

  void logEvent(std::string type, std::string payload = {});
  const std::vector<LogRecord>& eventLog() const { return log_; }

  /// Log every delivered message as a MSG_RECEIVED record.
  void setLogMessages(bool on) { logMessages_ = on; }

 protected:
  KernelServices& kernel() const;
  AgentRng& rng() { return rng_; }
  SimTime currentTime() const { return currentTime_; }

  void sendMessage(AgentId recipient, MessageBody body, Duration extraDelay = {});
  void setWakeup(SimTime t);

 private:
  AgentId id_;
  std::string name_;
  std::string type_;
  KernelServices* kernel_ = nullptr;
  AgentRng rng_;
  SimTime currentTime_{};
  std::vector<LogRecord> log_;
  bool logMessages_ = true;
};

}  // namespace mktsim
