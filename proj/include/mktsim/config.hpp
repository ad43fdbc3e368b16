#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "mktsim/exchange.hpp"
#include "mktsim/latency.hpp"
#include "mktsim/oracle.hpp"
#include "mktsim/trading_agent.hpp"

namespace mktsim {

using Json = nlohmann::ordered_json;

/// Every schema violation found in a config, reported together.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

struct OracleSpec {
  std::string symbol;
  std::optional<OUParams> ou;
  std::optional<std::filesystem::path> csv;
};

struct AgentGroup {
  std::string type;
  int count = 0;
  Json params = Json::object();
  std::optional<Duration> computationDelay;
};

struct LatencyOverride {
  AgentId from = 0;
  AgentId to = 0;
  Duration latency{};
};

struct LatencySpec {
  Duration defaultLatency{};
  std::vector<LatencyOverride> overrides;
  JitterSpec jitter;
};

struct LoggingSpec {
  std::filesystem::path logDir;
  bool logMessages = true;
};

struct ExperimentConfig {
  std::string name;
  std::string date;
  SimTime dateStart{};
  SimTime start{};
  SimTime stop{};
  SimTime marketOpen{};
  SimTime marketClose{};
  std::uint64_t seed = 0;
  std::vector<OracleSpec> oracle;
  std::vector<AgentGroup> agents;
  LatencySpec latency;
  LoggingSpec logging;
  Duration defaultComputationDelay{};
  /// Fully-resolved document after overrides; echoed into the manifest.
  Json resolved;

  std::size_t agentCount() const;
};

struct CliOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> start;
  std::optional<std::string> stop;
  std::optional<std::filesystem::path> logDir;
  /// "selector.param=value"; selector is a group index or an agent type.
  std::vector<std::string> set;
};

/// Applies overrides to a raw document, then validates it.
ExperimentConfig parseConfig(Json document, const CliOverrides& overrides = {});
ExperimentConfig loadConfig(const std::filesystem::path& file, const CliOverrides& overrides = {});

/// Pairwise matrix from the default plus overrides, zero on the diagonal.
LatencyModel buildLatency(const LatencySpec& spec, std::size_t agentCount);

/// Parses a duration given as integer nanoseconds or a string like "30s".
Duration durationFromJson(const Json& v);

// Per-type parameter blocks. Unknown keys and bad values throw ConfigError.
ExchangeConfig exchangeParams(const Json& params, const ExperimentConfig& config);
MomentumParams momentumParams(const Json& params);
BackgroundParams backgroundParams(const Json& params);
ImpactParams impactParams(const Json& params, const ExperimentConfig& config);

}  // namespace mktsim
