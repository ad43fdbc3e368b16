#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mktsim/config.hpp"
#include "mktsim/kernel.hpp"

namespace mktsim {

/// Lowercase hex SHA-256.
std::string sha256Hex(std::string_view data);

/// FNV-1a of the symbol; feeds the oracle seed.
std::uint64_t symbolHash(std::string_view symbol);

struct ArtifactEntry {
  std::string name;
  std::string sha256;
  std::uint64_t bytes = 0;
};

struct AgentOutcome {
  AgentId id = 0;
  std::string name;
  std::string type;
  std::uint64_t seed = 0;
  std::size_t group = 0;
  bool trader = false;
  Cents startingCash = 0;
  Portfolio portfolio;
  std::optional<Cents> markToMarket;
};

struct RunOptions {
  /// Keep every artifact's contents in RunSummary::files.
  bool keepContents = false;
  std::function<void(const DeliveryTrace&)> trace;
};

struct RunSummary {
  RunResult result;
  std::vector<AgentOutcome> agents;
  /// Every execution at the exchange, in processing order.
  std::vector<std::pair<std::string, Execution>> trades;
  /// Exchange-side delivery time of each agent's first LimitOrder.
  std::map<AgentId, SimTime> firstOrderDelivery;
  /// Exchange-side delivery time of each agent's first message of any kind.
  std::map<AgentId, SimTime> firstMessageDelivery;
  std::vector<OracleAccess> oracleAccess;
  std::map<std::string, FundamentalSeries> fundamentals;
  std::vector<ArtifactEntry> artifacts;
  std::map<std::string, std::string> files;
  Json manifest;
};

/// Builds the oracle, population and kernel, runs, and writes artifacts plus
/// manifest.json into config.logging.logDir (nothing hits disk if it is empty).
RunSummary runExperiment(const ExperimentConfig& config, const RunOptions& options = {});

/// Recomputes every hash listed in <dir>/manifest.json. Returns one line per problem.
std::vector<std::string> verifyRun(const std::filesystem::path& dir);

/// Treatment patch: {"add": {type, count: 1, params}} or
/// {"modify": {"group": i, "params": {...}}} against a single-agent group.
struct ABResult {
  RunSummary control;
  RunSummary treatment;
  Json diff;
  bool isolated = false;  // seeds unchanged and divergence not before the change
};

ExperimentConfig applyPatch(const ExperimentConfig& control, const Json& patch, AgentId* changedAgent = nullptr);
ABResult runAB(const ExperimentConfig& control, const Json& patch, const std::filesystem::path& outDir,
               const RunOptions& options = {});

}  // namespace mktsim
