#include "mktsim/random.hpp"

#include <stdexcept>

namespace mktsim {
namespace {

// Domain tags keep agent, jitter and oracle streams disjoint.
constexpr std::uint64_t kAgentDomain = 0x4147454e54000001ULL;
constexpr std::uint64_t kJitterDomain = 0x4a49545445520002ULL;
constexpr std::uint64_t kOracleDomain = 0x4f5241434c450003ULL;

std::uint64_t combine(std::uint64_t h, std::uint64_t v) { return mix64(h ^ mix64(v)); }

}  // namespace

RandomPlan::RandomPlan(std::uint64_t masterSeed, const std::vector<AgentId>& agentIds) : master_(masterSeed) {
  for (auto id : agentIds) agents_[id] = agentSeedFor(masterSeed, id);
}

std::uint64_t RandomPlan::agentSeed(AgentId id) const {
  auto it = agents_.find(id);
  if (it == agents_.end()) throw std::out_of_range("no seed for agent " + std::to_string(id));
  return it->second;
}

std::uint64_t RandomPlan::agentSeedFor(std::uint64_t master, AgentId id) {
  return combine(combine(mix64(master), kAgentDomain), static_cast<std::uint64_t>(id));
}

std::uint64_t RandomPlan::jitterSeedFor(std::uint64_t master, AgentId from, AgentId to) {
  const auto pair = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(from)) << 32) |
                    static_cast<std::uint32_t>(to);
  return combine(combine(mix64(master), kJitterDomain), pair);
}

std::uint64_t RandomPlan::oracleSeedFor(std::uint64_t master, std::uint64_t symbolHash) {
  return combine(combine(mix64(master), kOracleDomain), symbolHash);
}

RandomPlan deriveSeeds(std::uint64_t masterSeed, const std::vector<AgentId>& agentIds) {
  return RandomPlan(masterSeed, agentIds);
}

}  // namespace mktsim
