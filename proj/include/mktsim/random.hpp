#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <utility>
#include <vector>

#include "mktsim/sim_time.hpp"

namespace mktsim {

/// SplitMix64 finalizer. Full avalanche on 64-bit inputs.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based generator: the k-th output is mix64(seed + k*gamma).
/// Satisfies UniformRandomBitGenerator.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;
  explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return UINT64_MAX; }
  result_type operator()() {
    const auto out = mix64(state_);
    state_ += 0x9e3779b97f4a7c15ULL;
    return out;
  }

 private:
  std::uint64_t state_;
};

/// Per-agent generator. Distributions below are written out rather than taken
/// from <random> so the draws are identical across standard libraries.
using AgentRng = std::mt19937_64;

template <class Gen>
double uniform01(Gen& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

template <class Gen>
double uniformReal(Gen& g, double lo, double hi) {
  return lo + (hi - lo) * uniform01(g);
}

/// Uniform integer in [lo, hi] via 128-bit multiply-shift.
template <class Gen>
std::int64_t uniformInt(Gen& g, std::int64_t lo, std::int64_t hi) {
  const auto span = static_cast<unsigned __int128>(static_cast<std::uint64_t>(hi - lo)) + 1;
  const auto r = static_cast<std::uint64_t>((static_cast<unsigned __int128>(g()) * span) >> 64);
  return lo + static_cast<std::int64_t>(r);
}

/// Box-Muller; consumes exactly two draws.
template <class Gen>
double standardNormal(Gen& g) {
  const double u1 = 1.0 - uniform01(g);  // (0, 1]
  const double u2 = uniform01(g);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

/// Seeds for every stochastic stream in a run. Each seed is a pure function of
/// the master seed and the stream's identity, so adding or changing one agent
/// leaves every other stream untouched.
class RandomPlan {
 public:
  RandomPlan() = default;
  RandomPlan(std::uint64_t masterSeed, const std::vector<AgentId>& agentIds);

  std::uint64_t masterSeed() const { return master_; }
  std::uint64_t agentSeed(AgentId id) const;
  const std::map<AgentId, std::uint64_t>& agentSeeds() const { return agents_; }

  static std::uint64_t agentSeedFor(std::uint64_t master, AgentId id);
  static std::uint64_t jitterSeedFor(std::uint64_t master, AgentId from, AgentId to);
  /// Stream for the fundamental-value generator of a symbol.
  static std::uint64_t oracleSeedFor(std::uint64_t master, std::uint64_t symbolHash);

  bool operator==(const RandomPlan&) const = default;

 private:
  std::uint64_t master_ = 0;
  std::map<AgentId, std::uint64_t> agents_;
};

RandomPlan deriveSeeds(std::uint64_t masterSeed, const std::vector<AgentId>& agentIds);

}  // namespace mktsim
