#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "mktsim/random.hpp"
#include "mktsim/sim_time.hpp"

namespace mktsim {

struct JitterSpec {
  enum class Kind { None, Uniform, Discrete };
  Kind kind = Kind::None;
  std::int64_t lo = 0;  // Uniform: inclusive nanosecond bounds
  std::int64_t hi = 0;
  std::vector<std::pair<std::int64_t, double>> weighted;  // Discrete: (nanos, weight)

  static JitterSpec none() { return {}; }
  static JitterSpec uniform(std::int64_t lo, std::int64_t hi);
  static JitterSpec discrete(std::vector<std::pair<std::int64_t, double>> weighted);
};

/// Directed pairwise latency plus per-pair noise. Every directed pair draws
/// its jitter from its own stream, so the k-th draw on (i, j) depends only on
/// the master seed, i, j and k.
class LatencyModel {
 public:
  LatencyModel() = default;
  LatencyModel(std::size_t agents, Duration defaultLatency);

  std::size_t size() const { return n_; }
  void setLatency(AgentId from, AgentId to, Duration latency);
  Duration latency(AgentId from, AgentId to) const;

  void setDefaultJitter(JitterSpec spec);
  void setJitter(AgentId from, AgentId to, JitterSpec spec);
  const JitterSpec& jitter(AgentId from, AgentId to) const;

  /// Resets every jitter stream from `masterSeed`.
  void seedStreams(std::uint64_t masterSeed);

  /// Next jitter draw on the (from, to) stream.
  Duration drawJitter(AgentId from, AgentId to);

 private:
  std::size_t slot(AgentId from, AgentId to) const;

  std::size_t n_ = 0;
  std::vector<std::int64_t> matrix_;
  JitterSpec defaultJitter_;
  std::map<std::pair<AgentId, AgentId>, JitterSpec> jitterOverrides_;
  std::vector<SplitMix64> streams_;
};

}  // namespace mktsim
