#include "mktsim/latency.hpp"

#include <stdexcept>
#include <string>

namespace mktsim {

JitterSpec JitterSpec::uniform(std::int64_t lo, std::int64_t hi) {
  if (lo < 0 || hi < lo) throw std::invalid_argument("uniform jitter needs 0 <= lo <= hi");
  JitterSpec s;
  s.kind = Kind::Uniform;
  s.lo = lo;
  s.hi = hi;
  return s;
}

JitterSpec JitterSpec::discrete(std::vector<std::pair<std::int64_t, double>> weighted) {
  if (weighted.empty()) throw std::invalid_argument("discrete jitter needs at least one value");
  double total = 0;
  for (const auto& [v, w] : weighted) {
    if (v < 0) throw std::invalid_argument("jitter values must be non-negative");
    if (!(w >= 0)) throw std::invalid_argument("jitter weights must be non-negative");
    total += w;
  }
  if (!(total > 0)) throw std::invalid_argument("jitter weights must not all be zero");
  JitterSpec s;
  s.kind = Kind::Discrete;
  s.weighted = std::move(weighted);
  return s;
}

LatencyModel::LatencyModel(std::size_t agents, Duration defaultLatency)
    : n_(agents), matrix_(agents * agents, defaultLatency.nanos) {
  if (defaultLatency.nanos < 0) throw std::invalid_argument("latency must be non-negative");
  for (std::size_t i = 0; i < n_; ++i) matrix_[i * n_ + i] = 0;
}

std::size_t LatencyModel::slot(AgentId from, AgentId to) const {
  if (from < 0 || to < 0 || static_cast<std::size_t>(from) >= n_ || static_cast<std::size_t>(to) >= n_) {
    throw std::out_of_range("latency pair (" + std::to_string(from) + ", " + std::to_string(to) + ") out of range");
  }
  return static_cast<std::size_t>(from) * n_ + static_cast<std::size_t>(to);
}

void LatencyModel::setLatency(AgentId from, AgentId to, Duration latency) {
  if (latency.nanos < 0) throw std::invalid_argument("latency must be non-negative");
  matrix_[slot(from, to)] = latency.nanos;
}

Duration LatencyModel::latency(AgentId from, AgentId to) const { return {matrix_[slot(from, to)]}; }

void LatencyModel::setDefaultJitter(JitterSpec spec) { defaultJitter_ = std::move(spec); }

void LatencyModel::setJitter(AgentId from, AgentId to, JitterSpec spec) {
  slot(from, to);
  jitterOverrides_[{from, to}] = std::move(spec);
}

const JitterSpec& LatencyModel::jitter(AgentId from, AgentId to) const {
  auto it = jitterOverrides_.find({from, to});
  return it == jitterOverrides_.end() ? defaultJitter_ : it->second;
}

void LatencyModel::seedStreams(std::uint64_t masterSeed) {
  streams_.clear();
  streams_.reserve(n_ * n_);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) {
      streams_.emplace_back(RandomPlan::jitterSeedFor(masterSeed, static_cast<AgentId>(i), static_cast<AgentId>(j)));
    }
  }
}

Duration LatencyModel::drawJitter(AgentId from, AgentId to) {
  const auto& spec = jitter(from, to);
  if (spec.kind == JitterSpec::Kind::None) return {};
  if (streams_.empty()) throw std::logic_error("jitter streams not seeded");
  auto& stream = streams_[slot(from, to)];
  if (spec.kind == JitterSpec::Kind::Uniform) return {uniformInt(stream, spec.lo, spec.hi)};

  double total = 0;
  for (const auto& [v, w] : spec.weighted) total += w;
  double u = uniform01(stream) * total;
  for (const auto& [v, w] : spec.weighted) {
    if (u < w) return {v};
    u -= w;
  }
  return {spec.weighted.back().first};
}

}  // namespace mktsim
