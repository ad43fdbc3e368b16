#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "mktsim/random.hpp"
#include "mktsim/sim_time.hpp"

namespace mktsim {

struct OUParams {
  double mean = 10'000;         // cents
  double reversionRate = 0;     // per second
  double volatility = 0;        // cents per sqrt(second)
  double open = 10'000;         // cents
  Duration sampleInterval = Duration::seconds(1);
};

struct FundamentalSample {
  SimTime time{};
  Cents price = 0;
  bool operator==(const FundamentalSample&) const = default;
};

/// Time-ordered fundamental prices for one symbol. Between samples the value
/// is the most recent sample at or before the query time.
class FundamentalSeries {
 public:
  FundamentalSeries() = default;
  FundamentalSeries(std::string symbol, std::vector<FundamentalSample> samples);

  const std::string& symbol() const { return symbol_; }
  const std::vector<FundamentalSample>& samples() const { return samples_; }
  bool empty() const { return samples_.empty(); }

  /// Latest sample with time <= t. Throws if t precedes the first sample.
  const FundamentalSample& at(SimTime t) const;
  Cents openPrice() const;

 private:
  std::string symbol_;
  std::vector<FundamentalSample> samples_;
};

/// Euler-discretized Ornstein-Uhlenbeck path sampled every
/// params.sampleInterval over [from, to]:
///   X += kappa (mu - X) dt + sigma sqrt(dt) z.
/// Stored prices are rounded to cents and floored at one cent.
FundamentalSeries generateOU(const std::string& symbol, const OUParams& params, SimTime from, SimTime to,
                             std::uint64_t seed);

/// Rows of `timestamp_ns,price_cents`. Blank lines and lines starting with
/// '#' are skipped; an optional `timestamp_ns,price_cents` header is allowed.
FundamentalSeries ingestCsv(const std::string& symbol, const std::filesystem::path& path);
FundamentalSeries parseCsv(const std::string& symbol, const std::string& contents);

struct OracleAccess {
  AgentId requester = 0;
  std::string symbol;
  SimTime requestTime{};
  SimTime sampleTime{};
  Cents samplePrice = 0;
  Cents observed = 0;
};

/// Holds the fundamental series of every listed symbol. Agents call it
/// directly; every observation is recorded for the gating audit.
class Oracle {
 public:
  void add(FundamentalSeries series);
  bool has(const std::string& symbol) const { return series_.contains(symbol); }
  const FundamentalSeries& series(const std::string& symbol) const;
  Cents openPrice(const std::string& symbol) const { return series(symbol).openPrice(); }

  /// Most recent sample at or before `atTime` plus N(0, noiseVariance) drawn
  /// from the caller's generator, rounded to cents and floored at one cent.
  Cents observe(AgentId requester, const std::string& symbol, SimTime atTime, double noiseVariance, AgentRng& rng);

  const std::vector<OracleAccess>& accessLog() const { return access_; }
  /// Line-delimited audit: requester, symbol, request time, sample time, sample price, observed.
  std::string formatAccessLog() const;

 private:
  std::map<std::string, FundamentalSeries> series_;
  std::vector<OracleAccess> access_;
};

}  // namespace mktsim
