#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mktsim/experiment.hpp"

namespace mktsim {

struct TradePoint {
  SimTime time{};
  Cents price = 0;
};

/// One impact event: the trade tape of its run and the impact agent's outcome.
struct ImpactTrial {
  std::string label;
  std::optional<SimTime> impactTime;  // exchange time of the impact order's first fill
  std::vector<TradePoint> trades;     // time-ordered
  std::optional<double> greed;
  std::int64_t sharesTraded = 0;
  std::optional<double> profit;  // mark to market at close minus starting cash, cents
};

struct StudyOptions {
  Duration pre = Duration::minutes(30);
  Duration post = Duration::minutes(30);
  Duration bucket = Duration::seconds(30);
  /// Trailing-mean width, in buckets, applied to the mean curve. 1 = none.
  int smoothing = 1;
};

struct EventStudyResult {
  StudyOptions options;
  std::vector<std::int64_t> offsets;  // ns relative to the impact, multiples of bucket
  /// Per included trial: price just before impact+offset over the price just before impact.
  std::vector<std::vector<std::optional<double>>> curves;
  std::vector<std::string> included;
  std::vector<std::string> excluded;
  std::vector<double> mean;
  std::vector<double> stddev;  // sample standard deviation, 0 below two trials
  std::vector<std::size_t> n;
  std::vector<double> smoothed;
};

EventStudyResult eventStudy(const std::vector<ImpactTrial>& trials, const StudyOptions& options);

/// offset_ns,mean,stddev,n (plus mean_smoothed when smoothing > 1).
std::string formatStudyCsv(const EventStudyResult& result);

/// Trial from an in-memory run; uses the lowest-id impact agent.
ImpactTrial trialFromRun(const RunSummary& run, const std::string& label);
/// Trial from a run directory written by runExperiment.
ImpactTrial loadTrial(const std::filesystem::path& runDir);

/// Run directories (those holding manifest.json) matching a shell glob.
std::vector<std::filesystem::path> expandRuns(const std::string& pattern);

double pearson(std::span<const double> x, std::span<const double> y);
/// Pearson on average ranks.
double spearman(std::span<const double> x, std::span<const double> y);

struct ProfitStats {
  std::size_t trials = 0;  // trials that traded
  double profitVsGreedSpearman = 0;
  double profitPerShareVsSizePearson = 0;
};
ProfitStats profitStats(const std::vector<ImpactTrial>& trials);

}  // namespace mktsim
