#include "mktsim/event_study.hpp"

#include <glob.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace mktsim {
namespace {

std::string readFile(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::optional<Cents> lastBefore(const std::vector<TradePoint>& trades, SimTime t) {
  auto it = std::lower_bound(trades.begin(), trades.end(), t,
                             [](const TradePoint& p, SimTime v) { return p.time < v; });
  if (it == trades.begin()) return std::nullopt;
  return std::prev(it)->price;
}

std::vector<double> ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

EventStudyResult eventStudy(const std::vector<ImpactTrial>& trials, const StudyOptions& opt) {
  if (opt.bucket.nanos <= 0) throw std::invalid_argument("bucket width must be positive");
  if (opt.pre.nanos < 0 || opt.post.nanos < 0) throw std::invalid_argument("windows must be non-negative");
  if (opt.smoothing < 1) throw std::invalid_argument("smoothing must be at least one bucket");
  EventStudyResult r;
  r.options = opt;
  for (std::int64_t k = -(opt.pre.nanos / opt.bucket.nanos); k * opt.bucket.nanos <= opt.post.nanos; ++k) {
    r.offsets.push_back(k * opt.bucket.nanos);
  }

  for (const auto& t : trials) {
    if (!t.impactTime) {
      r.excluded.push_back(t.label);
      continue;
    }
    const SimTime T = *t.impactTime;
    const bool anyInWindow = std::any_of(t.trades.begin(), t.trades.end(), [&](const TradePoint& p) {
      return p.time >= T - opt.pre && p.time <= T + opt.post;
    });
    const auto ref = lastBefore(t.trades, T);
    if (!anyInWindow || !ref) {
      r.excluded.push_back(t.label);
      continue;
    }
    std::vector<std::optional<double>> curve;
    for (auto off : r.offsets) {
      const auto p = lastBefore(t.trades, T + Duration{off});
      curve.push_back(p ? std::optional<double>(static_cast<double>(*p) / static_cast<double>(*ref)) : std::nullopt);
    }
    r.curves.push_back(std::move(curve));
    r.included.push_back(t.label);
  }

  for (std::size_t i = 0; i < r.offsets.size(); ++i) {
    double sum = 0;
    std::size_t n = 0;
    for (const auto& c : r.curves) {
      if (c[i]) sum += *c[i], ++n;
    }
    const double mean = n ? sum / static_cast<double>(n) : std::nan("");
    double ss = 0;
    for (const auto& c : r.curves) {
      if (c[i]) ss += (*c[i] - mean) * (*c[i] - mean);
    }
    r.mean.push_back(mean);
    r.stddev.push_back(n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0);
    r.n.push_back(n);
  }
  for (std::size_t i = 0; i < r.mean.size(); ++i) {
    double sum = 0;
    int n = 0;
    for (std::size_t k = 0; k < static_cast<std::size_t>(opt.smoothing) && k <= i; ++k) {
      if (!std::isnan(r.mean[i - k])) sum += r.mean[i - k], ++n;
    }
    r.smoothed.push_back(n ? sum / n : std::nan(""));
  }
  return r;
}

std::string formatStudyCsv(const EventStudyResult& r) {
  std::ostringstream out;
  out.precision(12);
  out << "offset_ns,mean,stddev,n" << (r.options.smoothing > 1 ? ",mean_smoothed" : "") << "\n";
  for (std::size_t i = 0; i < r.offsets.size(); ++i) {
    out << r.offsets[i] << ',';
    if (r.n[i]) out << r.mean[i];
    out << ',' << r.stddev[i] << ',' << r.n[i];
    if (r.options.smoothing > 1) {
      out << ',';
      if (!std::isnan(r.smoothed[i])) out << r.smoothed[i];
    }
    out << "\n";
  }
  return out.str();
}

ImpactTrial trialFromRun(const RunSummary& run, const std::string& label) {
  ImpactTrial t;
  t.label = label;
  for (const auto& [symbol, e] : run.trades) t.trades.push_back({e.time, e.price});
  const AgentOutcome* impact = nullptr;
  for (const auto& a : run.agents) {
    if (a.type == ImpactAgent::kType) {
      impact = &a;
      break;
    }
  }
  if (!impact) return t;
  const auto& group = run.manifest.at("config").at("agents").at(impact->group);
  if (group.contains("params") && group["params"].contains("greed")) t.greed = group["params"]["greed"].get<double>();
  for (const auto& [symbol, e] : run.trades) {
    if (e.incomingAgent == impact->id) {
      t.impactTime = e.time;
      break;
    }
  }
  for (const auto& [symbol, qty] : impact->portfolio.holdings) t.sharesTraded += std::llabs(qty);
  if (impact->markToMarket) t.profit = static_cast<double>(*impact->markToMarket - impact->startingCash);
  return t;
}

ImpactTrial loadTrial(const std::filesystem::path& dir) {
  const auto manifest = Json::parse(readFile(dir / "manifest.json"));
  ImpactTrial t;
  t.label = dir.string();
  std::optional<AgentId> impactId;
  std::optional<std::string> exchangeLog, impactLog;
  for (const auto& a : manifest.at("agents")) {
    const auto type = a.at("type").get<std::string>();
    const auto log = a.at("log").is_string() ? std::optional(a.at("log").get<std::string>()) : std::nullopt;
    if (type == ExchangeAgent::kType && !exchangeLog) exchangeLog = log;
    if (type == ImpactAgent::kType && !impactId) {
      impactId = a.at("id").get<AgentId>();
      impactLog = log;
      const auto& group = manifest.at("config").at("agents").at(a.at("group").get<std::size_t>());
      if (group.contains("params") && group["params"].contains("greed")) t.greed = group["params"]["greed"].get<double>();
    }
  }
  if (exchangeLog) {
    for (const auto& rec : parseAgentLog(readFile(dir / *exchangeLog))) {
      if (rec.type != "TRADE") continue;
      const auto row = parseTradeRow(rec.time, rec.payload);
      t.trades.push_back({row.time, row.price});
      const bool buyAggressor = rec.payload.find("aggressor=BUY") != std::string::npos;
      const bool fromImpact = impactId && (buyAggressor ? row.buyer : row.seller) == *impactId;
      if (fromImpact && !t.impactTime) t.impactTime = row.time;
    }
  }
  if (impactLog) {
    std::optional<double> start, mark;
    for (const auto& rec : parseAgentLog(readFile(dir / *impactLog))) {
      if (rec.type == "STARTING_CASH") start = std::stod(rec.payload);
      if (rec.type == "MARK_TO_MARKET") mark = std::stod(rec.payload);
      if (rec.type == "FINAL_HOLDINGS") {
        std::istringstream in(rec.payload);
        std::string tok;
        while (in >> tok) {
          if (tok.rfind("cash=", 0) == 0) continue;
          const auto eq = tok.find('=');
          if (eq != std::string::npos) t.sharesTraded += std::llabs(std::stoll(tok.substr(eq + 1)));
        }
      }
    }
    if (start && mark) t.profit = *mark - *start;
  }
  return t;
}

std::vector<std::filesystem::path> expandRuns(const std::string& pattern) {
  glob_t g{};
  std::vector<std::filesystem::path> out;
  if (::glob(pattern.c_str(), 0, nullptr, &g) == 0) {
    for (std::size_t i = 0; i < g.gl_pathc; ++i) {
      std::filesystem::path p(g.gl_pathv[i]);
      if (std::filesystem::is_regular_file(p) && p.filename() == "manifest.json") p = p.parent_path();
      if (std::filesystem::exists(p / "manifest.json")) out.push_back(p);
    }
  }
  globfree(&g);
  std::sort(out.begin(), out.end());
  return out;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("correlation needs two equal-length samples");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0 || syy == 0) return std::nan("");
  return sxy / std::sqrt(sxx * syy);
}

double spearman(std::span<const double> x, std::span<const double> y) {
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  return pearson(rx, ry);
}

ProfitStats profitStats(const std::vector<ImpactTrial>& trials) {
  std::vector<double> greed, profit, pps, size;
  for (const auto& t : trials) {
    if (!t.profit || !t.greed || t.sharesTraded == 0) continue;
    greed.push_back(*t.greed);
    profit.push_back(*t.profit);
    size.push_back(static_cast<double>(t.sharesTraded));
    pps.push_back(*t.profit / static_cast<double>(t.sharesTraded));
  }
  ProfitStats s;
  s.trials = greed.size();
  if (s.trials >= 2) {
    s.profitVsGreedSpearman = spearman(greed, profit);
    s.profitPerShareVsSizePearson = pearson(pps, size);
  }
  return s;
}

}  // namespace mktsim
