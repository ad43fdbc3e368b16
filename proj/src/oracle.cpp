#include "mktsim/oracle.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mktsim {
namespace {

Cents toCents(double x) { return std::max<Cents>(1, static_cast<Cents>(std::llround(x))); }

}  // namespace

FundamentalSeries::FundamentalSeries(std::string symbol, std::vector<FundamentalSample> samples)
    : symbol_(std::move(symbol)), samples_(std::move(samples)) {
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (samples_[i].price <= 0) throw std::invalid_argument(symbol_ + ": fundamental prices must be positive");
    if (i && !(samples_[i - 1].time < samples_[i].time)) {
      throw std::invalid_argument(symbol_ + ": fundamental timestamps must be strictly increasing");
    }
  }
}

const FundamentalSample& FundamentalSeries::at(SimTime t) const {
  if (samples_.empty() || t < samples_.front().time) {
    throw std::out_of_range(symbol_ + ": no fundamental sample at or before " + formatTime(t));
  }
  auto it = std::upper_bound(samples_.begin(), samples_.end(), t,
                             [](SimTime v, const FundamentalSample& s) { return v < s.time; });
  return *std::prev(it);
}

Cents FundamentalSeries::openPrice() const {
  if (samples_.empty()) throw std::logic_error(symbol_ + ": empty fundamental series");
  return samples_.front().price;
}

FundamentalSeries generateOU(const std::string& symbol, const OUParams& p, SimTime from, SimTime to,
                             std::uint64_t seed) {
  if (p.reversionRate < 0 || p.volatility < 0) throw std::invalid_argument("OU rate and volatility must be >= 0");
  if (p.sampleInterval.nanos <= 0) throw std::invalid_argument("OU sample interval must be positive");
  if (to < from) throw std::invalid_argument("OU window is empty");

  SplitMix64 gen(seed);
  const double dt = static_cast<double>(p.sampleInterval.nanos) * 1e-9;
  const double diffusion = p.volatility * std::sqrt(dt);
  std::vector<FundamentalSample> samples;
  samples.reserve(static_cast<std::size_t>((to - from).nanos / p.sampleInterval.nanos) + 1);
  double x = p.open;
  for (SimTime t = from; t <= to; t += p.sampleInterval) {
    samples.push_back({t, toCents(x)});
    x += p.reversionRate * (p.mean - x) * dt;
    if (diffusion > 0) x += diffusion * standardNormal(gen);
    if ((to - t) < p.sampleInterval) break;
  }
  return FundamentalSeries(symbol, std::move(samples));
}

FundamentalSeries parseCsv(const std::string& symbol, const std::string& contents) {
  std::istringstream in(contents);
  std::string line;
  std::vector<FundamentalSample> samples;
  std::size_t lineNo = 0;
  auto fail = [&](const std::string& why) {
    throw std::invalid_argument("fundamental csv line " + std::to_string(lineNo) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++lineNo;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (samples.empty() && line == "timestamp_ns,price_cents") continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) fail("expected 2 columns");
    std::int64_t ts = 0, price = 0;
    auto parse = [&](std::string_view s, std::int64_t& v, const char* what) {
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) fail(std::string("bad ") + what);
    };
    parse(std::string_view(line).substr(0, comma), ts, "timestamp");
    parse(std::string_view(line).substr(comma + 1), price, "price");
    if (price <= 0) fail("price must be positive");
    if (!samples.empty() && ts <= samples.back().time.nanos) fail("timestamps must be strictly increasing");
    samples.push_back({SimTime{ts}, price});
  }
  if (samples.empty()) throw std::invalid_argument("fundamental csv has no rows");
  return FundamentalSeries(symbol, std::move(samples));
}

FundamentalSeries ingestCsv(const std::string& symbol, const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open fundamental csv " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parseCsv(symbol, ss.str());
}

void Oracle::add(FundamentalSeries series) {
  if (series.empty()) throw std::invalid_argument("empty fundamental series for " + series.symbol());
  auto symbol = series.symbol();
  series_[symbol] = std::move(series);
}

const FundamentalSeries& Oracle::series(const std::string& symbol) const {
  auto it = series_.find(symbol);
  if (it == series_.end()) throw std::out_of_range("oracle has no symbol " + symbol);
  return it->second;
}

Cents Oracle::observe(AgentId requester, const std::string& symbol, SimTime atTime, double noiseVariance,
                      AgentRng& rng) {
  if (noiseVariance < 0) throw std::invalid_argument("noise variance must be non-negative");
  const auto& sample = series(symbol).at(atTime);
  Cents observed = sample.price;
  if (noiseVariance > 0) {
    observed = toCents(static_cast<double>(sample.price) + std::sqrt(noiseVariance) * standardNormal(rng));
  }
  access_.push_back({requester, symbol, atTime, sample.time, sample.price, observed});
  return observed;
}

std::string Oracle::formatAccessLog() const {
  std::string out = "requester\tsymbol\trequest_ns\tsample_ns\tsample_price\tobserved\n";
  for (const auto& a : access_) {
    out += std::to_string(a.requester) + '\t' + a.symbol + '\t' + std::to_string(a.requestTime.nanos) + '\t' +
           std::to_string(a.sampleTime.nanos) + '\t' + std::to_string(a.samplePrice) + '\t' +
           std::to_string(a.observed) + '\n';
  }
  return out;
}

}  // namespace mktsim
