#include "mktsim/config.hpp"

#include <fstream>
#include <set>

namespace mktsim {
namespace {

std::string joinViolations(const std::vector<std::string>& v) {
  std::string out = "invalid experiment config:";
  for (const auto& s : v) out += "\n  - " + s;
  return out;
}

/// Reads typed values out of a JSON object, collecting violations instead of
/// stopping at the first one, and flags keys nobody asked for.
class Fields {
 public:
  Fields(const Json& obj, std::string where, std::vector<std::string>& errors)
      : obj_(obj), where_(std::move(where)), errors_(errors) {
    if (!obj_.is_object()) fail("", "must be an object");
  }
  ~Fields() = default;

  bool has(const std::string& key) const { return obj_.is_object() && obj_.contains(key); }

  template <class T>
  T get(const std::string& key, T fallback) {
    used_.insert(key);
    if (!has(key)) return fallback;
    try {
      return obj_.at(key).get<T>();
    } catch (const std::exception&) {
      fail(key, "has the wrong type");
      return fallback;
    }
  }

  template <class T>
  T require(const std::string& key) {
    used_.insert(key);
    if (!has(key)) {
      fail(key, "is required");
      return T{};
    }
    return get<T>(key, T{});
  }

  Duration duration(const std::string& key, Duration fallback) {
    used_.insert(key);
    if (!has(key)) return fallback;
    try {
      return durationFromJson(obj_.at(key));
    } catch (const std::exception& e) {
      fail(key, e.what());
      return fallback;
    }
  }

  const Json* raw(const std::string& key) {
    used_.insert(key);
    return has(key) ? &obj_.at(key) : nullptr;
  }

  void fail(const std::string& key, const std::string& why) {
    errors_.push_back(where_ + (key.empty() ? "" : "." + key) + " " + why);
  }

  void rejectUnknown() {
    if (!obj_.is_object()) return;
    for (const auto& [key, value] : obj_.items()) {
      if (!used_.contains(key)) errors_.push_back(where_ + "." + key + " is not a recognised field");
    }
  }

 private:
  const Json& obj_;
  std::string where_;
  std::vector<std::string>& errors_;
  std::set<std::string> used_;
};

SimTime timeOnDate(const ExperimentConfig& c, const std::string& clock, Fields& f, const std::string& key) {
  try {
    return parseTimeOfDay(c.dateStart, clock);
  } catch (const std::exception& e) {
    f.fail(key, e.what());
    return c.dateStart;
  }
}

void throwIf(const std::vector<std::string>& errors) {
  if (!errors.empty()) throw ConfigError(errors);
}

Json parseValue(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error&) {
    return Json(text);
  }
}

void applySet(Json& doc, const std::string& assignment, std::vector<std::string>& errors) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
    errors.push_back("--set '" + assignment + "' must look like selector.param=value");
    return;
  }
  const auto selector = assignment.substr(0, dot);
  const auto param = assignment.substr(dot + 1, eq - dot - 1);
  const auto value = parseValue(assignment.substr(eq + 1));
  if (!doc.contains("agents") || !doc["agents"].is_array()) {
    errors.push_back("--set '" + assignment + "': config has no agents");
    return;
  }
  auto& groups = doc["agents"];
  bool matched = false;
  const bool numeric = !selector.empty() && selector.find_first_not_of("0123456789") == std::string::npos;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const bool hit = numeric ? std::to_string(i) == selector : groups[i].value("type", "") == selector;
    if (!hit) continue;
    matched = true;
    if (param == "count" || param == "computation_delay") {
      groups[i][param] = value;
    } else {
      groups[i]["params"][param] = value;
    }
  }
  if (!matched) errors.push_back("--set '" + assignment + "': no agent group matches '" + selector + "'");
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> violations)
    : std::runtime_error(joinViolations(violations)), violations_(std::move(violations)) {}

std::size_t ExperimentConfig::agentCount() const {
  std::size_t n = 0;
  for (const auto& g : agents) n += static_cast<std::size_t>(std::max(g.count, 0));
  return n;
}

Duration durationFromJson(const Json& v) {
  if (v.is_number_integer()) return {v.get<std::int64_t>()};
  if (v.is_string()) return parseDuration(v.get<std::string>());
  throw std::invalid_argument("duration must be integer nanoseconds or a string like \"30s\"");
}

ExchangeConfig exchangeParams(const Json& params, const ExperimentConfig& c) {
  std::vector<std::string> errors;
  Fields f(params, "ExchangeAgent.params", errors);
  ExchangeConfig out;
  out.marketOpen = c.marketOpen;
  out.marketClose = c.marketClose;
  out.symbols = f.get<std::vector<std::string>>("symbols", {});
  if (out.symbols.empty()) {
    for (const auto& o : c.oracle) out.symbols.push_back(o.symbol);
  }
  for (const auto& s : out.symbols) {
    const bool known = std::any_of(c.oracle.begin(), c.oracle.end(), [&](const OracleSpec& o) { return o.symbol == s; });
    if (!known) f.fail("symbols", "references unknown symbol '" + s + "'");
  }
  try {
    out.streamMode = parseStreamMode(f.get<std::string>("stream", "off"));
  } catch (const std::exception& e) {
    f.fail("stream", e.what());
  }
  out.snapshotFrequency = f.duration("snapshot_frequency", Duration::seconds(1));
  out.snapshotLevels = f.get<int>("snapshot_levels", 5);
  if (out.snapshotFrequency.nanos <= 0) f.fail("snapshot_frequency", "must be positive");
  if (out.snapshotLevels < 1) f.fail("snapshot_levels", "must be at least 1");
  f.rejectUnknown();
  throwIf(errors);
  return out;
}

MomentumParams momentumParams(const Json& params) {
  std::vector<std::string> errors;
  Fields f(params, "MomentumAgent.params", errors);
  MomentumParams p;
  p.symbol = f.get<std::string>("symbol", p.symbol);
  p.startingCash = f.get<Cents>("starting_cash", p.startingCash);
  p.lookback = f.get<std::size_t>("lookback", p.lookback);
  p.wakeInterval = f.duration("wake_interval", p.wakeInterval);
  p.positionSize = f.get<std::int64_t>("position_size", p.positionSize);
  if (p.lookback < 2) f.fail("lookback", "must be at least 2");
  if (p.wakeInterval.nanos <= 0) f.fail("wake_interval", "must be positive");
  if (p.positionSize <= 0) f.fail("position_size", "must be positive");
  f.rejectUnknown();
  throwIf(errors);
  return p;
}

BackgroundParams backgroundParams(const Json& params) {
  std::vector<std::string> errors;
  Fields f(params, "BackgroundAgent.params", errors);
  BackgroundParams p;
  p.symbol = f.get<std::string>("symbol", p.symbol);
  p.startingCash = f.get<Cents>("starting_cash", p.startingCash);
  p.wakeFrequency = f.duration("wake_frequency", p.wakeFrequency);
  p.wakeJitter = f.get<double>("wake_jitter", p.wakeJitter);
  p.targetHoldings = f.get<std::int64_t>("target_holdings", p.targetHoldings);
  p.observationVariance = f.get<double>("observation_variance", p.observationVariance);
  if (p.wakeFrequency.nanos <= 0) f.fail("wake_frequency", "must be positive");
  if (p.wakeJitter < 0 || p.wakeJitter >= 1) f.fail("wake_jitter", "must be in [0, 1)");
  if (p.targetHoldings < 0) f.fail("target_holdings", "must be non-negative");
  if (!(p.observationVariance > 0)) f.fail("observation_variance", "must be positive");
  f.rejectUnknown();
  throwIf(errors);
  return p;
}

ImpactParams impactParams(const Json& params, const ExperimentConfig& c) {
  std::vector<std::string> errors;
  Fields f(params, "ImpactAgent.params", errors);
  ImpactParams p;
  p.symbol = f.get<std::string>("symbol", p.symbol);
  p.startingCash = f.get<Cents>("starting_cash", p.startingCash);
  p.triggerTime = timeOnDate(c, f.require<std::string>("trigger_time"), f, "trigger_time");
  p.greed = f.get<double>("greed", p.greed);
  const auto side = f.get<std::string>("side", "buy");
  if (side != "buy" && side != "sell") f.fail("side", "must be buy or sell");
  p.isBuy = side == "buy";
  p.window = f.get<std::size_t>("window", p.window);
  if (p.greed < 0) f.fail("greed", "must be non-negative");
  if (p.window < 1) f.fail("window", "must be at least 1");
  f.rejectUnknown();
  throwIf(errors);
  return p;
}

ExperimentConfig parseConfig(Json doc, const CliOverrides& overrides) {
  std::vector<std::string> errors;
  if (!doc.is_object()) throw ConfigError({"config must be a JSON object"});

  if (overrides.seed) doc["seed"] = *overrides.seed;
  if (overrides.start) doc["start"] = *overrides.start;
  if (overrides.stop) doc["stop"] = *overrides.stop;
  if (overrides.logDir) doc["logging"]["log_dir"] = overrides.logDir->string();
  for (const auto& s : overrides.set) applySet(doc, s, errors);
  throwIf(errors);

  ExperimentConfig c;
  Fields top(doc, "config", errors);
  c.name = top.get<std::string>("name", "experiment");
  c.date = top.require<std::string>("date");
  try {
    c.dateStart = parseDate(c.date);
  } catch (const std::exception& e) {
    top.fail("date", e.what());
  }
  c.start = timeOnDate(c, top.require<std::string>("start"), top, "start");
  c.stop = timeOnDate(c, top.require<std::string>("stop"), top, "stop");
  c.marketOpen = timeOnDate(c, top.require<std::string>("market_open"), top, "market_open");
  c.marketClose = timeOnDate(c, top.require<std::string>("market_close"), top, "market_close");
  if (!(c.start < c.stop)) top.fail("start", "must precede stop");
  if (!(c.marketOpen < c.marketClose)) top.fail("market_open", "must precede market_close");
  c.seed = top.require<std::uint64_t>("seed");
  c.defaultComputationDelay = top.duration("computation_delay", Duration{});
  if (c.defaultComputationDelay.nanos < 0) top.fail("computation_delay", "must be non-negative");

  if (const auto* oracle = top.raw("oracle")) {
    if (!oracle->is_object() || oracle->empty()) {
      top.fail("oracle", "must map at least one symbol to a source");
    } else {
      for (const auto& [symbol, spec] : oracle->items()) {
        Fields f(spec, "oracle." + symbol, errors);
        OracleSpec o;
        o.symbol = symbol;
        const auto source = f.require<std::string>("source");
        if (source == "ou") {
          OUParams p;
          p.mean = f.require<double>("mean");
          p.open = f.get<double>("open", p.mean);
          p.reversionRate = f.get<double>("reversion_rate", 0.0);
          p.volatility = f.get<double>("volatility", 0.0);
          p.sampleInterval = f.duration("sample_interval", Duration::seconds(1));
          if (p.reversionRate < 0) f.fail("reversion_rate", "must be non-negative");
          if (p.volatility < 0) f.fail("volatility", "must be non-negative");
          if (p.sampleInterval.nanos <= 0) f.fail("sample_interval", "must be positive");
          if (!(p.open > 0)) f.fail("open", "must be positive");
          o.ou = p;
        } else if (source == "csv") {
          o.csv = f.require<std::string>("path");
        } else {
          f.fail("source", "must be 'ou' or 'csv'");
        }
        f.rejectUnknown();
        c.oracle.push_back(std::move(o));
      }
    }
  } else {
    top.fail("oracle", "is required");
  }

  bool haveExchange = false;
  if (const auto* agents = top.raw("agents"); agents && agents->is_array()) {
    for (std::size_t i = 0; i < agents->size(); ++i) {
      const auto where = "agents[" + std::to_string(i) + "]";
      Fields f((*agents)[i], where, errors);
      AgentGroup g;
      g.type = f.require<std::string>("type");
      g.count = f.get<int>("count", 1);
      if (const auto* p = f.raw("params")) g.params = *p;
      if (f.has("computation_delay")) g.computationDelay = f.duration("computation_delay", Duration{});
      if (g.count < 0) f.fail("count", "must be non-negative");
      if (g.computationDelay && g.computationDelay->nanos < 0) f.fail("computation_delay", "must be non-negative");
      f.rejectUnknown();
      if (g.type == ExchangeAgent::kType && g.count > 0) haveExchange = true;
      c.agents.push_back(std::move(g));
    }
  } else {
    top.fail("agents", "must be a list of agent groups");
  }

  if (const auto* lat = top.raw("latency")) {
    Fields f(*lat, "latency", errors);
    c.latency.defaultLatency = f.duration("default", Duration{});
    if (c.latency.defaultLatency.nanos < 0) f.fail("default", "must be non-negative");
    if (const auto* ov = f.raw("overrides")) {
      for (const auto& item : *ov) {
        Fields o(item, "latency.overrides[]", errors);
        LatencyOverride x{o.require<AgentId>("from"), o.require<AgentId>("to"), o.duration("latency", Duration{})};
        if (x.latency.nanos < 0) o.fail("latency", "must be non-negative");
        o.rejectUnknown();
        c.latency.overrides.push_back(x);
      }
    }
    if (const auto* j = f.raw("jitter")) {
      Fields jf(*j, "latency.jitter", errors);
      const auto kind = jf.get<std::string>("kind", "none");
      try {
        if (kind == "uniform") {
          c.latency.jitter = JitterSpec::uniform(jf.require<std::int64_t>("lo"), jf.require<std::int64_t>("hi"));
        } else if (kind == "discrete") {
          c.latency.jitter = JitterSpec::discrete(
              jf.require<std::vector<std::pair<std::int64_t, double>>>("values"));
        } else if (kind != "none") {
          jf.fail("kind", "must be none, uniform or discrete");
        }
      } catch (const std::exception& e) {
        jf.fail("", e.what());
      }
      jf.rejectUnknown();
    }
    f.rejectUnknown();
  }

  if (const auto* log = top.raw("logging")) {
    Fields f(*log, "logging", errors);
    c.logging.logDir = f.get<std::string>("log_dir", "");
    c.logging.logMessages = f.get<bool>("log_messages", true);
    f.rejectUnknown();
  }
  top.rejectUnknown();

  // Second pass: things that need the whole document.
  if (!haveExchange) errors.push_back("agents: population needs at least one ExchangeAgent");
  const auto n = c.agentCount();
  for (const auto& o : c.latency.overrides) {
    if (o.from < 0 || o.to < 0 || static_cast<std::size_t>(o.from) >= n || static_cast<std::size_t>(o.to) >= n) {
      errors.push_back("latency.overrides references unknown agent (" + std::to_string(o.from) + " -> " +
                       std::to_string(o.to) + ")");
    }
  }
  auto knownSymbol = [&](const std::string& s) {
    return std::any_of(c.oracle.begin(), c.oracle.end(), [&](const OracleSpec& o) { return o.symbol == s; });
  };
  for (std::size_t i = 0; i < c.agents.size(); ++i) {
    const auto& g = c.agents[i];
    try {
      std::string symbol;
      if (g.type == ExchangeAgent::kType) {
        exchangeParams(g.params, c);
      } else if (g.type == MomentumAgent::kType) {
        symbol = momentumParams(g.params).symbol;
      } else if (g.type == BackgroundAgent::kType) {
        symbol = backgroundParams(g.params).symbol;
      } else if (g.type == ImpactAgent::kType) {
        symbol = impactParams(g.params, c).symbol;
      } else {
        errors.push_back("agents[" + std::to_string(i) + "].type '" + g.type + "' is not a known agent type");
      }
      if (!symbol.empty() && !knownSymbol(symbol)) {
        errors.push_back("agents[" + std::to_string(i) + "] references unknown symbol '" + symbol + "'");
      }
    } catch (const ConfigError& e) {
      for (const auto& v : e.violations()) errors.push_back("agents[" + std::to_string(i) + "]: " + v);
    }
  }
  throwIf(errors);
  c.resolved = std::move(doc);
  return c;
}

ExperimentConfig loadConfig(const std::filesystem::path& file, const CliOverrides& overrides) {
  std::ifstream in(file);
  if (!in) throw ConfigError({"cannot open config file " + file.string()});
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError({file.string() + ": " + e.what()});
  }
  return parseConfig(std::move(doc), overrides);
}

LatencyModel buildLatency(const LatencySpec& spec, std::size_t agentCount) {
  if (spec.defaultLatency.nanos < 0) throw std::invalid_argument("latency must be non-negative");
  LatencyModel model(agentCount, spec.defaultLatency);
  for (const auto& o : spec.overrides) {
    if (o.from < 0 || o.to < 0 || static_cast<std::size_t>(o.from) >= agentCount ||
        static_cast<std::size_t>(o.to) >= agentCount) {
      throw std::invalid_argument("latency override references unknown agent (" + std::to_string(o.from) + " -> " +
                                  std::to_string(o.to) + ")");
    }
    model.setLatency(o.from, o.to, o.latency);
  }
  model.setDefaultJitter(spec.jitter);
  return model;
}

}  // namespace mktsim
