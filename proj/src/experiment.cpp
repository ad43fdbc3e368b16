#include "mktsim/experiment.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>

namespace mktsim {
namespace {

/// Forwards to a directory (optional) while hashing everything written.
class RecordingSink : public LogSink {
 public:
  RecordingSink(std::optional<std::filesystem::path> dir, bool keep) : keep_(keep) {
    if (dir) disk_ = std::make_unique<DirectorySink>(*dir);
  }
  void write(const std::string& name, const std::string& contents) override {
    if (entries_.contains(name)) throw LogIoError("artifact written twice: " + name);
    entries_[name] = ArtifactEntry{name, sha256Hex(contents), contents.size()};
    if (keep_) files_[name] = contents;
    if (disk_) disk_->write(name, contents);
  }
  std::map<std::string, ArtifactEntry>& entries() { return entries_; }
  std::map<std::string, std::string>& files() { return files_; }

 private:
  bool keep_;
  std::unique_ptr<DirectorySink> disk_;
  std::map<std::string, ArtifactEntry> entries_;
  std::map<std::string, std::string> files_;
};

std::string readFile(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw LogIoError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Population {
  std::vector<std::unique_ptr<Agent>> agents;
  std::vector<std::size_t> groupOf;
};

Population buildPopulation(const ExperimentConfig& c, Oracle& oracle) {
  Population pop;
  for (std::size_t g = 0; g < c.agents.size(); ++g) {
    const auto& group = c.agents[g];
    for (int k = 0; k < group.count; ++k) {
      const auto id = static_cast<AgentId>(pop.agents.size());
      const auto name = group.type + "_" + std::to_string(id);
      std::unique_ptr<Agent> a;
      if (group.type == ExchangeAgent::kType) {
        a = std::make_unique<ExchangeAgent>(id, name, exchangeParams(group.params, c), oracle);
      } else if (group.type == MomentumAgent::kType) {
        a = std::make_unique<MomentumAgent>(id, name, momentumParams(group.params));
      } else if (group.type == BackgroundAgent::kType) {
        a = std::make_unique<BackgroundAgent>(id, name, backgroundParams(group.params), oracle);
      } else if (group.type == ImpactAgent::kType) {
        a = std::make_unique<ImpactAgent>(id, name, impactParams(group.params, c));
      } else {
        throw ConfigError({"unknown agent type " + group.type});
      }
      a->setLogMessages(c.logging.logMessages);
      pop.agents.push_back(std::move(a));
      pop.groupOf.push_back(g);
    }
  }
  return pop;
}

Oracle buildOracle(const ExperimentConfig& c) {
  Oracle oracle;
  const SimTime from = std::min(c.start, c.marketOpen);
  const SimTime to = std::max(c.stop, c.marketClose);
  for (const auto& spec : c.oracle) {
    if (spec.ou) {
      oracle.add(generateOU(spec.symbol, *spec.ou, from, to,
                            RandomPlan::oracleSeedFor(c.seed, symbolHash(spec.symbol))));
    } else {
      oracle.add(ingestCsv(spec.symbol, *spec.csv));
    }
  }
  return oracle;
}

Json tradeJson(const std::string& symbol, const Execution& e) {
  return Json{{"time_ns", e.time.nanos}, {"symbol", symbol}, {"quantity", e.quantity},
              {"price", e.price},        {"resting_order", e.restingOrderId}, {"incoming_order", e.incomingOrderId}};
}

bool sameTrade(const std::pair<std::string, Execution>& a, const std::pair<std::string, Execution>& b) {
  const auto& x = a.second;
  const auto& y = b.second;
  return a.first == b.first && x.time == y.time && x.price == y.price && x.quantity == y.quantity &&
         x.restingOrderId == y.restingOrderId && x.incomingOrderId == y.incomingOrderId &&
         x.incomingIsBuy == y.incomingIsBuy;
}

}  // namespace

std::string sha256Hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

std::uint64_t symbolHash(std::string_view symbol) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : symbol) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

RunSummary runExperiment(const ExperimentConfig& c, const RunOptions& options) {
  RunSummary out;
  std::optional<std::filesystem::path> dir;
  if (!c.logging.logDir.empty()) dir = c.logging.logDir;
  RecordingSink sink(dir, options.keepContents);

  Oracle oracle = buildOracle(c);
  Population pop = buildPopulation(c, oracle);
  const auto n = pop.agents.size();
  const auto groupOf = pop.groupOf;

  std::optional<AgentId> exchangeId;
  for (const auto& a : pop.agents) {
    if (a->type() == ExchangeAgent::kType) {
      exchangeId = a->id();
      break;
    }
  }

  Kernel kernel(std::move(pop.agents), buildLatency(c.latency, n), c.seed, sink);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& g = c.agents[groupOf[i]];
    kernel.setComputationDelay(static_cast<AgentId>(i), g.computationDelay.value_or(c.defaultComputationDelay));
  }
  kernel.setTraceHook([&](const DeliveryTrace& t) {
    if (options.trace) options.trace(t);
    if (t.deferred || !exchangeId || t.target != *exchangeId) return;
    out.firstMessageDelivery.try_emplace(t.sender, t.deliveryTime);
    if (t.kind == MessageKind::LimitOrder) out.firstOrderDelivery.try_emplace(t.sender, t.deliveryTime);
  });

  out.result = kernel.run(c.start, c.stop);

  sink.write("oracle_audit.tsv", oracle.formatAccessLog());
  out.oracleAccess = oracle.accessLog();
  for (const auto& spec : c.oracle) out.fundamentals.emplace(spec.symbol, oracle.series(spec.symbol));

  Json agents = Json::array();
  for (std::size_t i = 0; i < n; ++i) {
    const auto id = static_cast<AgentId>(i);
    const Agent& a = kernel.agent(id);
    AgentOutcome o;
    o.id = id;
    o.name = a.name();
    o.type = a.type();
    o.seed = kernel.randomPlan().agentSeed(id);
    o.group = groupOf[i];
    if (const auto* t = dynamic_cast<const TradingAgent*>(&a)) {
      o.trader = true;
      o.startingCash = t->startingCash();
      o.portfolio = t->portfolio();
      try {
        o.markToMarket = t->markToMarket();
      } catch (const std::exception&) {
      }
    }
    if (const auto* ex = dynamic_cast<const ExchangeAgent*>(&a); ex && out.trades.empty()) {
      out.trades = ex->state().trades;
    }
    const auto log = agentLogFileName(id, a.name());
    agents.push_back(Json{{"id", id},
                          {"name", a.name()},
                          {"type", a.type()},
                          {"group", groupOf[i]},
                          {"seed", o.seed},
                          {"log", sink.entries().contains(log) ? Json(log) : Json(nullptr)}});
    out.agents.push_back(std::move(o));
  }

  Json files = Json::array();
  for (const auto& [name, e] : sink.entries()) {
    files.push_back(Json{{"name", name}, {"sha256", e.sha256}, {"bytes", e.bytes}});
    out.artifacts.push_back(e);
  }
  // The output location is not part of the experiment, so identical runs
  // written to different directories still produce identical manifests.
  Json echoed = c.resolved;
  if (echoed.contains("logging")) echoed["logging"].erase("log_dir");
  out.manifest = Json{{"name", c.name},
                      {"date", c.date},
                      {"config_sha256", sha256Hex(echoed.dump())},
                      {"master_seed", c.seed},
                      {"start_ns", out.result.startTime.nanos},
                      {"stop_ns", out.result.stopTime.nanos},
                      {"final_gvt_ns", out.result.finalGvt.nanos},
                      {"events_delivered", out.result.eventsDelivered},
                      {"deferrals", out.result.deferrals},
                      {"abandoned_events", out.result.abandoned},
                      {"trade_count", out.trades.size()},
                      {"agents", std::move(agents)},
                      {"files", std::move(files)},
                      {"config", std::move(echoed)}};
  const auto manifestText = out.manifest.dump(2) + "\n";
  if (dir) DirectorySink(*dir).write("manifest.json", manifestText);
  if (options.keepContents) {
    out.files = std::move(sink.files());
    out.files["manifest.json"] = manifestText;
  }
  return out;
}

std::vector<std::string> verifyRun(const std::filesystem::path& dir) {
  std::vector<std::string> problems;
  Json manifest;
  try {
    manifest = Json::parse(readFile(dir / "manifest.json"));
  } catch (const std::exception& e) {
    return {std::string("manifest unreadable: ") + e.what()};
  }
  std::set<std::string> listed{"manifest.json"};
  for (const auto& f : manifest.at("files")) {
    const auto name = f.at("name").get<std::string>();
    listed.insert(name);
    const auto path = dir / name;
    if (!std::filesystem::exists(path)) {
      problems.push_back(name + ": missing");
      continue;
    }
    const auto contents = readFile(path);
    if (contents.size() != f.at("bytes").get<std::uint64_t>()) problems.push_back(name + ": size differs");
    if (sha256Hex(contents) != f.at("sha256").get<std::string>()) problems.push_back(name + ": hash differs");
  }
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && !listed.contains(entry.path().filename().string())) {
      problems.push_back(entry.path().filename().string() + ": not listed in manifest");
    }
  }
  return problems;
}

ExperimentConfig applyPatch(const ExperimentConfig& control, const Json& patch, AgentId* changedAgent) {
  if (!patch.is_object() || patch.size() != 1 || !(patch.contains("add") || patch.contains("modify"))) {
    throw ConfigError({"patch must have exactly one of 'add' or 'modify'"});
  }
  Json doc = control.resolved;
  AgentId changed = 0;
  if (patch.contains("add")) {
    Json group = patch.at("add");
    if (!group.is_object()) throw ConfigError({"patch.add must be an agent group"});
    if (group.value("count", 1) != 1) throw ConfigError({"patch.add must add exactly one agent"});
    group["count"] = 1;
    changed = static_cast<AgentId>(control.agentCount());
    doc["agents"].push_back(std::move(group));
  } else {
    const auto& m = patch.at("modify");
    if (!m.is_object() || !m.contains("group")) throw ConfigError({"patch.modify needs a group index"});
    for (const auto& [key, value] : m.items()) {
      if (key != "group" && key != "params") throw ConfigError({"patch.modify." + key + " is not patchable"});
    }
    const auto g = m.at("group").get<std::size_t>();
    if (g >= control.agents.size()) throw ConfigError({"patch.modify.group is out of range"});
    if (control.agents[g].count != 1) throw ConfigError({"patch.modify must target a group of exactly one agent"});
    for (std::size_t i = 0; i < g; ++i) changed += control.agents[i].count;
    if (m.contains("params")) doc["agents"][g]["params"].merge_patch(m.at("params"));
  }
  if (changedAgent) *changedAgent = changed;
  return parseConfig(std::move(doc));
}

ABResult runAB(const ExperimentConfig& controlIn, const Json& patch, const std::filesystem::path& outDir,
               const RunOptions& options) {
  AgentId changed = 0;
  ExperimentConfig treatment = applyPatch(controlIn, patch, &changed);
  ExperimentConfig control = controlIn;
  if (!outDir.empty()) {
    control.logging.logDir = outDir / "control";
    treatment.logging.logDir = outDir / "treatment";
  } else {
    control.logging.logDir.clear();
    treatment.logging.logDir.clear();
  }

  ABResult ab;
  ab.control = runExperiment(control, options);
  ab.treatment = runExperiment(treatment, options);

  Json seedDiffs = Json::array();
  std::size_t shared = 0;
  for (const auto& a : ab.control.agents) {
    if (static_cast<std::size_t>(a.id) >= ab.treatment.agents.size()) continue;
    const auto& b = ab.treatment.agents[a.id];
    if (a.id == changed && patch.contains("modify")) continue;
    ++shared;
    if (a.seed != b.seed || a.name != b.name) {
      seedDiffs.push_back(Json{{"id", a.id}, {"control_seed", a.seed}, {"treatment_seed", b.seed}});
    }
  }

  const auto& tc = ab.control.trades;
  const auto& tt = ab.treatment.trades;
  std::optional<std::size_t> firstDiff;
  for (std::size_t i = 0; i < std::max(tc.size(), tt.size()); ++i) {
    if (i >= tc.size() || i >= tt.size() || !sameTrade(tc[i], tt[i])) {
      firstDiff = i;
      break;
    }
  }
  std::optional<SimTime> divergence;
  Json divergenceJson = nullptr;
  if (firstDiff) {
    const auto i = *firstDiff;
    if (i < tc.size()) divergence = tc[i].second.time;
    if (i < tt.size()) divergence = divergence ? std::min(*divergence, tt[i].second.time) : tt[i].second.time;
    divergenceJson = Json{{"index", i},
                          {"time_ns", divergence->nanos},
                          {"control", i < tc.size() ? tradeJson(tc[i].first, tc[i].second) : Json(nullptr)},
                          {"treatment", i < tt.size() ? tradeJson(tt[i].first, tt[i].second) : Json(nullptr)}};
  }

  auto earliest = [&](const std::map<AgentId, SimTime>& a, const std::map<AgentId, SimTime>& b) -> std::optional<SimTime> {
    std::optional<SimTime> t;
    for (const auto* m : {&a, &b}) {
      if (auto it = m->find(changed); it != m->end()) t = t ? std::min(*t, it->second) : it->second;
    }
    return t;
  };
  // For an added agent only the treatment contributes; for a modified one the
  // change can show in either run.
  const auto orderAt = earliest(patch.contains("modify") ? ab.control.firstOrderDelivery : std::map<AgentId, SimTime>{},
                                ab.treatment.firstOrderDelivery);
  const auto messageAt = earliest(patch.contains("modify") ? ab.control.firstMessageDelivery : std::map<AgentId, SimTime>{},
                                  ab.treatment.firstMessageDelivery);

  const bool ordered = !divergence || (orderAt && *divergence >= *orderAt);
  ab.isolated = seedDiffs.empty() && ordered;
  ab.diff = Json{{"changed_agent", changed},
                 {"shared_agents", shared},
                 {"seed_differences", seedDiffs},
                 {"control_trades", tc.size()},
                 {"treatment_trades", tt.size()},
                 {"first_trade_divergence", divergenceJson},
                 {"changed_agent_first_message_delivery_ns", messageAt ? Json(messageAt->nanos) : Json(nullptr)},
                 {"changed_agent_first_order_delivery_ns", orderAt ? Json(orderAt->nanos) : Json(nullptr)},
                 {"divergence_not_before_order", ordered},
                 {"isolated", ab.isolated}};
  if (!outDir.empty()) {
    std::filesystem::create_directories(outDir);
    std::ofstream(outDir / "diff.json") << ab.diff.dump(2) << "\n";
  }
  return ab;
}

}  // namespace mktsim
