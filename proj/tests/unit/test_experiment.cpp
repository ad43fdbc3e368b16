#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "mktsim/experiment.hpp"

using namespace mktsim;
namespace fs = std::filesystem;

namespace {

Json population(int backgrounds, const char* stop = "10:05") {
  auto doc = Json::parse(R"({
    "date": "2019-06-28", "start": "09:29", "market_open": "09:30", "market_close": "10:00", "seed": 11,
    "oracle": {"IBM": {"source": "ou", "mean": 10000, "open": 10000, "reversion_rate": 0.001,
                       "volatility": 2, "sample_interval": "1s"}},
    "agents": [
      {"type": "ExchangeAgent", "count": 1, "params": {"symbols": ["IBM"]}},
      {"type": "BackgroundAgent", "count": 1,
       "params": {"symbol": "IBM", "wake_frequency": "120s", "observation_variance": 1000000}}
    ],
    "latency": {"default": "50us", "jitter": {"kind": "uniform", "lo": 0, "hi": 20000}},
    "logging": {"log_messages": false}
  })");
  doc["stop"] = stop;
  doc["agents"][1]["count"] = backgrounds;
  return doc;
}

struct TempDir {
  fs::path path;
  TempDir() {
    static int n = 0;
    path = fs::temp_directory_path() / ("mktsim_exp_" + std::to_string(::getpid()) + "_" + std::to_string(n++));
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::map<std::string, std::string> slurp(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    out[e.path().filename().string()] = ss.str();
  }
  return out;
}

std::size_t countPrefix(const std::map<std::string, std::string>& files, std::string_view prefix) {
  return static_cast<std::size_t>(std::count_if(files.begin(), files.end(), [&](const auto& kv) {
    return kv.first.rfind(prefix, 0) == 0 && kv.first.ends_with(".tsv") && kv.first.find('.') == kv.first.rfind('.');
  }));
}

}  // namespace

TEST_CASE("sha256 of a known vector") {
  CHECK(sha256Hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256Hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("an exchange and 100 background agents leave 101 logs and a manifest") {
  TempDir t;
  auto doc = population(100);
  doc["logging"]["log_dir"] = t.path.string();
  const auto run = runExperiment(parseConfig(doc));
  const auto files = slurp(t.path);
  CHECK(countPrefix(files, "agent_") == 101);
  REQUIRE(files.contains("manifest.json"));
  const auto manifest = Json::parse(files.at("manifest.json"));
  CHECK(manifest.at("master_seed") == 11);
  CHECK(manifest.at("agents").size() == 101);
  CHECK(manifest.at("files").size() == files.size() - 1);
  CHECK(manifest.at("trade_count") == run.trades.size());
  CHECK(verifyRun(t.path).empty());
  CHECK(run.agents.size() == 101);
}

TEST_CASE("reruns with the same seed are byte-identical, other seeds are not") {
  TempDir a, b, c;
  auto doc = population(30);
  doc["logging"]["log_messages"] = true;
  for (auto* d : {&a, &b}) {
    doc["logging"]["log_dir"] = d->path.string();
    runExperiment(parseConfig(doc));
  }
  const auto fa = slurp(a.path);
  CHECK(fa == slurp(b.path));

  doc["logging"]["log_dir"] = c.path.string();
  runExperiment(parseConfig(doc, CliOverrides{.seed = 12}));
  CHECK(fa.at("manifest.json") != slurp(c.path).at("manifest.json"));
}

TEST_CASE("stopping before the open trades nothing") {
  const auto run = runExperiment(parseConfig(population(20, "09:29:30")));
  CHECK(run.trades.empty());
  CHECK(run.result.finalGvt <= parseTimeOfDay(parseDate("2019-06-28"), "09:30") + Duration::minutes(1));
}

TEST_CASE("shares and cash are conserved over a run") {
  const auto run = runExperiment(parseConfig(population(50)));
  REQUIRE_FALSE(run.trades.empty());
  std::int64_t shares = 0;
  Cents cash = 0;
  for (const auto& a : run.agents) {
    if (!a.trader) continue;
    for (const auto& [s, q] : a.portfolio.holdings) shares += q;
    cash += a.portfolio.cash - a.startingCash;
  }
  CHECK(shares == 0);
  CHECK(cash == 0);
}

TEST_CASE("verify catches tampering, missing and unlisted files") {
  TempDir t;
  auto doc = population(5);
  doc["logging"]["log_dir"] = t.path.string();
  runExperiment(parseConfig(doc));
  REQUIRE(verifyRun(t.path).empty());
  const auto victim = t.path / agentLogFileName(1, "BackgroundAgent_1");
  REQUIRE(fs::exists(victim));
  std::ofstream(victim, std::ios::app) << "x";
  std::ofstream(t.path / "stray.txt") << "y";
  const auto problems = verifyRun(t.path);
  CHECK(problems.size() == 3);  // size, hash, unlisted
  fs::remove(victim);
  CHECK(verifyRun(t.path).size() == 2);
}

TEST_CASE("adding an impact agent changes no seed and cannot move trades before its order") {
  TempDir t;
  const auto control = parseConfig(population(40));
  const auto patch = Json::parse(R"({"add": {"type": "ImpactAgent", "count": 1,
      "params": {"symbol": "IBM", "greed": 0.1, "trigger_time": "09:45"}}})");
  const auto ab = runAB(control, patch, t.path);
  CHECK(ab.diff.at("changed_agent") == 41);
  CHECK(ab.diff.at("shared_agents") == 41);
  CHECK(ab.diff.at("seed_differences").empty());
  CHECK(ab.isolated);
  CHECK(ab.treatment.agents.back().type == ImpactAgent::kType);
  CHECK(ab.treatment.agents.back().seed == RandomPlan::agentSeedFor(11, 41));
  for (std::size_t i = 0; i < ab.control.agents.size(); ++i) CHECK(ab.control.agents[i].seed == ab.treatment.agents[i].seed);

  const auto tfiles = slurp(t.path / "treatment");
  const auto impactLog = parseAgentLog(tfiles.at(agentLogFileName(41, "ImpactAgent_41")));
  const auto decisions = std::count_if(impactLog.begin(), impactLog.end(), [](const LogRecord& r) {
    return r.type == "IMPACT_ORDER" || r.type == "IMPACT_ABSTAIN";
  });
  CHECK(decisions == 1);
  for (const auto& [name, contents] : slurp(t.path / "control")) CHECK(contents.find("IMPACT_ORDER") == std::string::npos);
  CHECK(fs::exists(t.path / "diff.json"));
  CHECK(verifyRun(t.path / "control").empty());
  CHECK(verifyRun(t.path / "treatment").empty());
}

TEST_CASE("modifying one agent's parameters keeps every seed") {
  auto doc = population(10);
  doc["agents"].push_back(Json::parse(R"({"type": "MomentumAgent", "count": 1, "params": {"symbol": "IBM"}})"));
  const auto control = parseConfig(doc);
  const auto ab = runAB(control, Json::parse(R"({"modify": {"group": 2, "params": {"lookback": 5}}})"), {});
  CHECK(ab.diff.at("changed_agent") == 11);
  CHECK(ab.diff.at("seed_differences").empty());
  CHECK(ab.isolated);
}

TEST_CASE("patches touching more than one agent are rejected") {
  const auto control = parseConfig(population(10));
  CHECK_THROWS_AS(applyPatch(control, Json::parse(R"({"modify": {"group": 1, "params": {"target_holdings": 5}}})")),
                  ConfigError);
  CHECK_THROWS_AS(applyPatch(control, Json::parse(R"({"add": {"type": "ImpactAgent", "count": 2, "params": {}}})")),
                  ConfigError);
  CHECK_THROWS_AS(applyPatch(control, Json::parse(R"({"add": {}, "modify": {}})")), ConfigError);
  CHECK_THROWS_AS(applyPatch(control, Json::parse(R"({"modify": {"group": 0, "count": 3}})")), ConfigError);
}

TEST_CASE("oracle observations never look ahead and noiseless ones are exact") {
  const auto run = runExperiment(parseConfig(population(20)));
  REQUIRE_FALSE(run.oracleAccess.empty());
  for (const auto& a : run.oracleAccess) {
    REQUIRE(a.sampleTime <= a.requestTime);
    REQUIRE(a.samplePrice == run.fundamentals.at("IBM").at(a.requestTime).price);
  }
}
