// Command-line front end: run, ab, study, verify.
#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "mktsim/event_study.hpp"

using namespace mktsim;

namespace {

Json readJson(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return Json::parse(in);
}

void printSummary(const RunSummary& r, const ExperimentConfig& c) {
  std::cout << "agents=" << r.agents.size() << " trades=" << r.trades.size()
            << " events=" << r.result.eventsDelivered << " final_gvt=" << formatTime(r.result.finalGvt);
  if (!c.logging.logDir.empty()) std::cout << " out=" << c.logging.logDir.string();
  std::cout << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete-event market simulator"};
  app.require_subcommand(1);

  std::string configPath;
  CliOverrides ov;
  std::optional<std::uint64_t> seed;
  std::string start, stop, logDir;
  auto* run = app.add_subcommand("run", "Run one experiment");
  run->add_option("-c,--config", configPath, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  // Shared by run and ab; only one subcommand is ever parsed.
  auto addOverrides = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "Master seed override");
    sub->add_option("--start", start, "Simulation start, HH:MM[:SS]");
    sub->add_option("--stop", stop, "Simulation stop, HH:MM[:SS]");
    sub->add_option("--set", ov.set, "Agent parameter override: selector.param=value (repeatable)");
  };
  addOverrides(run);
  run->add_option("--log-dir", logDir, "Artifact directory");

  std::string abConfig, patchPath, abOut;
  auto* ab = app.add_subcommand("ab", "Paired control/treatment runs");
  ab->add_option("-c,--config", abConfig, "Control config")->required()->check(CLI::ExistingFile);
  ab->add_option("--patch", patchPath, "Treatment patch (JSON)")->required()->check(CLI::ExistingFile);
  ab->add_option("--out", abOut, "Output directory (default: config log_dir, else runs/ab)");
  addOverrides(ab);

  std::string runsGlob, pre = "30min", post = "30min", bucket = "30s", outCsv, summaryPath;
  int smoothing = 1;
  auto* study = app.add_subcommand("study", "Impact event study over run directories");
  study->add_option("--runs", runsGlob, "Glob of run directories")->required();
  study->add_option("--pre", pre, "Window before the impact");
  study->add_option("--post", post, "Window after the impact");
  study->add_option("--bucket", bucket, "Bucket width");
  study->add_option("--smooth", smoothing, "Trailing-mean width in buckets")->check(CLI::PositiveNumber);
  study->add_option("--out", outCsv, "Output CSV")->required();
  study->add_option("--summary", summaryPath, "Summary JSON (default: <out>.summary.json)");

  std::string verifyDir;
  auto* verify = app.add_subcommand("verify", "Recompute the hashes listed in a run manifest");
  verify->add_option("dir", verifyDir, "Run directory")->required()->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);

  if (seed) ov.seed = seed;
  if (!start.empty()) ov.start = start;
  if (!stop.empty()) ov.stop = stop;
  if (!logDir.empty()) ov.logDir = logDir;

  try {
    if (run->parsed()) {
      const auto config = loadConfig(configPath, ov);
      if (config.logging.logDir.empty()) std::cerr << "note: no log_dir set; artifacts are not written\n";
      printSummary(runExperiment(config), config);
      return 0;
    }
    if (ab->parsed()) {
      const auto config = loadConfig(abConfig, ov);
      std::filesystem::path out = abOut;
      if (out.empty()) out = config.logging.logDir.empty() ? std::filesystem::path("runs/ab") : config.logging.logDir;
      const auto result = runAB(config, readJson(patchPath), out);
      std::cout << result.diff.dump(2) << "\n";
      return result.isolated ? 0 : 3;
    }
    if (study->parsed()) {
      const auto dirs = expandRuns(runsGlob);
      if (dirs.empty()) {
        std::cerr << "error: no run directories match " << runsGlob << "\n";
        return 2;
      }
      std::vector<ImpactTrial> trials;
      for (const auto& d : dirs) trials.push_back(loadTrial(d));
      StudyOptions opt{.pre = parseDuration(pre),
                       .post = parseDuration(post),
                       .bucket = parseDuration(bucket),
                       .smoothing = smoothing};
      const auto result = eventStudy(trials, opt);
      std::ofstream(outCsv) << formatStudyCsv(result);
      const auto stats = profitStats(trials);
      Json trialsJson = Json::array();
      for (const auto& t : trials) {
        trialsJson.push_back(Json{{"run", t.label},
                                  {"impact_ns", t.impactTime ? Json(t.impactTime->nanos) : Json(nullptr)},
                                  {"greed", t.greed ? Json(*t.greed) : Json(nullptr)},
                                  {"shares", t.sharesTraded},
                                  {"profit_cents", t.profit ? Json(*t.profit) : Json(nullptr)}});
      }
      const Json summary{{"runs", dirs.size()},
                         {"included", result.included.size()},
                         {"excluded", result.excluded},
                         {"profit_trials", stats.trials},
                         {"spearman_profit_vs_greed", stats.profitVsGreedSpearman},
                         {"pearson_profit_per_share_vs_size", stats.profitPerShareVsSizePearson},
                         {"trials", trialsJson}};
      std::ofstream(summaryPath.empty() ? outCsv + ".summary.json" : summaryPath) << summary.dump(2) << "\n";
      std::cout << "trials=" << result.included.size() << " excluded=" << result.excluded.size() << " out=" << outCsv
                << "\n";
      return 0;
    }
    if (verify->parsed()) {
      const auto problems = verifyRun(verifyDir);
      for (const auto& p : problems) std::cout << p << "\n";
      std::cout << (problems.empty() ? "ok" : "FAILED") << "\n";
      return problems.empty() ? 0 : 1;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
