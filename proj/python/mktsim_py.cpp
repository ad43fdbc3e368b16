#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "mktsim/event_study.hpp"
#include "mktsim/experiment.hpp"
#include "mktsim/order_book.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace mktsim;

namespace {

py::dict executionDict(const Execution& e) {
  return py::dict("execution_id"_a = e.executionId, "resting_order_id"_a = e.restingOrderId,
                  "resting_agent"_a = e.restingAgent, "incoming_order_id"_a = e.incomingOrderId,
                  "incoming_agent"_a = e.incomingAgent, "incoming_is_buy"_a = e.incomingIsBuy,
                  "quantity"_a = e.quantity, "price"_a = e.price, "time_ns"_a = e.time.nanos);
}

py::list ladder(const std::vector<PriceVolume>& levels) {
  py::list out;
  for (const auto& l : levels) out.append(py::make_tuple(l.price, l.volume));
  return out;
}

void bindBook(py::module_& m) {
  py::class_<OrderBook>(m, "OrderBook", "Price-time priority book for one symbol. Prices are integer cents.")
      .def(py::init<std::string, Cents>(), "symbol"_a, "open_price"_a)
      .def_property_readonly("symbol", &OrderBook::symbol)
      .def_property_readonly("last_trade", &OrderBook::lastTrade)
      .def_property_readonly("best_bid", &OrderBook::bestBid)
      .def_property_readonly("best_ask", &OrderBook::bestAsk)
      .def(
          "submit",
          [](OrderBook& book, OrderId id, AgentId agent, bool isBuy, std::int64_t quantity, Cents price,
             std::int64_t timeNs) {
            Order o{.id = id, .agent = agent, .symbol = book.symbol(), .isBuy = isBuy, .quantity = quantity,
                    .limitPrice = price, .placementTime = SimTime{timeNs}};
            const auto r = book.submit(std::move(o), SimTime{timeNs});
            py::list fills;
            for (const auto& e : r.executions) fills.append(executionDict(e));
            return fills;
          },
          "order_id"_a, "agent"_a, "is_buy"_a, "quantity"_a, "price"_a, "time_ns"_a = 0,
          "Matches the order and rests any remainder. Returns the fills as dicts.")
      .def(
          "cancel", [](OrderBook& book, OrderId id) -> std::optional<std::int64_t> {
            if (auto o = book.cancel(id)) return o->quantity;
            return std::nullopt;
          },
          "order_id"_a, "Remaining quantity removed, or None when the id is not resting.")
      .def(
          "depth", [](const OrderBook& book, int n) {
            const auto d = book.depth(n);
            return py::make_tuple(ladder(d.bids), ladder(d.asks));
          },
          "levels"_a = 10, "(bids, asks) as lists of (price, volume), best first.");
}

py::dict summaryDict(const RunSummary& s) {
  py::list agents;
  for (const auto& a : s.agents) {
    agents.append(py::dict("id"_a = a.id, "name"_a = a.name, "type"_a = a.type, "seed"_a = a.seed,
                           "starting_cash"_a = a.startingCash, "cash"_a = a.portfolio.cash,
                           "holdings"_a = a.portfolio.holdings, "mark_to_market"_a = a.markToMarket));
  }
  py::list trades;
  for (const auto& [symbol, e] : s.trades) {
    auto d = executionDict(e);
    d["symbol"] = symbol;
    trades.append(d);
  }
  return py::dict("events_delivered"_a = s.result.eventsDelivered, "deferrals"_a = s.result.deferrals,
                  "final_time_ns"_a = s.result.finalGvt.nanos, "agents"_a = agents, "trades"_a = trades,
                  "manifest_json"_a = s.manifest.dump());
}

CliOverrides overrides(std::optional<std::uint64_t> seed, std::optional<std::string> start,
                       std::optional<std::string> stop, std::optional<std::filesystem::path> logDir,
                       std::vector<std::string> set) {
  return {.seed = seed, .start = std::move(start), .stop = std::move(stop), .logDir = std::move(logDir),
          .set = std::move(set)};
}

void bindExperiment(py::module_& m) {
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def(
      "run",
      [](const std::filesystem::path& config, std::optional<std::uint64_t> seed, std::optional<std::string> start,
         std::optional<std::string> stop, std::optional<std::filesystem::path> logDir, std::vector<std::string> set) {
        const auto cfg = loadConfig(config, overrides(seed, std::move(start), std::move(stop), std::move(logDir),
                                                      std::move(set)));
        RunSummary s;
        {
          py::gil_scoped_release release;
          s = runExperiment(cfg);
        }
        return summaryDict(s);
      },
      "config"_a, "seed"_a = py::none(), "start"_a = py::none(), "stop"_a = py::none(), "log_dir"_a = py::none(),
      "set"_a = std::vector<std::string>{});

  m.def("verify_run", &verifyRun, "run_dir"_a, "Problems found re-hashing a run directory; empty when intact.");

  m.def(
      "event_study",
      [](const std::string& runs, const std::string& pre, const std::string& post) {
        std::vector<ImpactTrial> trials;
        for (const auto& dir : expandRuns(runs)) trials.push_back(loadTrial(dir));
        const auto r = eventStudy(trials, StudyOptions{.pre = parseDuration(pre), .post = parseDuration(post)});
        return py::dict("offset_ns"_a = r.offsets, "mean"_a = r.mean, "stddev"_a = r.stddev, "n"_a = r.n,
                        "included"_a = r.included, "excluded"_a = r.excluded);
      },
      "runs"_a, "pre"_a = "30min", "post"_a = "30min");
}

}  // namespace

PYBIND11_MODULE(_mktsim, m) {
  m.doc() = "Discrete-event market simulator";

  bindBook(m);
  bindExperiment(m);

  m.def("sha256_hex", [](const std::string& s) { return sha256Hex(s); });
  m.def("parse_duration", [](const std::string& s) { return parseDuration(s).nanos; });
  m.def("format_time", [](std::int64_t ns) { return formatTime(SimTime{ns}); });
}
