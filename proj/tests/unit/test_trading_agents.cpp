#include "doctest.h"
#include "mktsim/exchange.hpp"
#include "mktsim/kernel.hpp"
#include "mktsim/trading_agent.hpp"

using namespace mktsim;

namespace {

msg::OrderExecuted fill(OrderId id, bool buy, std::int64_t q, Cents p) { return {id, "IBM", buy, q, p, 1}; }

Order open(OrderId id, bool buy, std::int64_t q) {
  return Order{.id = id, .agent = 1, .symbol = "IBM", .isBuy = buy, .quantity = q, .limitPrice = 10'000};
}

const SimTime k0900 = parseTimeOfDay(parseDate("2019-06-28"), "09:00");
const SimTime k0930 = parseTimeOfDay(parseDate("2019-06-28"), "09:30");
const SimTime k1000 = parseTimeOfDay(parseDate("2019-06-28"), "10:00");
const SimTime k1030 = parseTimeOfDay(parseDate("2019-06-28"), "10:30");

std::vector<LogRecord> records(const Agent& a, std::string_view type) {
  std::vector<LogRecord> v;
  for (const auto& r : a.eventLog()) {
    if (r.type == type) v.push_back(r);
  }
  return v;
}

/// Rests a fixed ladder of asks at the open so the book has something to hit.
class Seeder : public TradingAgent {
 public:
  Seeder(AgentId id, std::vector<std::pair<Cents, std::int64_t>> asks)
      : TradingAgent(id, "Seeder", "Seeder", 0), asks_(std::move(asks)) {}

 protected:
  void onTradingWakeup(SimTime) override {
    if (done_) return;
    done_ = true;
    for (auto [p, q] : asks_) placeLimitOrder("IBM", q, false, p);
  }
  void onMessage(SimTime, const Message&) override {}

 private:
  std::vector<std::pair<Cents, std::int64_t>> asks_;
  bool done_ = false;
};

struct World {
  Oracle oracle;
  std::vector<std::unique_ptr<Agent>> agents;
  MemorySink sink;
  std::unique_ptr<Kernel> kernel;  // owns the agents after run

  World() { oracle.add(FundamentalSeries("IBM", {{k0900, 10'000}, {k1000, 10'400}})); }
  void exchange() {
    agents.push_back(std::make_unique<ExchangeAgent>(
        static_cast<AgentId>(agents.size()), "Exchange",
        ExchangeConfig{.marketOpen = k0930, .marketClose = k1030, .symbols = {"IBM"}}, oracle));
  }
  template <class A, class... Args>
  A* add(Args&&... args) {
    auto a = std::make_unique<A>(static_cast<AgentId>(agents.size()), std::forward<Args>(args)...);
    auto* p = a.get();
    agents.push_back(std::move(a));
    return p;
  }
  void run(SimTime start, SimTime stop, std::uint64_t seed = 1) {
    LatencyModel latency(agents.size(), Duration::us(100));
    kernel = std::make_unique<Kernel>(std::move(agents), std::move(latency), seed, sink);
    kernel->run(start, stop);
  }
};

}  // namespace

TEST_CASE("executions update cash, holdings and open orders") {
  Portfolio p{.cash = 1'000'000};
  OpenOrders o{{1, open(1, true, 100)}};
  CHECK(applyExecution(p, o, fill(1, true, 100, 10'000)));
  CHECK(p.cash == 0);
  CHECK(p.holdings["IBM"] == 100);
  CHECK(o.empty());

  Portfolio q;
  OpenOrders oo{{2, open(2, true, 100)}};
  applyExecution(q, oo, fill(2, true, 60, 10'000));
  CHECK(oo.at(2).quantity == 40);
  applyExecution(q, oo, fill(2, true, 40, 10'000));
  CHECK(oo.empty());

  Portfolio s{.cash = 0, .holdings = {{"IBM", -50}}};
  OpenOrders so{{3, open(3, false, 100)}};
  applyExecution(s, so, fill(3, false, 100, 10'000));
  CHECK(s.holdings["IBM"] == -150);
  CHECK(s.cash == 1'000'000);

  const auto before = s;
  CHECK_FALSE(applyExecution(s, so, fill(99, true, 1, 1)));
  CHECK(s == before);
}

TEST_CASE("mark to market") {
  CHECK(markToMarket(Portfolio{.cash = 0, .holdings = {{"IBM", 100}}}, {{"IBM", 10'050}}) == 1'005'000);
  CHECK(markToMarket(Portfolio{.cash = 777}, {}) == 777);
  CHECK(markToMarket(Portfolio{.cash = 2'010'000, .holdings = {{"IBM", -100}}}, {{"IBM", 10'050}}) == 1'005'000);
  try {
    markToMarket(Portfolio{.holdings = {{"MSFT", 1}}}, {{"IBM", 1}});
    FAIL("no error for an unpriced holding");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("MSFT") != std::string::npos);
  }
}

TEST_CASE("bootstrap learns the hours and trades from the open") {
  World w;
  w.exchange();
  auto* m = w.add<MomentumAgent>("Momentum", MomentumParams{.lookback = 2, .wakeInterval = Duration::minutes(1)});
  w.run(k0900, k1030 + Duration::minutes(5));
  const auto hours = records(*m, "MARKET_HOURS");
  REQUIRE(hours.size() == 1);
  CHECK(hours[0].time < k0930);
  REQUIRE(m->window().size() == 2);
  // First order comes after the second query, which is at 09:31 at the earliest.
  const auto orders = records(*m, "ORDER_SUBMITTED");
  REQUIRE_FALSE(orders.empty());
  CHECK(orders[0].time >= k0930 + Duration::minutes(1));
  CHECK(m->marketClosed());
}

TEST_CASE("starting after the open trades on the first activity") {
  World w;
  w.exchange();
  auto* m = w.add<MomentumAgent>("Momentum", MomentumParams{.lookback = 2});
  w.run(k1000, k1030);
  const auto queries = records(*m, "MSG_RECEIVED");
  bool sawLastTrade = false;
  for (const auto& r : queries) sawLastTrade |= r.payload.rfind("QueryLastTradeResponse", 0) == 0 && r.time < k1000 + Duration::seconds(1);
  CHECK(sawLastTrade);
}

TEST_CASE("no exchange means dormant all day") {
  World w;
  auto* b = w.add<BackgroundAgent>("Background", BackgroundParams{}, w.oracle);
  w.add<MomentumAgent>("Momentum", MomentumParams{});
  w.run(k0900, k1030);
  CHECK(records(*b, "FATAL").size() == 1);
  CHECK(records(*b, "ORDER_SUBMITTED").empty());
  CHECK_FALSE(b->exchange());
}

TEST_CASE("background agents observe, mix and trade toward their target") {
  World w;
  w.exchange();
  std::vector<BackgroundAgent*> bg;
  for (int i = 0; i < 10; ++i) {
    bg.push_back(w.add<BackgroundAgent>("Background", BackgroundParams{.wakeFrequency = Duration::minutes(5),
                                                                      .observationVariance = 1e6},
                                        w.oracle));
  }
  w.run(k0900, k1030 + Duration::minutes(5));
  std::int64_t shares = 0;
  Cents cash = 0;
  for (auto* b : bg) {
    const auto beliefs = records(*b, "BELIEF");
    REQUIRE(beliefs.size() >= 10);
    for (std::size_t i = 1; i < beliefs.size(); ++i) {
      const auto gap = beliefs[i].time - beliefs[i - 1].time;
      CHECK(gap.nanos >= Duration::seconds(270).nanos);
      CHECK(gap.nanos <= Duration::seconds(331).nanos);
    }
    CHECK(beliefs.front().time >= k0930);
    CHECK(beliefs.back().time <= k1030);
    CHECK(b->belief()->variance == doctest::Approx(1e6 / static_cast<double>(beliefs.size())));
    CHECK(std::llabs(b->holdings("IBM")) <= 100);
    shares += b->holdings("IBM");
    cash += b->portfolio().cash - b->startingCash();
  }
  CHECK(shares == 0);
  CHECK(cash == 0);
  CHECK(w.oracle.accessLog().size() > 100);
}

TEST_CASE("impact agent takes a fraction of visible asks once") {
  World w;
  w.exchange();
  w.add<Seeder>(std::vector<std::pair<Cents, std::int64_t>>{{10'010, 3'000}, {10'020, 9'320}});
  auto* imp = w.add<ImpactAgent>("Impact", ImpactParams{.triggerTime = k1000, .greed = 0.1});
  w.run(k0900, k1030 + Duration::minutes(1));
  const auto orders = records(*imp, "IMPACT_ORDER");
  REQUIRE(orders.size() == 1);
  CHECK(orders[0].payload.find("qty=1232") != std::string::npos);
  CHECK(orders[0].time >= k1000);
  CHECK(imp->holdings("IBM") == 1'232);
  CHECK(imp->portfolio().cash == imp->startingCash() - 1'232LL * 10'010);
  CHECK(imp->fired());
}

TEST_CASE("impact agent abstains on an empty book or zero greed") {
  for (double greed : {0.5, 0.0}) {
    World w;
    w.exchange();
    if (greed == 0.0) w.add<Seeder>(std::vector<std::pair<Cents, std::int64_t>>{{10'010, 500}});
    auto* imp = w.add<ImpactAgent>("Impact", ImpactParams{.triggerTime = k1000, .greed = greed});
    w.run(k0900, k1030);
    CHECK(records(*imp, "IMPACT_ABSTAIN").size() == 1);
    CHECK(imp->openOrders().empty());
    CHECK(imp->holdings("IBM") == 0);
  }
}
