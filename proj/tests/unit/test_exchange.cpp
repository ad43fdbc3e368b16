#include "doctest.h"
#include "mktsim/exchange.hpp"
#include "mktsim/kernel.hpp"
#include "reference_matcher.hpp"

using namespace mktsim;

namespace {

constexpr SimTime kOpen{1'000'000'000};
constexpr SimTime kClose{3'000'000'000};

ExchangeState fresh() {
  ExchangeState s(kOpen, kClose);
  s.list("IBM", 10'000);
  return s;
}

Message from(AgentId sender, MessageBody body) {
  return Message{.sender = sender, .recipient = 0, .body = std::move(body)};
}

Message limit(AgentId agent, OrderId id, bool buy, std::int64_t qty, Cents price, const char* sym = "IBM") {
  return from(agent, msg::LimitOrder{Order{.id = id, .agent = agent, .symbol = sym, .isBuy = buy, .quantity = qty,
                                           .limitPrice = price}});
}

template <class T>
std::vector<std::pair<AgentId, T>> only(const std::vector<Outbound>& out) {
  std::vector<std::pair<AgentId, T>> v;
  for (const auto& o : out) {
    if (const auto* b = std::get_if<T>(&o.body)) v.emplace_back(o.recipient, *b);
  }
  return v;
}

// Every request kind, each addressed to a listed symbol.
std::vector<Message> everyRequest() {
  return {from(1, msg::MarketOpenTime{}),          from(1, msg::MarketCloseTime{}),
          from(1, msg::QueryLastTrade{"IBM"}),     from(1, msg::QuerySpread{"IBM", 1}),
          limit(1, 77, true, 10, 10'000),          from(1, msg::CancelOrder{5, "IBM"})};
}

}  // namespace

TEST_CASE("last trade before any trade is the oracle open") {
  auto s = fresh();
  const auto out = handleMessage(s, from(3, msg::QueryLastTrade{"IBM"}), kOpen);
  const auto r = only<msg::QueryLastTradeResponse>(out);
  REQUIRE(r.size() == 1);
  CHECK(r[0].first == 3);
  CHECK(r[0].second.price == 10'000);
  CHECK_FALSE(r[0].second.marketClosed);
}

TEST_CASE("hours enforcement across every request kind") {
  for (SimTime t : {kOpen - Duration::ns(1), kClose + Duration::ns(1)}) {
    auto s = fresh();
    handleMessage(s, limit(2, 5, false, 10, 10'010), kOpen);  // something to cancel
    const auto before = s.books.at("IBM").restingOrders();
    for (const auto& req : everyRequest()) {
      CAPTURE(kindName(req.kind()));
      const auto out = handleMessage(s, req, t);
      REQUIRE(out.size() == 1);
      const bool gated = req.kind() == MessageKind::QuerySpread || req.kind() == MessageKind::LimitOrder ||
                         req.kind() == MessageKind::CancelOrder;
      CHECK(std::holds_alternative<msg::MarketClosed>(out[0].body) == gated);
      if (gated) CHECK(std::get<msg::MarketClosed>(out[0].body).request == kindName(req.kind()));
    }
    CHECK(s.books.at("IBM").restingOrders() == before);
    CHECK(s.trades.empty());
  }
}

TEST_CASE("the market is open on both endpoints") {
  for (SimTime t : {kOpen, kClose}) {
    auto s = fresh();
    const auto out = handleMessage(s, limit(1, 1, true, 10, 9'000), t);
    CHECK(only<msg::OrderAccepted>(out).size() == 1);
  }
}

TEST_CASE("after the close, last trade reports the final trade and says so") {
  auto s = fresh();
  handleMessage(s, limit(1, 1, false, 10, 10'050), kOpen);
  handleMessage(s, limit(2, 2, true, 10, 10'100), kOpen + Duration::ns(5));
  const auto r = only<msg::QueryLastTradeResponse>(handleMessage(s, from(4, msg::QueryLastTrade{"IBM"}), kClose + Duration::seconds(60)));
  REQUIRE(r.size() == 1);
  CHECK(r[0].second.price == 10'050);
  CHECK(r[0].second.marketClosed);
  const auto o = only<msg::MarketOpenTimeResponse>(handleMessage(s, from(4, msg::MarketOpenTime{}), kClose + Duration::seconds(60)));
  CHECK(o.at(0).second.time == kOpen);
}

TEST_CASE("a two-part fill notifies both counterparties of every part") {
  auto s = fresh();
  handleMessage(s, limit(1, 11, false, 30, 10'000), kOpen);
  handleMessage(s, limit(2, 12, false, 50, 10'010), kOpen);
  const auto out = handleMessage(s, limit(3, 13, true, 100, 10'010), kOpen + Duration::ns(1));

  ref::Matcher oracle(10'000);
  oracle.submit(Order{.id = 11, .agent = 1, .isBuy = false, .quantity = 30, .limitPrice = 10'000});
  oracle.submit(Order{.id = 12, .agent = 2, .isBuy = false, .quantity = 50, .limitPrice = 10'010});
  const auto fills = oracle.submit(Order{.id = 13, .agent = 3, .isBuy = true, .quantity = 100, .limitPrice = 10'010});
  REQUIRE(fills.size() == 2);

  const auto ex = only<msg::OrderExecuted>(out);
  REQUIRE(ex.size() == 4);
  int toIncoming = 0, to1 = 0, to2 = 0;
  for (const auto& [who, e] : ex) {
    toIncoming += who == 3;
    to1 += who == 1;
    to2 += who == 2;
  }
  CHECK(toIncoming == 2);
  CHECK(to1 == 1);
  CHECK(to2 == 1);
  for (std::size_t i = 0; i < fills.size(); ++i) {
    CHECK(ex[2 * i].second.quantity == fills[i].quantity);
    CHECK(ex[2 * i].second.price == fills[i].price);
    CHECK(ex[2 * i + 1].second.orderId == fills[i].resting);
    CHECK(ex[2 * i].second.executionId == ex[2 * i + 1].second.executionId);
  }
  const auto acc = only<msg::OrderAccepted>(out);
  REQUIRE(acc.size() == 1);
  CHECK(acc[0].second.order.quantity == 20);
  CHECK(s.trades.size() == 2);
}

TEST_CASE("a self-match sends one notice per order") {
  auto s = fresh();
  handleMessage(s, limit(1, 1, false, 10, 10'000), kOpen);
  const auto ex = only<msg::OrderExecuted>(handleMessage(s, limit(1, 2, true, 10, 10'000), kOpen));
  REQUIRE(ex.size() == 2);
  CHECK(ex[0].first == 1);
  CHECK(ex[1].first == 1);
  CHECK(ex[0].second.orderId != ex[1].second.orderId);
}

TEST_CASE("unknown symbols, foreign cancels and bad requests are rejected") {
  auto s = fresh();
  for (const auto& req : {from(1, msg::QueryLastTrade{"MSFT"}), from(1, msg::QuerySpread{"MSFT", 1}),
                          limit(1, 9, true, 1, 1, "MSFT"), from(1, msg::CancelOrder{9, "MSFT"})}) {
    const auto r = only<msg::MarketClosed>(handleMessage(s, req, kOpen));
    REQUIRE(r.size() == 1);
    CHECK(r[0].second.reason == "unknown symbol");
  }
  handleMessage(s, limit(1, 1, false, 10, 10'000), kOpen);
  CHECK(only<msg::MarketClosed>(handleMessage(s, from(2, msg::CancelOrder{1, "IBM"}), kOpen)).size() == 1);
  CHECK(s.books.at("IBM").find(1));
  CHECK(only<msg::MarketClosed>(handleMessage(s, limit(1, 3, true, 0, 10'000), kOpen)).size() == 1);
  CHECK(only<msg::MarketClosed>(handleMessage(s, limit(2, 4, true, 5, 10'000), kOpen + Duration::ns(0)))
            .empty());  // a normal order still trades
}

TEST_CASE("cancel of a filled order is confirmed with zero quantity") {
  auto s = fresh();
  handleMessage(s, limit(1, 1, false, 10, 10'000), kOpen);
  handleMessage(s, limit(2, 2, true, 10, 10'000), kOpen);
  const auto c = only<msg::OrderCancelled>(handleMessage(s, from(1, msg::CancelOrder{1, "IBM"}), kOpen));
  REQUIRE(c.size() == 1);
  CHECK(c[0].second.order.quantity == 0);
}

TEST_CASE("spread query returns the ladder") {
  auto s = fresh();
  handleMessage(s, limit(1, 1, true, 10, 9'990), kOpen);
  handleMessage(s, limit(1, 2, false, 7, 10'010), kOpen);
  handleMessage(s, limit(2, 3, false, 3, 10'010), kOpen);
  const auto r = only<msg::QuerySpreadResponse>(handleMessage(s, from(5, msg::QuerySpread{"IBM", 1}), kOpen));
  REQUIRE(r.size() == 1);
  CHECK(r[0].second.bids == std::vector<PriceVolume>{{9'990, 10}});
  CHECK(r[0].second.asks == std::vector<PriceVolume>{{10'010, 10}});
}

namespace {

/// Sends a fixed list of requests to the exchange at the open.
class Client : public Agent {
 public:
  Client(AgentId id, std::vector<MessageBody> requests) : Agent(id, "Client", "Client"), requests_(std::move(requests)) {}
  void kernelStarting(SimTime) override { setWakeup(kOpen); }
  void wakeup(SimTime now) override {
    Agent::wakeup(now);
    for (auto& r : requests_) sendMessage(0, r);
  }

 private:
  std::vector<MessageBody> requests_;
};

MemorySink runExchange(StreamMode mode, std::vector<MessageBody> requests) {
  Oracle oracle;
  oracle.add(FundamentalSeries("IBM", {{SimTime{0}, 10'000}}));
  ExchangeConfig cfg{.marketOpen = kOpen, .marketClose = kOpen + Duration::seconds(2), .symbols = {"IBM"},
                     .streamMode = mode, .snapshotFrequency = Duration::seconds(1), .snapshotLevels = 2};
  std::vector<std::unique_ptr<Agent>> agents;
  agents.push_back(std::make_unique<ExchangeAgent>(0, "Exchange", cfg, oracle));
  agents.push_back(std::make_unique<Client>(1, std::move(requests)));
  MemorySink sink;
  Kernel k(std::move(agents), LatencyModel(2, Duration::ns(100)), 1, sink);
  k.run(kOpen - Duration::seconds(1), kOpen + Duration::seconds(10));
  return sink;
}

std::size_t rows(const std::string& contents) { return static_cast<std::size_t>(std::count(contents.begin(), contents.end(), '\n')) - 1; }

const std::string* findFile(const MemorySink& s, const std::string& suffix) {
  for (const auto& [name, c] : s.files) {
    if (name.size() >= suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) return &c;
  }
  return nullptr;
}

Order ord(OrderId id, bool buy, std::int64_t q, Cents p) {
  return Order{.id = id, .agent = 1, .symbol = "IBM", .isBuy = buy, .quantity = q, .limitPrice = p};
}

}  // namespace

TEST_CASE("snapshots every second over a two second window give three rows") {
  const auto sink = runExchange(StreamMode::Snapshots, {});
  const auto* csv = findFile(sink, "snapshots_IBM.csv");
  REQUIRE(csv);
  CHECK(rows(*csv) == 3);
  CHECK_FALSE(findFile(sink, "orderstream_IBM.tsv"));
}

TEST_CASE("full stream logs each book event") {
  // Two rests, a cross that fills one and rests the remainder (2 rows), then a cancel.
  const auto sink = runExchange(StreamMode::FullStream,
                                {msg::LimitOrder{ord(1, false, 10, 10'010)}, msg::LimitOrder{ord(2, true, 10, 9'990)},
                                 msg::LimitOrder{ord(3, true, 15, 10'010)}, msg::CancelOrder{2, "IBM"}});
  const auto* tsv = findFile(sink, "orderstream_IBM.tsv");
  REQUIRE(tsv);
  CHECK(rows(*tsv) == 5);
}

TEST_CASE("stream off writes no exchange archive") {
  const auto sink = runExchange(StreamMode::Off, {msg::LimitOrder{ord(1, false, 10, 10'010)}});
  CHECK_FALSE(findFile(sink, "orderstream_IBM.tsv"));
  CHECK_FALSE(findFile(sink, "snapshots_IBM.csv"));
  CHECK(parseStreamMode("full-stream") == StreamMode::FullStream);
  CHECK_THROWS(parseStreamMode("sometimes"));
}

TEST_CASE("trade rows round-trip through the log format") {
  Execution e{.executionId = 4, .restingOrderId = 10, .restingAgent = 2, .incomingOrderId = 11, .incomingAgent = 5,
              .incomingIsBuy = false, .quantity = 30, .price = 10'020, .time = SimTime{9}};
  const auto row = parseTradeRow(SimTime{9}, formatExecution("IBM", e));
  CHECK(row == TradeRow{SimTime{9}, "IBM", 30, 10'020, 2, 5, 10, 11});
  CHECK_THROWS(parseTradeRow(SimTime{0}, "symbol=IBM qty=1"));
}
