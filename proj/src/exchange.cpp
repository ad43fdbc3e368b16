#include "mktsim/exchange.hpp"

#include <charconv>
#include <sstream>
#include <stdexcept>

namespace mktsim {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

msg::MarketClosed reject(const Message& request, std::string symbol, OrderId orderId, std::string reason) {
  return {std::string(kindName(request.kind())), std::move(symbol), orderId, std::move(reason)};
}

}  // namespace

StreamMode parseStreamMode(std::string_view text) {
  if (text == "off") return StreamMode::Off;
  if (text == "full-stream") return StreamMode::FullStream;
  if (text == "snapshots") return StreamMode::Snapshots;
  throw std::invalid_argument("stream mode must be off, full-stream or snapshots: '" + std::string(text) + "'");
}

std::string_view streamModeName(StreamMode mode) {
  switch (mode) {
    case StreamMode::Off: return "off";
    case StreamMode::FullStream: return "full-stream";
    case StreamMode::Snapshots: return "snapshots";
  }
  return "off";
}

ExchangeState::ExchangeState(SimTime open, SimTime close) : marketOpen(open), marketClose(close) {
  if (!(open < close)) throw std::invalid_argument("market open must precede market close");
}

void ExchangeState::list(const std::string& symbol, Cents openPrice) {
  books.try_emplace(symbol, symbol, openPrice);
}

std::string formatExecution(const std::string& symbol, const Execution& e) {
  const bool buyIncoming = e.incomingIsBuy;
  std::ostringstream out;
  out << "symbol=" << symbol << " qty=" << e.quantity << " price=" << e.price
      << " buyer=" << (buyIncoming ? e.incomingAgent : e.restingAgent)
      << " seller=" << (buyIncoming ? e.restingAgent : e.incomingAgent)
      << " buy_order=" << (buyIncoming ? e.incomingOrderId : e.restingOrderId)
      << " sell_order=" << (buyIncoming ? e.restingOrderId : e.incomingOrderId) << " exec_id=" << e.executionId
      << " aggressor=" << (buyIncoming ? "BUY" : "SELL");
  return out.str();
}

TradeRow parseTradeRow(SimTime time, const std::string& payload) {
  TradeRow row;
  row.time = time;
  std::istringstream in(payload);
  std::string tok;
  int seen = 0;
  while (in >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw std::runtime_error("trade row: bad token '" + tok + "'");
    const auto key = tok.substr(0, eq);
    const auto value = std::string_view(tok).substr(eq + 1);
    auto num = [&]() {
      std::int64_t v = 0;
      auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
      if (ec != std::errc{} || p != value.data() + value.size()) throw std::runtime_error("trade row: bad " + key);
      return v;
    };
    if (key == "symbol") row.symbol = value, ++seen;
    else if (key == "qty") row.quantity = num(), ++seen;
    else if (key == "price") row.price = num(), ++seen;
    else if (key == "buyer") row.buyer = static_cast<AgentId>(num()), ++seen;
    else if (key == "seller") row.seller = static_cast<AgentId>(num()), ++seen;
    else if (key == "buy_order") row.buyOrder = num(), ++seen;
    else if (key == "sell_order") row.sellOrder = num(), ++seen;
  }
  if (seen != 7) throw std::runtime_error("trade row: missing fields in '" + payload + "'");
  return row;
}

void archiveActivity(ExchangeState& state, const std::string& symbol, LogRecord row) {
  if (state.streamMode != StreamMode::FullStream) return;
  state.orderStream[symbol].push_back(std::move(row));
}

void archiveSnapshot(ExchangeState& state, SimTime now) {
  if (state.streamMode != StreamMode::Snapshots) return;
  for (const auto& [symbol, book] : state.books) {
    state.snapshots[symbol].push_back(book.snapshot(now, state.snapshotLevels));
  }
}

std::string formatSnapshots(const std::vector<BookSnapshot>& rows, int levels) {
  std::string out = "timestamp_ns,last_trade";
  for (int k = 1; k <= levels; ++k) {
    const auto n = std::to_string(k);
    out += ",bid_price_" + n + ",bid_vol_" + n + ",ask_price_" + n + ",ask_vol_" + n;
  }
  out += '\n';
  for (const auto& s : rows) {
    out += std::to_string(s.time.nanos) + ',' + std::to_string(s.lastTrade);
    for (int k = 0; k < levels; ++k) {
      const auto i = static_cast<std::size_t>(k);
      for (const auto* side : {&s.levels.bids, &s.levels.asks}) {
        if (i < side->size()) {
          out += ',' + std::to_string((*side)[i].price) + ',' + std::to_string((*side)[i].volume);
        } else {
          out += ",,";
        }
      }
    }
    out += '\n';
  }
  return out;
}

std::vector<Outbound> handleMessage(ExchangeState& state, const Message& request, SimTime now) {
  std::vector<Outbound> out;
  const AgentId from = request.sender;
  auto send = [&](AgentId to, MessageBody body) { out.push_back({to, std::move(body)}); };
  auto findBook = [&](const std::string& symbol) -> OrderBook* {
    auto it = state.books.find(symbol);
    return it == state.books.end() ? nullptr : &it->second;
  };
  if (const auto problems = validate(request); !problems.empty()) {
    send(from, reject(request, "", -1, "invalid request: " + problems.front()));
    return out;
  }

  std::visit(
      Overloaded{
          [&](const msg::MarketOpenTime&) { send(from, msg::MarketOpenTimeResponse{state.marketOpen}); },
          [&](const msg::MarketCloseTime&) { send(from, msg::MarketCloseTimeResponse{state.marketClose}); },
          [&](const msg::QueryLastTrade& q) {
            auto* book = findBook(q.symbol);
            if (!book) return send(from, reject(request, q.symbol, -1, "unknown symbol"));
            send(from, msg::QueryLastTradeResponse{q.symbol, book->lastTrade(), now > state.marketClose});
          },
          [&](const msg::QuerySpread& q) {
            auto* book = findBook(q.symbol);
            if (!book) return send(from, reject(request, q.symbol, -1, "unknown symbol"));
            if (!state.isOpen(now)) return send(from, reject(request, q.symbol, -1, "market closed"));
            auto depth = book->depth(q.depth);
            send(from, msg::QuerySpreadResponse{q.symbol, q.depth, std::move(depth.bids), std::move(depth.asks),
                                                book->lastTrade()});
          },
          [&](const msg::LimitOrder& lo) {
            const auto& o = lo.order;
            auto* book = findBook(o.symbol);
            if (!book) return send(from, reject(request, o.symbol, o.id, "unknown symbol"));
            if (!state.isOpen(now)) return send(from, reject(request, o.symbol, o.id, "market closed"));
            if (o.agent != from) return send(from, reject(request, o.symbol, o.id, "order owner does not match sender"));
            if (book->find(o.id)) return send(from, reject(request, o.symbol, o.id, "duplicate order id"));

            Order placed = o;
            placed.placementTime = now;
            auto result = book->submit(placed, now);
            for (const auto& e : result.executions) {
              const bool restingBuys = !e.incomingIsBuy;
              send(e.incomingAgent, msg::OrderExecuted{e.incomingOrderId, o.symbol, e.incomingIsBuy, e.quantity,
                                                       e.price, e.executionId});
              send(e.restingAgent,
                   msg::OrderExecuted{e.restingOrderId, o.symbol, restingBuys, e.quantity, e.price, e.executionId});
              state.trades.emplace_back(o.symbol, e);
              archiveActivity(state, o.symbol, {now, "ORDER_EXECUTED", formatExecution(o.symbol, e)});
            }
            if (result.accepted) {
              send(from, msg::OrderAccepted{*result.accepted});
              archiveActivity(state, o.symbol,
                              {now, "ORDER_ACCEPTED",
                               encodeRecord({from, from, now, now, msg::OrderAccepted{*result.accepted}})});
            }
          },
          [&](const msg::CancelOrder& c) {
            auto* book = findBook(c.symbol);
            if (!book) return send(from, reject(request, c.symbol, c.orderId, "unknown symbol"));
            if (!state.isOpen(now)) return send(from, reject(request, c.symbol, c.orderId, "market closed"));
            if (auto resting = book->find(c.orderId); resting && resting->agent != from) {
              return send(from, reject(request, c.symbol, c.orderId, "order owned by another agent"));
            }
            auto cancelled = book->cancel(c.orderId);
            if (!cancelled) {
              // Already filled or never rested: confirm with nothing removed.
              Order gone{.id = c.orderId, .agent = from, .symbol = c.symbol, .quantity = 0};
              return send(from, msg::OrderCancelled{gone});
            }
            send(from, msg::OrderCancelled{*cancelled});
            archiveActivity(state, c.symbol,
                            {now, "ORDER_CANCELLED",
                             encodeRecord({from, from, now, now, msg::OrderCancelled{*cancelled}})});
          },
          [&](const auto&) { send(from, reject(request, "", -1, "not a request")); },
      },
      request.body);
  return out;
}

ExchangeAgent::ExchangeAgent(AgentId id, std::string name, const ExchangeConfig& config, const Oracle& oracle)
    : Agent(id, std::move(name), std::string(kType)), state_(config.marketOpen, config.marketClose) {
  if (config.symbols.empty()) throw std::invalid_argument("exchange lists no symbols");
  if (config.snapshotFrequency.nanos <= 0) throw std::invalid_argument("snapshot frequency must be positive");
  if (config.snapshotLevels < 1) throw std::invalid_argument("snapshot levels must be at least 1");
  state_.streamMode = config.streamMode;
  state_.snapshotFrequency = config.snapshotFrequency;
  state_.snapshotLevels = config.snapshotLevels;
  for (const auto& s : config.symbols) state_.list(s, oracle.openPrice(s));
}

void ExchangeAgent::wakeup(SimTime now) {
  Agent::wakeup(now);
  if (state_.streamMode != StreamMode::Snapshots) return;
  if (firstWake_) {
    firstWake_ = false;
    nextSnapshot_ = std::max(now, state_.marketOpen);
    if (nextSnapshot_ <= state_.marketClose) setWakeup(nextSnapshot_);
    return;
  }
  if (now < nextSnapshot_) return;
  if (state_.isOpen(now)) archiveSnapshot(state_, now);
  nextSnapshot_ = nextSnapshot_ + state_.snapshotFrequency;
  if (nextSnapshot_ <= state_.marketClose) setWakeup(std::max(nextSnapshot_, now));
}

void ExchangeAgent::receiveMessage(SimTime now, const Message& message) {
  Agent::receiveMessage(now, message);
  const auto tradesBefore = state_.trades.size();
  auto replies = handleMessage(state_, message, now);
  for (auto i = tradesBefore; i < state_.trades.size(); ++i) {
    const auto& [symbol, e] = state_.trades[i];
    logEvent("TRADE", formatExecution(symbol, e));
  }
  for (auto& r : replies) sendMessage(r.recipient, std::move(r.body));
}

void ExchangeAgent::kernelTerminating() {
  for (const auto& [symbol, rows] : state_.orderStream) {
    kernel().writeArchive(id(), "orderstream_" + symbol + ".tsv", formatAgentLog(rows));
  }
  for (const auto& [symbol, rows] : state_.snapshots) {
    kernel().writeArchive(id(), "snapshots_" + symbol + ".csv", formatSnapshots(rows, state_.snapshotLevels));
  }
  for (const auto& [symbol, book] : state_.books) {
    logEvent("CLOSE_PRICE", "symbol=" + symbol + " price=" + std::to_string(book.lastTrade()));
  }
  Agent::kernelTerminating();
}

}  // namespace mktsim
