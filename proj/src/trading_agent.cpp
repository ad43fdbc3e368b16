#include "mktsim/trading_agent.hpp"

#include <stdexcept>

namespace mktsim {
namespace {

std::string describe(const Portfolio& p) {
  std::string out = "cash=" + std::to_string(p.cash);
  for (const auto& [symbol, qty] : p.holdings) out += " " + symbol + "=" + std::to_string(qty);
  return out;
}

}  // namespace

bool applyExecution(Portfolio& portfolio, OpenOrders& open, const msg::OrderExecuted& fill) {
  auto it = open.find(fill.orderId);
  if (it == open.end()) return false;
  const auto notional = fill.quantity * fill.price;
  if (fill.isBuy) {
    portfolio.cash -= notional;
    portfolio.holdings[fill.symbol] += fill.quantity;
  } else {
    portfolio.cash += notional;
    portfolio.holdings[fill.symbol] -= fill.quantity;
  }
  it->second.quantity -= fill.quantity;
  if (it->second.quantity <= 0) open.erase(it);
  return true;
}

Cents markToMarket(const Portfolio& portfolio, const std::map<std::string, Cents>& prices) {
  Cents value = portfolio.cash;
  for (const auto& [symbol, qty] : portfolio.holdings) {
    if (qty == 0) continue;
    auto it = prices.find(symbol);
    if (it == prices.end()) throw std::runtime_error("no known price for held symbol " + symbol);
    value += qty * it->second;
  }
  return value;
}

TradingAgent::TradingAgent(AgentId id, std::string name, std::string type, Cents startingCash)
    : Agent(id, std::move(name), std::move(type)), startingCash_(startingCash) {
  portfolio_.cash = startingCash;
}

std::int64_t TradingAgent::holdings(const std::string& symbol) const {
  auto it = portfolio_.holdings.find(symbol);
  return it == portfolio_.holdings.end() ? 0 : it->second;
}

Cents TradingAgent::markToMarket() const {
  std::map<std::string, Cents> prices;
  for (const auto& [symbol, info] : symbols_) {
    if (info.dailyClose) {
      prices[symbol] = *info.dailyClose;
    } else if (info.lastTrade) {
      prices[symbol] = *info.lastTrade;
    }
  }
  return mktsim::markToMarket(portfolio_, prices);
}

void TradingAgent::kernelStarting(SimTime startTime) {
  Agent::kernelStarting(startTime);
  logEvent("STARTING_CASH", std::to_string(startingCash_));
}

void TradingAgent::kernelStopping() {
  Agent::kernelStopping();
  logEvent("FINAL_HOLDINGS", describe(portfolio_));
  logEvent("ENDING_CASH", std::to_string(portfolio_.cash));
  try {
    logEvent("MARK_TO_MARKET", std::to_string(markToMarket()));
  } catch (const std::exception& e) {
    logEvent("MARK_TO_MARKET_FAILED", e.what());
  }
}

void TradingAgent::bootstrap(SimTime now) {
  exchange_ = kernel().findAgentByType("ExchangeAgent");
  if (!exchange_) {
    dormant_ = true;
    logEvent("FATAL", "no exchange agent found; going dormant");
    return;
  }
  sendMessage(*exchange_, msg::MarketOpenTime{});
  sendMessage(*exchange_, msg::MarketCloseTime{});
  (void)now;
}

void TradingAgent::afterClose() {
  marketClosed_ = true;
  if (closeQueried_ || !exchange_) return;
  closeQueried_ = true;
  for (const auto& [symbol, info] : symbols_) queryLastTrade(symbol);
}

void TradingAgent::wakeup(SimTime now) {
  Agent::wakeup(now);
  if (dormant_) return;
  if (firstWake_) {
    firstWake_ = false;
    bootstrap(now);
    return;
  }
  if (!marketOpen_ || !marketClose_) return;
  if (now > *marketClose_) {
    afterClose();
    return;
  }
  if (marketClosed_ || now < *marketOpen_) return;
  onTradingWakeup(now);
}

void TradingAgent::onMarketHoursKnown(SimTime now) { setWakeup(std::max(now, *marketOpen_)); }

void TradingAgent::receiveMessage(SimTime now, const Message& m) {
  Agent::receiveMessage(now, m);
  const bool hoursKnownBefore = marketOpen_ && marketClose_;

  if (const auto* r = std::get_if<msg::MarketOpenTimeResponse>(&m.body)) {
    marketOpen_ = r->time;
  } else if (const auto* r = std::get_if<msg::MarketCloseTimeResponse>(&m.body)) {
    marketClose_ = r->time;
  } else if (const auto* r = std::get_if<msg::QueryLastTradeResponse>(&m.body)) {
    auto& info = symbols_[r->symbol];
    if (m.sentTime >= info.lastUpdate) {
      info.lastTrade = r->price;
      info.lastUpdate = m.sentTime;
    }
    if (r->marketClosed) {
      info.dailyClose = r->price;
      marketClosed_ = true;
    }
  } else if (const auto* r = std::get_if<msg::QuerySpreadResponse>(&m.body)) {
    auto& info = symbols_[r->symbol];
    if (m.sentTime >= info.lastUpdate) {
      info.depth = *r;
      info.lastTrade = r->lastTrade;
      info.lastUpdate = m.sentTime;
    }
  } else if (std::holds_alternative<msg::OrderAccepted>(m.body)) {
    logEvent("ORDER_ACCEPTED", encodeRecord(m));
  } else if (const auto* r = std::get_if<msg::OrderExecuted>(&m.body)) {
    if (applyExecution(portfolio_, openOrders_, *r)) {
      logEvent("ORDER_EXECUTED", encodeRecord(m));
      logEvent("HOLDINGS_UPDATED", describe(portfolio_));
      auto& info = symbols_[r->symbol];
      if (m.sentTime >= info.lastUpdate) {
        info.lastTrade = r->price;
        info.lastUpdate = m.sentTime;
      }
    } else {
      logEvent("EXECUTION_ANOMALY", encodeRecord(m));
    }
  } else if (const auto* r = std::get_if<msg::OrderCancelled>(&m.body)) {
    openOrders_.erase(r->order.id);
    logEvent("ORDER_CANCELLED", encodeRecord(m));
  } else if (const auto* r = std::get_if<msg::MarketClosed>(&m.body)) {
    if (r->orderId >= 0) openOrders_.erase(r->orderId);
    logEvent("MARKET_CLOSED", encodeRecord(m));
    if (marketClose_ && now > *marketClose_) marketClosed_ = true;
  }

  if (!hoursKnownBefore && marketOpen_ && marketClose_) {
    logEvent("MARKET_HOURS", "open=" + std::to_string(marketOpen_->nanos) + " close=" + std::to_string(marketClose_->nanos));
    // Wake just after the close to learn the closing price.
    setWakeup(std::max(now, *marketClose_ + Duration::ns(1)));
    onMarketHoursKnown(now);
  }
  onMessage(now, m);
}

OrderId TradingAgent::placeLimitOrder(const std::string& symbol, std::int64_t quantity, bool isBuy, Cents limitPrice) {
  if (!exchange_) throw std::logic_error("no exchange to send orders to");
  if (quantity <= 0) throw std::invalid_argument("order quantity must be positive");
  // Ids are unique per run and independent of other agents' activity.
  const OrderId id = (static_cast<OrderId>(this->id()) << 32) | nextOrderSeq_++;
  Order o{.id = id,
          .agent = this->id(),
          .symbol = symbol,
          .isBuy = isBuy,
          .quantity = quantity,
          .limitPrice = limitPrice,
          .placementTime = currentTime()};
  openOrders_[id] = o;
  symbols_.try_emplace(symbol);
  const Message preview{this->id(), *exchange_, currentTime(), currentTime(), msg::LimitOrder{o}};
  logEvent("ORDER_SUBMITTED", encodeRecord(preview));
  sendMessage(*exchange_, msg::LimitOrder{std::move(o)});
  return id;
}

void TradingAgent::cancelOrder(OrderId id) {
  auto it = openOrders_.find(id);
  if (it == openOrders_.end() || !exchange_) return;
  logEvent("CANCEL_SUBMITTED", "order_id=" + std::to_string(id));
  sendMessage(*exchange_, msg::CancelOrder{id, it->second.symbol});
}

void TradingAgent::queryLastTrade(const std::string& symbol) {
  symbols_.try_emplace(symbol);
  sendMessage(*exchange_, msg::QueryLastTrade{symbol});
}

void TradingAgent::querySpread(const std::string& symbol, int depth) {
  symbols_.try_emplace(symbol);
  sendMessage(*exchange_, msg::QuerySpread{symbol, depth});
}

// ---------------------------------------------------------------------------

MomentumAgent::MomentumAgent(AgentId id, std::string name, MomentumParams params)
    : TradingAgent(id, std::move(name), std::string(kType), params.startingCash), params_(std::move(params)) {
  if (params_.lookback < 2) throw std::invalid_argument("momentum lookback must be at least 2");
  if (params_.wakeInterval.nanos <= 0) throw std::invalid_argument("momentum wake interval must be positive");
}

void MomentumAgent::onTradingWakeup(SimTime) {
  queryLastTrade(params_.symbol);
  state_ = State::AwaitingLastTrade;
}

void MomentumAgent::onMessage(SimTime now, const Message& m) {
  const auto* r = std::get_if<msg::QueryLastTradeResponse>(&m.body);
  if (state_ != State::AwaitingLastTrade || !r || r->symbol != params_.symbol) return;

  const Cents last = r->price;
  window_.push_back(last);
  if (window_.size() > params_.lookback) window_.pop_front();
  if (!r->marketClosed) {
    const std::vector<Cents> prices(window_.begin(), window_.end());
    if (auto intent = momentumStep(prices, params_.lookback, last, holdings(params_.symbol), params_.positionSize)) {
      placeLimitOrder(params_.symbol, intent->quantity, intent->isBuy, intent->limitPrice);
    }
  }
  setWakeup(now + params_.wakeInterval);
  state_ = State::AwaitingWakeup;
}

// ---------------------------------------------------------------------------

BackgroundAgent::BackgroundAgent(AgentId id, std::string name, BackgroundParams params, Oracle& oracle)
    : TradingAgent(id, std::move(name), std::string(kType), params.startingCash),
      params_(std::move(params)),
      oracle_(oracle) {
  if (params_.wakeFrequency.nanos <= 0) throw std::invalid_argument("wake frequency must be positive");
  if (params_.wakeJitter < 0 || params_.wakeJitter >= 1) throw std::invalid_argument("wake jitter must be in [0, 1)");
  if (!(params_.observationVariance > 0)) throw std::invalid_argument("observation variance must be positive");
  if (params_.targetHoldings < 0) throw std::invalid_argument("target holdings must be non-negative");
  if (!oracle_.has(params_.symbol)) throw std::invalid_argument("oracle has no symbol " + params_.symbol);
}

void BackgroundAgent::onMarketHoursKnown(SimTime now) {
  const SimTime base = std::max(now, *marketOpen());
  setWakeup(base + Duration{uniformInt(rng(), 0, params_.wakeFrequency.nanos - 1)});
}

void BackgroundAgent::onTradingWakeup(SimTime) {
  if (state_ != State::AwaitingWakeup) {
    logEvent("WAKE_WHILE_BUSY");
    return;
  }
  if (openOrders().empty()) {
    requestLastTrade();
    return;
  }
  state_ = State::AwaitingCancels;
  std::vector<OrderId> ids;
  for (const auto& [id, o] : openOrders()) ids.push_back(id);
  for (auto id : ids) cancelOrder(id);
}

void BackgroundAgent::requestLastTrade() {
  queryLastTrade(params_.symbol);
  state_ = State::AwaitingLastTrade;
}

void BackgroundAgent::scheduleNext(SimTime now) {
  const double u = uniformReal(rng(), -params_.wakeJitter, params_.wakeJitter);
  const auto delay = static_cast<std::int64_t>(std::llround(static_cast<double>(params_.wakeFrequency.nanos) * (1 + u)));
  setWakeup(now + Duration{std::max<std::int64_t>(delay, 1)});
}

void BackgroundAgent::onMessage(SimTime now, const Message& m) {
  if (std::holds_alternative<msg::MarketClosed>(m.body) && state_ != State::AwaitingWakeup) {
    state_ = State::AwaitingWakeup;
    if (!marketClosed()) scheduleNext(now);
    return;
  }
  if (state_ == State::AwaitingCancels) {
    if (openOrders().empty()) requestLastTrade();
    return;
  }
  const auto* r = std::get_if<msg::QueryLastTradeResponse>(&m.body);
  if (state_ != State::AwaitingLastTrade || !r || r->symbol != params_.symbol) return;
  state_ = State::AwaitingWakeup;
  if (r->marketClosed) return;

  const Cents observed = oracle_.observe(id(), params_.symbol, now, params_.observationVariance, rng());
  belief_ = mixBelief(belief_, static_cast<double>(observed), params_.observationVariance);
  logEvent("BELIEF", "observed=" + std::to_string(observed) + " mean=" + std::to_string(belief_->mean) +
                         " variance=" + std::to_string(belief_->variance));
  if (auto intent = backgroundOrder(belief_->mean, r->price, holdings(params_.symbol), params_.targetHoldings)) {
    placeLimitOrder(params_.symbol, intent->quantity, intent->isBuy, intent->limitPrice);
  }
  scheduleNext(now);
}

// ---------------------------------------------------------------------------

ImpactAgent::ImpactAgent(AgentId id, std::string name, ImpactParams params)
    : TradingAgent(id, std::move(name), std::string(kType), params.startingCash), params_(std::move(params)) {
  if (params_.greed < 0) throw std::invalid_argument("greed must be non-negative");
  if (params_.window < 1) throw std::invalid_argument("impact window must be at least one level");
}

void ImpactAgent::onMarketHoursKnown(SimTime now) { setWakeup(std::max(now, params_.triggerTime)); }

void ImpactAgent::onTradingWakeup(SimTime now) {
  if (fired_ || querying_ || now < params_.triggerTime) return;
  querying_ = true;
  querySpread(params_.symbol, static_cast<int>(params_.window));
}

void ImpactAgent::onMessage(SimTime, const Message& m) {
  const auto* r = std::get_if<msg::QuerySpreadResponse>(&m.body);
  if (!querying_ || fired_ || !r || r->symbol != params_.symbol) {
    if (querying_ && std::holds_alternative<msg::MarketClosed>(m.body)) {
      querying_ = false;
      fired_ = true;
      logEvent("IMPACT_ABSTAIN", "market closed");
    }
    return;
  }
  querying_ = false;
  fired_ = true;
  const auto& opposite = params_.isBuy ? r->asks : r->bids;
  const auto qty = impactQuantity(opposite, params_.greed, params_.window);
  if (qty <= 0) {
    logEvent("IMPACT_ABSTAIN", opposite.empty() ? "empty opposite side" : "zero quantity");
    return;
  }
  const Cents price = params_.isBuy ? kMarketBuyPrice : kMarketSellPrice;
  const auto id = placeLimitOrder(params_.symbol, qty, params_.isBuy, price);
  logEvent("IMPACT_ORDER", "order_id=" + std::to_string(id) + " side=" + (params_.isBuy ? "BUY" : "SELL") +
                               " qty=" + std::to_string(qty) + " greed=" + std::to_string(params_.greed));
}

}  // namespace mktsim
