#pragma once

#include <deque>
#include <map>
#include <optional>
#include <string>

#include "mktsim/agent.hpp"
#include "mktsim/oracle.hpp"
#include "mktsim/strategy.hpp"

namespace mktsim {

struct Portfolio {
  Cents cash = 0;
  std::map<std::string, std::int64_t> holdings;
  bool operator==(const Portfolio&) const = default;
};

/// Live orders this agent originated, keyed by id, with remaining quantity.
using OpenOrders = std::map<OrderId, Order>;

struct SymbolInfo {
  std::optional<Cents> lastTrade;
  std::optional<Cents> dailyClose;
  std::optional<msg::QuerySpreadResponse> depth;
  SimTime lastUpdate = SimTime::min();
};

/// Books one fill into the portfolio and open orders. Returns false (and
/// changes nothing) when the order id is not an open order.
bool applyExecution(Portfolio& portfolio, OpenOrders& open, const msg::OrderExecuted& fill);

/// cash + sum(holdings * price). Throws naming the first held symbol without a price.
Cents markToMarket(const Portfolio& portfolio, const std::map<std::string, Cents>& prices);

/// Exchange-facing participant with a portfolio, open-order book-keeping,
/// cached symbol information and market-hours bootstrap. Subclasses implement
/// onTradingWakeup and onMessage.
class TradingAgent : public Agent {
 public:
  TradingAgent(AgentId id, std::string name, std::string type, Cents startingCash);

  void kernelStarting(SimTime startTime) override;
  void kernelStopping() override;
  void wakeup(SimTime now) final;
  void receiveMessage(SimTime now, const Message& message) final;

  const Portfolio& portfolio() const { return portfolio_; }
  const OpenOrders& openOrders() const { return openOrders_; }
  Cents startingCash() const { return startingCash_; }
  bool marketClosed() const { return marketClosed_; }
  std::optional<AgentId> exchange() const { return exchange_; }
  const std::map<std::string, SymbolInfo>& symbols() const { return symbols_; }
  std::int64_t holdings(const std::string& symbol) const;
  /// Mark to market with the close if known, else the last known trade.
  Cents markToMarket() const;

 protected:
  /// Called on wakeups during market hours.
  virtual void onTradingWakeup(SimTime now) = 0;
  /// Called after base book-keeping for every delivered message.
  virtual void onMessage(SimTime now, const Message& message) = 0;
  /// Called once both market times are known. Default: wake at the open.
  virtual void onMarketHoursKnown(SimTime now);

  OrderId placeLimitOrder(const std::string& symbol, std::int64_t quantity, bool isBuy, Cents limitPrice);
  void cancelOrder(OrderId id);
  void queryLastTrade(const std::string& symbol);
  void querySpread(const std::string& symbol, int depth);

  std::optional<SimTime> marketOpen() const { return marketOpen_; }
  std::optional<SimTime> marketClose() const { return marketClose_; }

 private:
  void bootstrap(SimTime now);
  void afterClose();

  Cents startingCash_;
  Portfolio portfolio_;
  OpenOrders openOrders_;
  std::map<std::string, SymbolInfo> symbols_;
  std::optional<AgentId> exchange_;
  std::optional<SimTime> marketOpen_;
  std::optional<SimTime> marketClose_;
  bool firstWake_ = true;
  bool dormant_ = false;
  bool marketClosed_ = false;
  bool closeQueried_ = false;
  std::uint32_t nextOrderSeq_ = 0;
};

struct MomentumParams {
  std::string symbol = "IBM";
  Cents startingCash = 10'000'000;
  std::size_t lookback = 20;
  Duration wakeInterval = Duration::minutes(1);
  std::int64_t positionSize = 100;
};

/// Wakes every interval, asks for the last trade, and takes a market position
/// in the direction of a linear projection over the most recent `lookback` prices.
class MomentumAgent : public TradingAgent {
 public:
  MomentumAgent(AgentId id, std::string name, MomentumParams params);
  static constexpr std::string_view kType = "MomentumAgent";
  const std::deque<Cents>& window() const { return window_; }

 protected:
  void onTradingWakeup(SimTime now) override;
  void onMessage(SimTime now, const Message& message) override;

 private:
  enum class State { AwaitingWakeup, AwaitingLastTrade };
  MomentumParams params_;
  State state_ = State::AwaitingWakeup;
  std::deque<Cents> window_;
};

struct BackgroundParams {
  std::string symbol = "IBM";
  Cents startingCash = 10'000'000;
  Duration wakeFrequency = Duration::seconds(60);
  double wakeJitter = 0.1;  // next wake at F * (1 + u), u ~ U[-j, j]
  std::int64_t targetHoldings = 100;
  double observationVariance = 10'000;  // cents^2
};

/// Noisy-fundamental trader. Each wake: cancel open orders, get the last
/// trade, fold a fresh oracle observation into its value belief, and trade
/// toward +/-target holdings at the believed value.
class BackgroundAgent : public TradingAgent {
 public:
  BackgroundAgent(AgentId id, std::string name, BackgroundParams params, Oracle& oracle);
  static constexpr std::string_view kType = "BackgroundAgent";
  const std::optional<ValueBelief>& belief() const { return belief_; }

 protected:
  void onTradingWakeup(SimTime now) override;
  void onMessage(SimTime now, const Message& message) override;
  void onMarketHoursKnown(SimTime now) override;

 private:
  enum class State { AwaitingWakeup, AwaitingCancels, AwaitingLastTrade };
  void requestLastTrade();
  void scheduleNext(SimTime now);

  BackgroundParams params_;
  Oracle& oracle_;
  State state_ = State::AwaitingWakeup;
  std::optional<ValueBelief> belief_;
};

struct ImpactParams {
  std::string symbol = "IBM";
  Cents startingCash = 10'000'000;
  SimTime triggerTime{};
  double greed = 0.1;
  bool isBuy = true;
  std::size_t window = 10;  // price levels counted as "near the spread"
};

/// Places one market order at the trigger time sized to a fraction of the
/// visible opposite-side liquidity, then never acts again.
class ImpactAgent : public TradingAgent {
 public:
  ImpactAgent(AgentId id, std::string name, ImpactParams params);
  static constexpr std::string_view kType = "ImpactAgent";
  bool fired() const { return fired_; }

 protected:
  void onTradingWakeup(SimTime now) override;
  void onMessage(SimTime now, const Message& message) override;
  void onMarketHoursKnown(SimTime now) override;

 private:
  ImpactParams params_;
  bool querying_ = false;
  bool fired_ = false;
};

}  // namespace mktsim
