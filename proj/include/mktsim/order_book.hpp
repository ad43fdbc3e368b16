#pragma once

#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "mktsim/message.hpp"

namespace mktsim {

/// One fill between a resting order and an incoming order. Always priced at
/// the resting order's limit.
struct Execution {
  std::int64_t executionId = 0;
  OrderId restingOrderId = 0;
  AgentId restingAgent = 0;
  OrderId incomingOrderId = 0;
  AgentId incomingAgent = 0;
  bool incomingIsBuy = true;
  std::int64_t quantity = 0;
  Cents price = 0;
  SimTime time{};

  bool operator==(const Execution&) const = default;
};

struct SubmitResult {
  std::vector<Execution> executions;
  std::optional<Order> accepted;  // remainder added to the book
};

struct DepthView {
  std::vector<PriceVolume> bids;  // best (highest) first
  std::vector<PriceVolume> asks;  // best (lowest) first
  bool operator==(const DepthView&) const = default;
};

struct BookSnapshot {
  SimTime time{};
  Cents lastTrade = 0;
  DepthView levels;
  bool operator==(const BookSnapshot&) const = default;
};

/// Continuous double auction book for one symbol with price-time priority.
class OrderBook {
 public:
  OrderBook(std::string symbol, Cents openPrice);

  const std::string& symbol() const { return symbol_; }

  /// Matches `order` against the opposite side while it crosses, then rests
  /// any remainder. Within a level, resting orders are kept in
  /// (placementTime, id) order.
  SubmitResult submit(Order order, SimTime now);

  /// Removes the remaining quantity of a resting order. nullopt when the id
  /// is not resting (never placed, or already fully executed).
  std::optional<Order> cancel(OrderId id);

  DepthView depth(int n) const;
  BookSnapshot snapshot(SimTime time, int levels) const;

  Cents lastTrade() const { return lastTrade_; }
  std::optional<Cents> bestBid() const;
  std::optional<Cents> bestAsk() const;
  std::optional<Order> find(OrderId id) const;

  /// All resting orders, bids then asks, each in priority order.
  std::vector<Order> restingOrders() const;

 private:
  using Level = std::deque<Order>;
  using BidSide = std::map<Cents, Level, std::greater<>>;
  using AskSide = std::map<Cents, Level, std::less<>>;

  template <class Side>
  void matchAgainst(Side& side, Order& incoming, SimTime now, std::vector<Execution>& out);
  template <class Side>
  void rest(Side& side, const Order& order);
  template <class Side>
  static std::vector<PriceVolume> ladder(const Side& side, int n);

  std::string symbol_;
  BidSide bids_;
  AskSide asks_;
  std::unordered_map<OrderId, std::pair<bool, Cents>> index_;  // id -> (isBuy, price)
  Cents lastTrade_;
  std::int64_t nextExecutionId_ = 1;
};

/// Quantity-weighted mean fill price, rounded half away from zero.
Cents averageFillPrice(const std::vector<Execution>& fills);

}  // namespace mktsim
