#include "mktsim/order_book.hpp"

#include <algorithm>
#include <stdexcept>

namespace mktsim {
namespace {

bool queuedBefore(const Order& a, const Order& b) {
  return a.placementTime != b.placementTime ? a.placementTime < b.placementTime : a.id < b.id;
}

}  // namespace

OrderBook::OrderBook(std::string symbol, Cents openPrice) : symbol_(std::move(symbol)), lastTrade_(openPrice) {
  if (openPrice <= 0) throw std::invalid_argument("open price for " + symbol_ + " must be positive");
}

template <class Side>
void OrderBook::matchAgainst(Side& side, Order& incoming, SimTime now, std::vector<Execution>& out) {
  while (incoming.quantity > 0 && !side.empty()) {
    auto levelIt = side.begin();
    const Cents levelPrice = levelIt->first;
    const bool crosses = incoming.isBuy ? levelPrice <= incoming.limitPrice : levelPrice >= incoming.limitPrice;
    if (!crosses) break;

    Level& level = levelIt->second;
    while (incoming.quantity > 0 && !level.empty()) {
      Order& resting = level.front();
      const auto qty = std::min(incoming.quantity, resting.quantity);
      out.push_back(Execution{
          .executionId = nextExecutionId_++,
          .restingOrderId = resting.id,
          .restingAgent = resting.agent,
          .incomingOrderId = incoming.id,
          .incomingAgent = incoming.agent,
          .incomingIsBuy = incoming.isBuy,
          .quantity = qty,
          .price = levelPrice,
          .time = now,
      });
      incoming.quantity -= qty;
      resting.quantity -= qty;
      if (resting.quantity == 0) {
        index_.erase(resting.id);
        level.pop_front();
      }
    }
    if (level.empty()) side.erase(levelIt);
  }
}

template <class Side>
void OrderBook::rest(Side& side, const Order& order) {
  Level& level = side[order.limitPrice];
  const auto pos = std::upper_bound(level.begin(), level.end(), order, queuedBefore);
  level.insert(pos, order);
  index_[order.id] = {order.isBuy, order.limitPrice};
}

SubmitResult OrderBook::submit(Order order, SimTime now) {
  if (order.quantity <= 0) throw std::invalid_argument("order quantity must be positive");
  if (order.symbol != symbol_) throw std::invalid_argument("order for " + order.symbol + " sent to " + symbol_ + " book");
  if (index_.contains(order.id)) throw std::invalid_argument("duplicate order id " + std::to_string(order.id));

  SubmitResult result;
  if (order.isBuy) {
    matchAgainst(asks_, order, now, result.executions);
  } else {
    matchAgainst(bids_, order, now, result.executions);
  }
  if (!result.executions.empty()) lastTrade_ = averageFillPrice(result.executions);
  if (order.quantity > 0) {
    if (order.isBuy) {
      rest(bids_, order);
    } else {
      rest(asks_, order);
    }
    result.accepted = order;
  }
  return result;
}

std::optional<Order> OrderBook::cancel(OrderId id) {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  const auto [isBuy, price] = it->second;
  index_.erase(it);

  auto removeFrom = [&](auto& side) -> std::optional<Order> {
    auto levelIt = side.find(price);
    if (levelIt == side.end()) return std::nullopt;
    auto& level = levelIt->second;
    auto pos = std::find_if(level.begin(), level.end(), [&](const Order& o) { return o.id == id; });
    if (pos == level.end()) return std::nullopt;
    Order removed = *pos;
    level.erase(pos);
    if (level.empty()) side.erase(levelIt);
    return removed;
  };
  return isBuy ? removeFrom(bids_) : removeFrom(asks_);
}

template <class Side>
std::vector<PriceVolume> OrderBook::ladder(const Side& side, int n) {
  std::vector<PriceVolume> out;
  for (auto it = side.begin(); it != side.end() && static_cast<int>(out.size()) < n; ++it) {
    std::int64_t volume = 0;
    for (const auto& o : it->second) volume += o.quantity;
    out.push_back({it->first, volume});
  }
  return out;
}

DepthView OrderBook::depth(int n) const {
  if (n < 1) throw std::invalid_argument("depth must be at least 1");
  return {ladder(bids_, n), ladder(asks_, n)};
}

BookSnapshot OrderBook::snapshot(SimTime time, int levels) const {
  return {time, lastTrade_, {ladder(bids_, levels), ladder(asks_, levels)}};
}

std::optional<Cents> OrderBook::bestBid() const {
  if (bids_.empty()) return std::nullopt;
  return bids_.begin()->first;
}

std::optional<Cents> OrderBook::bestAsk() const {
  if (asks_.empty()) return std::nullopt;
  return asks_.begin()->first;
}

std::optional<Order> OrderBook::find(OrderId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  const auto [isBuy, price] = it->second;
  auto search = [&](const auto& side) -> std::optional<Order> {
    auto levelIt = side.find(price);
    if (levelIt == side.end()) return std::nullopt;
    for (const auto& o : levelIt->second) {
      if (o.id == id) return o;
    }
    return std::nullopt;
  };
  return isBuy ? search(bids_) : search(asks_);
}

std::vector<Order> OrderBook::restingOrders() const {
  std::vector<Order> out;
  for (const auto& [price, level] : bids_) out.insert(out.end(), level.begin(), level.end());
  for (const auto& [price, level] : asks_) out.insert(out.end(), level.begin(), level.end());
  return out;
}

Cents averageFillPrice(const std::vector<Execution>& fills) {
  if (fills.empty()) throw std::invalid_argument("no fills to average");
  __int128 notional = 0;
  __int128 shares = 0;
  for (const auto& f : fills) {
    notional += static_cast<__int128>(f.quantity) * f.price;
    shares += f.quantity;
  }
  // Prices are non-negative, so half-away-from-zero is floor(x + 1/2).
  return static_cast<Cents>((2 * notional + shares) / (2 * shares));
}

}  // namespace mktsim
