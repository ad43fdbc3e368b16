#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mktsim/sim_time.hpp"

namespace mktsim {

using OrderId = std::int64_t;

/// Market orders are limit orders at these extreme prices.
inline constexpr Cents kMarketBuyPrice = 2'147'483'647;  // 2^31 - 1
inline constexpr Cents kMarketSellPrice = 0;

struct Order {
  OrderId id = 0;
  AgentId agent = 0;
  std::string symbol;
  bool isBuy = true;
  std::int64_t quantity = 0;
  Cents limitPrice = 0;
  SimTime placementTime{};

  bool operator==(const Order&) const = default;
};

/// One (price, aggregate volume) rung of a depth ladder.
struct PriceVolume {
  Cents price = 0;
  std::int64_t volume = 0;
  bool operator==(const PriceVolume&) const = default;
};

namespace msg {

// Requests.
struct MarketOpenTime {
  bool operator==(const MarketOpenTime&) const = default;
};
struct MarketCloseTime {
  bool operator==(const MarketCloseTime&) const = default;
};
struct QueryLastTrade {
  std::string symbol;
  bool operator==(const QueryLastTrade&) const = default;
};
struct QuerySpread {
  std::string symbol;
  std::int32_t depth = 1;
  bool operator==(const QuerySpread&) const = default;
};
struct LimitOrder {
  Order order;
  bool operator==(const LimitOrder&) const = default;
};
struct CancelOrder {
  OrderId orderId = 0;
  std::string symbol;
  bool operator==(const CancelOrder&) const = default;
};

// Exchange notifications and responses.
struct OrderAccepted {
  Order order;  // the resting remainder
  bool operator==(const OrderAccepted&) const = default;
};
struct OrderExecuted {
  OrderId orderId = 0;
  std::string symbol;
  bool isBuy = true;
  std::int64_t quantity = 0;  // this fill
  Cents price = 0;
  std::int64_t executionId = 0;
  bool operator==(const OrderExecuted&) const = default;
};
struct OrderCancelled {
  Order order;  // quantity is what was removed from the book
  bool operator==(const OrderCancelled&) const = default;
};
struct QueryLastTradeResponse {
  std::string symbol;
  Cents price = 0;
  bool marketClosed = false;
  bool operator==(const QueryLastTradeResponse&) const = default;
};
struct QuerySpreadResponse {
  std::string symbol;
  std::int32_t depth = 1;
  std::vector<PriceVolume> bids;
  std::vector<PriceVolume> asks;
  Cents lastTrade = 0;
  bool operator==(const QuerySpreadResponse&) const = default;
};
struct MarketOpenTimeResponse {
  SimTime time{};
  bool operator==(const MarketOpenTimeResponse&) const = default;
};
struct MarketCloseTimeResponse {
  SimTime time{};
  bool operator==(const MarketCloseTimeResponse&) const = default;
};
/// Rejection of a request outside market hours or for an unlisted symbol.
/// Echoes enough of the request for the sender to correlate it.
struct MarketClosed {
  std::string request;  // kind name of the rejected request
  std::string symbol;
  OrderId orderId = -1;
  std::string reason;
  bool operator==(const MarketClosed&) const = default;
};
struct WakeupCall {
  bool operator==(const WakeupCall&) const = default;
};

}  // namespace msg

/// Alternative order matches MessageKind.
using MessageBody =
    std::variant<msg::MarketOpenTime, msg::MarketCloseTime, msg::QueryLastTrade, msg::QuerySpread, msg::LimitOrder,
                 msg::CancelOrder, msg::OrderAccepted, msg::OrderExecuted, msg::OrderCancelled,
                 msg::QueryLastTradeResponse, msg::QuerySpreadResponse, msg::MarketOpenTimeResponse,
                 msg::MarketCloseTimeResponse, msg::MarketClosed, msg::WakeupCall>;

enum class MessageKind : std::uint8_t {
  MarketOpenTime,
  MarketCloseTime,
  QueryLastTrade,
  QuerySpread,
  LimitOrder,
  CancelOrder,
  OrderAccepted,
  OrderExecuted,
  OrderCancelled,
  QueryLastTradeResponse,
  QuerySpreadResponse,
  MarketOpenTimeResponse,
  MarketCloseTimeResponse,
  MarketClosed,
  WakeupCall,
};

inline constexpr std::size_t kMessageKindCount = std::variant_size_v<MessageBody>;

std::string_view kindName(MessageKind kind);

struct Message {
  AgentId sender = 0;
  AgentId recipient = 0;
  SimTime sentTime{};
  SimTime deliveryTime{};
  MessageBody body;

  MessageKind kind() const { return static_cast<MessageKind>(body.index()); }
  bool operator==(const Message&) const = default;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::string field, const std::string& detail)
      : std::runtime_error("field '" + field + "': " + detail), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Single-line encoding: `Kind sender=.. recipient=.. sent=.. delivery=..` then
/// kind-specific `key=value` fields in a fixed order. See docs/log_format.md.
std::string encodeRecord(const Message& m);

/// Inverse of encodeRecord. Throws ParseError naming the offending field.
Message decodeRecord(std::string_view line);

/// Body-schema checks. Empty result means valid.
std::vector<std::string> validate(const Message& m);

}  // namespace mktsim
