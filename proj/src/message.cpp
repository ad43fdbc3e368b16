#include "mktsim/message.hpp"

#include <array>
#include <charconv>

namespace mktsim {
namespace {

constexpr std::array<std::string_view, kMessageKindCount> kKindNames = {
    "MarketOpenTime",         "MarketCloseTime",         "QueryLastTrade", "QuerySpread",
    "LimitOrder",             "CancelOrder",             "OrderAccepted",  "OrderExecuted",
    "OrderCancelled",         "QueryLastTradeResponse",  "QuerySpreadResponse",
    "MarketOpenTimeResponse", "MarketCloseTimeResponse", "MarketClosed",   "WakeupCall",
};

bool isPlain(unsigned char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '.' || c == '_' ||
         c == '-' || c == '~';
}

std::string escape(std::string_view s) {
  static constexpr char hex[] = "0123456789ABCDEF";
  std::string out;
  out.reserve(s.size());
  for (unsigned char c : s) {
    if (isPlain(c)) {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(hex[c >> 4]);
      out.push_back(hex[c & 0xF]);
    }
  }
  return out;
}

class Writer {
 public:
  explicit Writer(std::string& out) : out_(out) {}
  Writer& field(std::string_view key, std::int64_t v) {
    open(key);
    out_ += std::to_string(v);
    return *this;
  }
  Writer& text(std::string_view key, std::string_view v) {
    open(key);
    out_ += escape(v);
    return *this;
  }
  Writer& flag(std::string_view key, bool v) { return field(key, v ? 1 : 0); }
  Writer& side(bool isBuy) {
    open("side");
    out_ += isBuy ? "BUY" : "SELL";
    return *this;
  }
  Writer& ladder(std::string_view key, const std::vector<PriceVolume>& levels) {
    open(key);
    for (std::size_t i = 0; i < levels.size(); ++i) {
      if (i) out_ += ',';
      out_ += std::to_string(levels[i].price);
      out_ += ':';
      out_ += std::to_string(levels[i].volume);
    }
    return *this;
  }
  Writer& order(const Order& o) {
    return field("order_id", o.id)
        .field("agent", o.agent)
        .text("symbol", o.symbol)
        .side(o.isBuy)
        .field("qty", o.quantity)
        .field("price", o.limitPrice)
        .field("placed", o.placementTime.nanos);
  }

 private:
  void open(std::string_view key) {
    out_ += ' ';
    out_ += key;
    out_ += '=';
  }
  std::string& out_;
};

class Reader {
 public:
  explicit Reader(std::string_view line) : rest_(line) {}

  std::string_view token(std::string_view what) {
    if (rest_.empty()) throw ParseError(std::string(what), "missing (line truncated)");
    const auto sp = rest_.find(' ');
    auto tok = rest_.substr(0, sp);
    rest_ = sp == std::string_view::npos ? std::string_view{} : rest_.substr(sp + 1);
    return tok;
  }

  std::string_view raw(std::string_view key) {
    const auto tok = token(key);
    const auto eq = tok.find('=');
    if (eq == std::string_view::npos || tok.substr(0, eq) != key) {
      throw ParseError(std::string(key), "expected '" + std::string(key) + "=', got '" + std::string(tok) + "'");
    }
    return tok.substr(eq + 1);
  }

  std::int64_t integer(std::string_view key) { return toInt(raw(key), key); }

  std::string text(std::string_view key) {
    const auto v = raw(key);
    std::string out;
    out.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      const auto c = static_cast<unsigned char>(v[i]);
      if (c == '%') {
        if (i + 2 >= v.size()) throw ParseError(std::string(key), "truncated escape");
        const auto hi = hexValue(v[i + 1], key), lo = hexValue(v[i + 2], key);
        out.push_back(static_cast<char>(hi * 16 + lo));
        i += 2;
      } else if (isPlain(c)) {
        out.push_back(static_cast<char>(c));
      } else {
        throw ParseError(std::string(key), "unescaped character");
      }
    }
    return out;
  }

  bool flag(std::string_view key) {
    const auto v = integer(key);
    if (v != 0 && v != 1) throw ParseError(std::string(key), "expected 0 or 1");
    return v == 1;
  }

  bool side() {
    const auto v = raw("side");
    if (v == "BUY") return true;
    if (v == "SELL") return false;
    throw ParseError("side", "expected BUY or SELL, got '" + std::string(v) + "'");
  }

  std::vector<PriceVolume> ladder(std::string_view key) {
    std::vector<PriceVolume> out;
    auto v = raw(key);
    while (!v.empty()) {
      const auto comma = v.find(',');
      const auto item = v.substr(0, comma);
      const auto colon = item.find(':');
      if (colon == std::string_view::npos) throw ParseError(std::string(key), "expected price:volume");
      out.push_back({toInt(item.substr(0, colon), key), toInt(item.substr(colon + 1), key)});
      if (comma == std::string_view::npos) break;
      v = v.substr(comma + 1);
      if (v.empty()) throw ParseError(std::string(key), "trailing comma");
    }
    return out;
  }

  Order order() {
    Order o;
    o.id = integer("order_id");
    o.agent = static_cast<AgentId>(integer("agent"));
    o.symbol = text("symbol");
    o.isBuy = side();
    o.quantity = integer("qty");
    o.limitPrice = integer("price");
    o.placementTime = SimTime{integer("placed")};
    return o;
  }

  void finish() {
    if (!rest_.empty()) throw ParseError("<end>", "unexpected trailing data '" + std::string(rest_) + "'");
  }

 private:
  static std::int64_t toInt(std::string_view s, std::string_view key) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
      throw ParseError(std::string(key), "not an integer: '" + std::string(s) + "'");
    }
    return v;
  }
  static int hexValue(char c, std::string_view key) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw ParseError(std::string(key), "bad escape");
  }

  std::string_view rest_;
};

template <std::size_t I = 0>
MessageBody defaultBody(std::size_t index) {
  if constexpr (I < kMessageKindCount) {
    if (index == I) return MessageBody{std::in_place_index<I>};
    return defaultBody<I + 1>(index);
  } else {
    return msg::WakeupCall{};
  }
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

}  // namespace

std::string_view kindName(MessageKind kind) { return kKindNames.at(static_cast<std::size_t>(kind)); }

std::string encodeRecord(const Message& m) {
  std::string out(kindName(m.kind()));
  Writer w(out);
  w.field("sender", m.sender).field("recipient", m.recipient).field("sent", m.sentTime.nanos).field(
      "delivery", m.deliveryTime.nanos);
  std::visit(Overloaded{
                 [](const msg::MarketOpenTime&) {},
                 [](const msg::MarketCloseTime&) {},
                 [](const msg::WakeupCall&) {},
                 [&](const msg::QueryLastTrade& b) { w.text("symbol", b.symbol); },
                 [&](const msg::QuerySpread& b) { w.text("symbol", b.symbol).field("depth", b.depth); },
                 [&](const msg::LimitOrder& b) { w.order(b.order); },
                 [&](const msg::CancelOrder& b) { w.field("order_id", b.orderId).text("symbol", b.symbol); },
                 [&](const msg::OrderAccepted& b) { w.order(b.order); },
                 [&](const msg::OrderCancelled& b) { w.order(b.order); },
                 [&](const msg::OrderExecuted& b) {
                   w.field("order_id", b.orderId)
                       .text("symbol", b.symbol)
                       .side(b.isBuy)
                       .field("qty", b.quantity)
                       .field("price", b.price)
                       .field("exec_id", b.executionId);
                 },
                 [&](const msg::QueryLastTradeResponse& b) {
                   w.text("symbol", b.symbol).field("price", b.price).flag("closed", b.marketClosed);
                 },
                 [&](const msg::QuerySpreadResponse& b) {
                   w.text("symbol", b.symbol)
                       .field("depth", b.depth)
                       .ladder("bids", b.bids)
                       .ladder("asks", b.asks)
                       .field("last", b.lastTrade);
                 },
                 [&](const msg::MarketOpenTimeResponse& b) { w.field("time", b.time.nanos); },
                 [&](const msg::MarketCloseTimeResponse& b) { w.field("time", b.time.nanos); },
                 [&](const msg::MarketClosed& b) {
                   w.text("request", b.request)
                       .text("symbol", b.symbol)
                       .field("order_id", b.orderId)
                       .text("reason", b.reason);
                 },
             },
             m.body);
  return out;
}

Message decodeRecord(std::string_view line) {
  Reader r(line);
  const auto kindTok = r.token("kind");
  std::size_t index = kMessageKindCount;
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == kindTok) index = i;
  }
  if (index == kMessageKindCount) throw ParseError("kind", "unknown message kind '" + std::string(kindTok) + "'");

  Message m;
  m.sender = static_cast<AgentId>(r.integer("sender"));
  m.recipient = static_cast<AgentId>(r.integer("recipient"));
  m.sentTime = SimTime{r.integer("sent")};
  m.deliveryTime = SimTime{r.integer("delivery")};
  m.body = defaultBody(index);
  std::visit(Overloaded{
                 [](msg::MarketOpenTime&) {},
                 [](msg::MarketCloseTime&) {},
                 [](msg::WakeupCall&) {},
                 [&](msg::QueryLastTrade& b) { b.symbol = r.text("symbol"); },
                 [&](msg::QuerySpread& b) {
                   b.symbol = r.text("symbol");
                   b.depth = static_cast<std::int32_t>(r.integer("depth"));
                 },
                 [&](msg::LimitOrder& b) { b.order = r.order(); },
                 [&](msg::CancelOrder& b) {
                   b.orderId = r.integer("order_id");
                   b.symbol = r.text("symbol");
                 },
                 [&](msg::OrderAccepted& b) { b.order = r.order(); },
                 [&](msg::OrderCancelled& b) { b.order = r.order(); },
                 [&](msg::OrderExecuted& b) {
                   b.orderId = r.integer("order_id");
                   b.symbol = r.text("symbol");
                   b.isBuy = r.side();
                   b.quantity = r.integer("qty");
                   b.price = r.integer("price");
                   b.executionId = r.integer("exec_id");
                 },
                 [&](msg::QueryLastTradeResponse& b) {
                   b.symbol = r.text("symbol");
                   b.price = r.integer("price");
                   b.marketClosed = r.flag("closed");
                 },
                 [&](msg::QuerySpreadResponse& b) {
                   b.symbol = r.text("symbol");
                   b.depth = static_cast<std::int32_t>(r.integer("depth"));
                   b.bids = r.ladder("bids");
                   b.asks = r.ladder("asks");
                   b.lastTrade = r.integer("last");
                 },
                 [&](msg::MarketOpenTimeResponse& b) { b.time = SimTime{r.integer("time")}; },
                 [&](msg::MarketCloseTimeResponse& b) { b.time = SimTime{r.integer("time")}; },
                 [&](msg::MarketClosed& b) {
                   b.request = r.text("request");
                   b.symbol = r.text("symbol");
                   b.orderId = r.integer("order_id");
                   b.reason = r.text("reason");
                 },
             },
             m.body);
  r.finish();
  return m;
}

std::vector<std::string> validate(const Message& m) {
  std::vector<std::string> out;
  if (m.deliveryTime < m.sentTime) out.emplace_back("delivery time precedes sent time");
  auto checkOrder = [&](const Order& o) {
    if (o.quantity <= 0) out.emplace_back("quantity must be positive");
    if (o.limitPrice < 0) out.emplace_back("limit price must be non-negative");
    if (o.symbol.empty()) out.emplace_back("symbol must be non-empty");
  };
  std::visit(Overloaded{
                 [&](const msg::LimitOrder& b) { checkOrder(b.order); },
                 [&](const msg::OrderAccepted& b) { checkOrder(b.order); },
                 [&](const msg::QuerySpread& b) {
                   if (b.depth < 1) out.emplace_back("depth must be at least 1");
                   if (b.symbol.empty()) out.emplace_back("symbol must be non-empty");
                 },
                 [&](const msg::QueryLastTrade& b) {
                   if (b.symbol.empty()) out.emplace_back("symbol must be non-empty");
                 },
                 [&](const msg::OrderExecuted& b) {
                   if (b.quantity <= 0) out.emplace_back("quantity must be positive");
                   if (b.price < 0) out.emplace_back("price must be non-negative");
                 },
                 [&](const msg::OrderCancelled& b) {
                   if (b.order.quantity < 0) out.emplace_back("quantity must be non-negative");
                 },
                 [&](const msg::QuerySpreadResponse& b) {
                   if (b.depth < 1) out.emplace_back("depth must be at least 1");
                 },
                 [](const auto&) {},
             },
             m.body);
  return out;
}

}  // namespace mktsim
