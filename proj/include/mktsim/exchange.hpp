#pragma once

#include <map>
#include <string>
#include <vector>

#include "mktsim/agent.hpp"
#include "mktsim/oracle.hpp"
#include "mktsim/order_book.hpp"

namespace mktsim {

enum class StreamMode { Off, FullStream, Snapshots };

StreamMode parseStreamMode(std::string_view text);
std::string_view streamModeName(StreamMode mode);

struct ExchangeState {
  SimTime marketOpen{};
  SimTime marketClose{};
  std::map<std::string, OrderBook> books;
  StreamMode streamMode = StreamMode::Off;
  Duration snapshotFrequency = Duration::seconds(1);
  int snapshotLevels = 5;

  // Archived activity, per symbol.
  std::map<std::string, std::vector<LogRecord>> orderStream;
  std::map<std::string, std::vector<BookSnapshot>> snapshots;
  // Every execution in arrival order, with its symbol.
  std::vector<std::pair<std::string, Execution>> trades;

  ExchangeState(SimTime open, SimTime close);
  bool isOpen(SimTime now) const { return marketOpen <= now && now <= marketClose; }
  void list(const std::string& symbol, Cents openPrice);
};

struct Outbound {
  AgentId recipient = 0;
  MessageBody body;
};

/// Answers one request delivered at `now`. Order-related requests outside
/// [marketOpen, marketClose] get MarketClosed and leave the books untouched.
std::vector<Outbound> handleMessage(ExchangeState& state, const Message& request, SimTime now);

/// Appends one order-stream row (full-stream mode only).
void archiveActivity(ExchangeState& state, const std::string& symbol, LogRecord row);
/// Records a snapshot of every book (snapshot mode only).
void archiveSnapshot(ExchangeState& state, SimTime now);

/// CSV: timestamp_ns,last_trade, then levels x (bid_price,bid_vol,ask_price,ask_vol).
std::string formatSnapshots(const std::vector<BookSnapshot>& rows, int levels);

/// key=value rendering of one execution as used in trade logs and order streams.
std::string formatExecution(const std::string& symbol, const Execution& e);

struct TradeRow {
  SimTime time{};
  std::string symbol;
  std::int64_t quantity = 0;
  Cents price = 0;
  AgentId buyer = 0;
  AgentId seller = 0;
  OrderId buyOrder = 0;
  OrderId sellOrder = 0;
  bool operator==(const TradeRow&) const = default;
};
/// Parses a TRADE payload written by formatExecution.
TradeRow parseTradeRow(SimTime time, const std::string& payload);

struct ExchangeConfig {
  SimTime marketOpen{};
  SimTime marketClose{};
  std::vector<std::string> symbols;
  StreamMode streamMode = StreamMode::Off;
  Duration snapshotFrequency = Duration::seconds(1);
  int snapshotLevels = 5;
};

/// Exchange participant: one book per listed symbol, priced at the oracle's
/// open until the first trade. Logs every execution as a TRADE record.
class ExchangeAgent : public Agent {
 public:
  ExchangeAgent(AgentId id, std::string name, const ExchangeConfig& config, const Oracle& oracle);

  static constexpr std::string_view kType = "ExchangeAgent";

  void wakeup(SimTime now) override;
  void receiveMessage(SimTime now, const Message& message) override;
  void kernelTerminating() override;

  const ExchangeState& state() const { return state_; }

 private:
  ExchangeState state_;
  bool firstWake_ = true;
  SimTime nextSnapshot_{};
};

}  // namespace mktsim
