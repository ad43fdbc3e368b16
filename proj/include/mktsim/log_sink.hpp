#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "mktsim/sim_time.hpp"

namespace mktsim {

/// One row of an agent's event log.
struct LogRecord {
  SimTime time{};
  std::string type;
  std::string payload;
  bool operator==(const LogRecord&) const = default;
};

class LogIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Destination for archived run files. Names are relative to the run.
class LogSink {
 public:
  virtual ~LogSink() = default;
  virtual void write(const std::string& fileName, const std::string& contents) = 0;
};

class DirectorySink : public LogSink {
 public:
  explicit DirectorySink(std::filesystem::path dir);
  void write(const std::string& fileName, const std::string& contents) override;
  const std::filesystem::path& dir() const { return dir_; }
  const std::vector<std::string>& written() const { return written_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> written_;
};

class MemorySink : public LogSink {
 public:
  void write(const std::string& fileName, const std::string& contents) override { files[fileName] = contents; }
  std::map<std::string, std::string> files;
};

/// Header line of every agent log file.
inline constexpr std::string_view kAgentLogHeader = "timestamp_ns\tevent_type\tpayload";

/// TSV rendering of an agent log; tabs and newlines in payloads become spaces.
std::string formatAgentLog(const std::vector<LogRecord>& records);
std::vector<LogRecord> parseAgentLog(const std::string& contents);

/// "agent_0003_BackgroundAgent_2.tsv"
std::string agentLogFileName(AgentId id, const std::string& name);

}  // namespace mktsim
