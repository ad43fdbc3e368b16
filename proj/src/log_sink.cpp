#include "mktsim/log_sink.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace mktsim {

DirectorySink::DirectorySink(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw LogIoError("cannot create log directory " + dir_.string() + ": " + ec.message());
}

void DirectorySink::write(const std::string& fileName, const std::string& contents) {
  const auto path = dir_ / fileName;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  out.close();
  if (!out) throw LogIoError("failed writing " + path.string());
  written_.push_back(fileName);
}

std::string formatAgentLog(const std::vector<LogRecord>& records) {
  std::string out(kAgentLogHeader);
  out += '\n';
  for (const auto& r : records) {
    out += std::to_string(r.time.nanos);
    out += '\t';
    out += r.type;
    out += '\t';
    for (char c : r.payload) out += (c == '\t' || c == '\n' || c == '\r') ? ' ' : c;
    out += '\n';
  }
  return out;
}

std::vector<LogRecord> parseAgentLog(const std::string& contents) {
  std::vector<LogRecord> out;
  std::istringstream in(contents);
  std::string line;
  std::size_t lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (lineNo == 1) {
      if (line != kAgentLogHeader) throw std::runtime_error("agent log: missing header");
      continue;
    }
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) throw std::runtime_error("agent log line " + std::to_string(lineNo) + ": expected 3 columns");
    LogRecord r;
    auto [p, ec] = std::from_chars(line.data(), line.data() + t1, r.time.nanos);
    if (ec != std::errc{} || p != line.data() + t1) {
      throw std::runtime_error("agent log line " + std::to_string(lineNo) + ": bad timestamp");
    }
    r.type = line.substr(t1 + 1, t2 - t1 - 1);
    r.payload = line.substr(t2 + 1);
    out.push_back(std::move(r));
  }
  return out;
}

std::string agentLogFileName(AgentId id, const std::string& name) {
  char prefix[32];
  std::snprintf(prefix, sizeof prefix, "agent_%04d_", static_cast<int>(id));
  std::string out(prefix);
  for (unsigned char c : name) {
    const bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '.';
    out += ok ? static_cast<char>(c) : '_';
  }
  return out + ".tsv";
}

}  // namespace mktsim
