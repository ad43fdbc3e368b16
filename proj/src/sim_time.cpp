#include "mktsim/sim_time.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

namespace mktsim {
namespace {

std::int64_t parseInt(std::string_view s, std::string_view what) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw std::invalid_argument("bad " + std::string(what) + ": '" + std::string(s) + "'");
  }
  return v;
}

std::int64_t checkedMul(std::int64_t a, std::int64_t b) {
  std::int64_t out;
  if (__builtin_mul_overflow(a, b, &out)) throw TimeOverflow("duration overflow");
  return out;
}

}  // namespace

SimTime parseDate(std::string_view iso) {
  if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') {
    throw std::invalid_argument("date must be YYYY-MM-DD: '" + std::string(iso) + "'");
  }
  using namespace std::chrono;
  const auto y = static_cast<int>(parseInt(iso.substr(0, 4), "year"));
  const auto m = static_cast<unsigned>(parseInt(iso.substr(5, 2), "month"));
  const auto d = static_cast<unsigned>(parseInt(iso.substr(8, 2), "day"));
  const year_month_day ymd{year{y}, month{m}, day{d}};
  if (!ymd.ok()) throw std::invalid_argument("invalid date: '" + std::string(iso) + "'");
  const auto days = sys_days{ymd}.time_since_epoch().count();
  return {checkedMul(days, 86'400'000'000'000)};
}

SimTime parseTimeOfDay(SimTime date, std::string_view clock) {
  std::int64_t parts[3] = {0, 0, 0};
  std::int64_t frac = 0;
  std::size_t field = 0;
  std::size_t pos = 0;
  while (pos <= clock.size() && field < 3) {
    auto end = clock.find_first_of(":.", pos);
    if (end == std::string_view::npos) end = clock.size();
    parts[field++] = parseInt(clock.substr(pos, end - pos), "time of day");
    if (end == clock.size()) {
      pos = end + 1;
      break;
    }
    if (clock[end] == '.') {
      auto digits = clock.substr(end + 1);
      if (digits.empty() || digits.size() > 9) throw std::invalid_argument("bad fraction in '" + std::string(clock) + "'");
      frac = parseInt(digits, "fraction");
      for (auto i = digits.size(); i < 9; ++i) frac *= 10;
      pos = clock.size() + 1;
      break;
    }
    pos = end + 1;
  }
  if (field < 2 || pos <= clock.size()) {
    throw std::invalid_argument("time of day must be HH:MM[:SS[.f]]: '" + std::string(clock) + "'");
  }
  if (parts[0] < 0 || parts[0] > 23 || parts[1] < 0 || parts[1] > 59 || parts[2] < 0 || parts[2] > 59) {
    throw std::invalid_argument("time of day out of range: '" + std::string(clock) + "'");
  }
  const std::int64_t ns = ((parts[0] * 60 + parts[1]) * 60 + parts[2]) * 1'000'000'000 + frac;
  return date + Duration{ns};
}

Duration parseDuration(std::string_view text) {
  static constexpr std::pair<std::string_view, std::int64_t> units[] = {
      {"ns", 1}, {"us", 1'000}, {"ms", 1'000'000}, {"min", 60'000'000'000},
      {"s", 1'000'000'000}, {"h", 3'600'000'000'000}, {"m", 60'000'000'000}};
  for (const auto& [suffix, scale] : units) {
    if (text.size() > suffix.size() && text.ends_with(suffix)) {
      const auto body = text.substr(0, text.size() - suffix.size());
      // "1min" must not parse as "1mi" + "n"; the body has to be numeric.
      if (body.find_first_not_of("-0123456789") != std::string_view::npos) continue;
      return {checkedMul(parseInt(body, "duration"), scale)};
    }
  }
  return {parseInt(text, "duration")};
}

std::string formatTime(SimTime t) {
  using namespace std::chrono;
  const std::int64_t perDay = 86'400'000'000'000;
  std::int64_t days = t.nanos / perDay;
  std::int64_t rem = t.nanos % perDay;
  if (rem < 0) {
    rem += perDay;
    --days;
  }
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  const std::int64_t secs = rem / 1'000'000'000;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u %02lld:%02lld:%02lld.%09lld", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<long long>(secs / 3600), static_cast<long long>(secs / 60 % 60),
                static_cast<long long>(secs % 60), static_cast<long long>(rem % 1'000'000'000));
  return buf;
}

}  // namespace mktsim
