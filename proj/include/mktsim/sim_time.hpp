#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mktsim {

using AgentId = std::int32_t;
using Cents = std::int64_t;

class TimeOverflow : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

/// Nanosecond span. Signed so that differences of SimTime are representable.
struct Duration {
  std::int64_t nanos = 0;

  auto operator<=>(const Duration&) const = default;

  static constexpr Duration ns(std::int64_t n) { return {n}; }
  static constexpr Duration us(std::int64_t n) { return {n * 1'000}; }
  static constexpr Duration ms(std::int64_t n) { return {n * 1'000'000}; }
  static constexpr Duration seconds(std::int64_t n) { return {n * 1'000'000'000}; }
  static constexpr Duration minutes(std::int64_t n) { return {n * 60'000'000'000}; }
};

/// Nanoseconds since the Unix epoch. The only time representation in the
/// simulator. Arithmetic is overflow-checked and throws TimeOverflow.
struct SimTime {
  std::int64_t nanos = 0;

  auto operator<=>(const SimTime&) const = default;

  static constexpr SimTime min() { return {INT64_MIN}; }
  static constexpr SimTime max() { return {INT64_MAX}; }
};

inline std::int64_t checkedAdd(std::int64_t a, std::int64_t b) {
  std::int64_t out;
  if (__builtin_add_overflow(a, b, &out)) {
    throw TimeOverflow("simulated time arithmetic overflow");
  }
  return out;
}

inline std::int64_t checkedSub(std::int64_t a, std::int64_t b) {
  std::int64_t out;
  if (__builtin_sub_overflow(a, b, &out)) {
    throw TimeOverflow("simulated time arithmetic overflow");
  }
  return out;
}

inline SimTime operator+(SimTime t, Duration d) { return {checkedAdd(t.nanos, d.nanos)}; }
inline SimTime operator-(SimTime t, Duration d) { return {checkedSub(t.nanos, d.nanos)}; }
inline Duration operator-(SimTime a, SimTime b) { return {checkedSub(a.nanos, b.nanos)}; }
inline Duration operator+(Duration a, Duration b) { return {checkedAdd(a.nanos, b.nanos)}; }
inline SimTime& operator+=(SimTime& t, Duration d) { return t = t + d; }

/// Midnight UTC of an ISO date ("2008-09-30").
SimTime parseDate(std::string_view isoDate);

/// Time of day on `date`: "HH:MM[:SS[.fraction]]".
SimTime parseTimeOfDay(SimTime date, std::string_view clock);

/// "1500", "1500ns", "250us", "10ms", "30s", "1min", "2h". Bare integers are nanoseconds.
Duration parseDuration(std::string_view text);

/// "2008-09-30 09:30:00.000000000"
std::string formatTime(SimTime t);

}  // namespace mktsim
