#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace asca {

// Local wall-clock timestamp; no time zone or DST handling.
struct Timestamp {
  int year = 1970;
  unsigned month = 1;
  unsigned day = 1;
  unsigned hour = 0;
  unsigned minute = 0;
  unsigned second = 0;

  friend bool operator==(const Timestamp&, const Timestamp&) = default;
};

// Accepts "YYYY-MM-DD", "YYYY-MM-DDTHH:MM", "YYYY-MM-DDTHH:MM:SS" (a space may
// replace the 'T'). Throws Error(ParseError) on malformed or impossible dates.
Timestamp parse_timestamp(std::string_view text);

std::string format_timestamp(const Timestamp& ts);

bool is_leap_day(const Timestamp& ts);

// Zero-based day of year on a 365-day calendar: Feb 29 is removed, so March 1 is
// always day 59. Must not be called on a leap day.
int day_of_year_noleap(const Timestamp& ts);

// ISO weekday with Monday = 0 ... Sunday = 6, from the real calendar.
int weekday_index(const Timestamp& ts);

inline constexpr std::int64_t kSecondsPerDay = 86400;
inline constexpr std::int64_t kDaysPerYear = 365;

// Seconds since 1970-01-01 on the no-leap timeline (every year 365 days).
std::int64_t noleap_seconds(const Timestamp& ts);
Timestamp from_noleap_seconds(std::int64_t seconds);

// Duration of a unit such as "hour", "3hour", "day", "14day", "week",
// "fortnight" or "year" in no-leap seconds. "span" and unknown units yield
// nullopt.
std::optional<std::int64_t> unit_seconds(std::string_view unit);

}  // namespace asca
