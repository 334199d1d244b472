#include "asca/calendar.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

#include "asca/error.hpp"

namespace asca {
namespace {

bool parse_uint(std::string_view text, std::size_t pos, std::size_t len, unsigned& out) {
  if (pos + len > text.size()) return false;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (text[i] < '0' || text[i] > '9') return false;
  }
  auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, out);
  return ec == std::errc() && ptr == text.data() + pos + len;
}

[[noreturn]] void bad_timestamp(std::string_view text) {
  throw Error(ErrorCode::ParseError, "malformed timestamp '" + std::string(text) + "'");
}

std::chrono::year_month_day to_ymd(const Timestamp& ts) {
  return std::chrono::year{ts.year} / std::chrono::month{ts.month} / std::chrono::day{ts.day};
}

}  // namespace

Timestamp parse_timestamp(std::string_view text) {
  while (!text.empty() && (text.back() == ' ' || text.back() == '\r')) text.remove_suffix(1);
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);

  Timestamp ts;
  unsigned year = 0;
  if (text.size() < 10 || text[4] != '-' || text[7] != '-' || !parse_uint(text, 0, 4, year) ||
      !parse_uint(text, 5, 2, ts.month) || !parse_uint(text, 8, 2, ts.day)) {
    bad_timestamp(text);
  }
  ts.year = static_cast<int>(year);
  if (text.size() > 10) {
    if ((text[10] != 'T' && text[10] != ' ') || text.size() < 16 || text[13] != ':' ||
        !parse_uint(text, 11, 2, ts.hour) || !parse_uint(text, 14, 2, ts.minute)) {
      bad_timestamp(text);
    }
    if (text.size() > 16) {
      if (text.size() != 19 || text[16] != ':' || !parse_uint(text, 17, 2, ts.second)) {
        bad_timestamp(text);
      }
    }
  }
  if (!to_ymd(ts).ok() || ts.hour > 23 || ts.minute > 59 || ts.second > 59) bad_timestamp(text);
  return ts;
}

std::string format_timestamp(const Timestamp& ts) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02u:%02u:%02u", ts.year, ts.month, ts.day,
                ts.hour, ts.minute, ts.second);
  return buf;
}

bool is_leap_day(const Timestamp& ts) { return ts.month == 2 && ts.day == 29; }

int day_of_year_noleap(const Timestamp& ts) {
  static constexpr int kCumulative[12] = {0, 31, 59, 90, 120, 151, 181, 212, 243, 273, 304, 334};
  return kCumulative[ts.month - 1] + static_cast<int>(ts.day) - 1;
}

int weekday_index(const Timestamp& ts) {
  const std::chrono::weekday wd{std::chrono::sys_days{to_ymd(ts)}};
  return static_cast<int>(wd.iso_encoding()) - 1;
}

std::int64_t noleap_seconds(const Timestamp& ts) {
  const std::int64_t days =
      (static_cast<std::int64_t>(ts.year) - 1970) * kDaysPerYear + day_of_year_noleap(ts);
  return days * kSecondsPerDay + ts.hour * 3600 + ts.minute * 60 + ts.second;
}

Timestamp from_noleap_seconds(std::int64_t seconds) {
  static constexpr int kMonthDays[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  auto floor_div = [](std::int64_t a, std::int64_t b) { return a / b - ((a % b != 0) && ((a < 0) != (b < 0))); };
  const std::int64_t days = floor_div(seconds, kSecondsPerDay);
  const std::int64_t sod = seconds - days * kSecondsPerDay;
  const std::int64_t years = floor_div(days, kDaysPerYear);
  int doy = static_cast<int>(days - years * kDaysPerYear);
  Timestamp ts;
  ts.year = static_cast<int>(1970 + years);
  unsigned month = 0;
  while (doy >= kMonthDays[month]) doy -= kMonthDays[month++];
  ts.month = month + 1;
  ts.day = static_cast<unsigned>(doy) + 1;
  ts.hour = static_cast<unsigned>(sod / 3600);
  ts.minute = static_cast<unsigned>(sod % 3600 / 60);
  ts.second = static_cast<unsigned>(sod % 60);
  return ts;
}

std::optional<std::int64_t> unit_seconds(std::string_view unit) {
  std::int64_t multiplier = 1;
  std::size_t digits = 0;
  while (digits < unit.size() && unit[digits] >= '0' && unit[digits] <= '9') ++digits;
  if (digits > 0) {
    auto [ptr, ec] = std::from_chars(unit.data(), unit.data() + digits, multiplier);
    if (ec != std::errc() || multiplier <= 0) return std::nullopt;
  }
  std::string_view base = unit.substr(digits);
  if (base.size() > 1 && base.back() == 's') base.remove_suffix(1);
  std::int64_t seconds = 0;
  if (base == "second") seconds = 1;
  else if (base == "minute") seconds = 60;
  else if (base == "hour") seconds = 3600;
  else if (base == "day") seconds = kSecondsPerDay;
  else if (base == "week") seconds = 7 * kSecondsPerDay;
  else if (base == "fortnight") seconds = 14 * kSecondsPerDay;
  else if (base == "year") seconds = kDaysPerYear * kSecondsPerDay;
  else return std::nullopt;
  return multiplier * seconds;
}

}  // namespace asca
