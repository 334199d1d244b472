#include <random>

#include "asca/calendar.hpp"
#include "asca/error.hpp"
#include "doctest.h"

using namespace asca;

TEST_CASE("timestamps parse in date, minute and second precision") {
  CHECK(parse_timestamp("2019-03-04") == Timestamp{2019, 3, 4, 0, 0, 0});
  CHECK(parse_timestamp("2019-03-04T05:06") == Timestamp{2019, 3, 4, 5, 6, 0});
  CHECK(parse_timestamp("2019-03-04 05:06:07") == Timestamp{2019, 3, 4, 5, 6, 7});
  CHECK(format_timestamp(parse_timestamp("1999-12-31T23:59:58")) == "1999-12-31T23:59:58");
}

TEST_CASE("malformed or impossible timestamps are parse errors") {
  for (const char* bad : {"", "2019-13-01", "2019-02-30", "2019-04-31", "2019-01-01T24:00", "2019/01/01",
                          "2019-01-01T10", "2019-01-01x", "2021-02-29"}) {
    CAPTURE(bad);
    try {
      parse_timestamp(bad);
      FAIL("accepted");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ParseError);
    }
  }
  CHECK(is_leap_day(parse_timestamp("2020-02-29")));
}

TEST_CASE("no-leap day of year puts March 1 at 59 in every year") {
  CHECK(day_of_year_noleap(parse_timestamp("2019-01-01")) == 0);
  CHECK(day_of_year_noleap(parse_timestamp("2019-03-01")) == 59);
  CHECK(day_of_year_noleap(parse_timestamp("2020-03-01")) == 59);
  CHECK(day_of_year_noleap(parse_timestamp("2020-12-31")) == 364);
}

TEST_CASE("weekday follows the real calendar with Monday = 0") {
  CHECK(weekday_index(parse_timestamp("2024-01-01")) == 0);
  CHECK(weekday_index(parse_timestamp("1970-01-01")) == 3);
  CHECK(weekday_index(parse_timestamp("2020-02-29")) == 5);
  CHECK(weekday_index(parse_timestamp("2023-12-31")) == 6);
}

TEST_CASE("unit durations with multipliers") {
  CHECK(unit_seconds("second") == 1);
  CHECK(unit_seconds("hour") == 3600);
  CHECK(unit_seconds("3hour") == 10800);
  CHECK(unit_seconds("hours") == 3600);
  CHECK(unit_seconds("fortnight") == 14 * 86400);
  CHECK(unit_seconds("14day") == 14 * 86400);
  CHECK(unit_seconds("week") == 7 * 86400);
  CHECK(unit_seconds("year") == 365 * 86400);
  CHECK_FALSE(unit_seconds("span"));
  CHECK_FALSE(unit_seconds("0day"));
  CHECK_FALSE(unit_seconds("month"));
}

TEST_CASE("no-leap seconds invert exactly, before and after 1970") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::int64_t> secs(-80LL * 365 * 86400, 80LL * 365 * 86400);
  for (int i = 0; i < 2000; ++i) {
    const auto s = secs(rng);
    const auto ts = from_noleap_seconds(s);
    CHECK_FALSE(is_leap_day(ts));
    CHECK(noleap_seconds(ts) == s);
  }
  CHECK(from_noleap_seconds(0) == Timestamp{1970, 1, 1, 0, 0, 0});
  CHECK(from_noleap_seconds(-1) == Timestamp{1969, 12, 31, 23, 59, 59});
}
