#include "wardboost/time.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace wardboost {

namespace {

// Days since 1970-01-01 for a proleptic Gregorian date (Howard Hinnant's
// civil-days algorithm).
std::int64_t days_from_civil(std::int64_t y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                       static_cast<unsigned>(d) - 1u;
  const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, int& m, int& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yr = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  y = yr + (m <= 2);
}

[[noreturn]] void bad_timestamp(std::string_view text) {
  throw std::invalid_argument("invalid ISO-8601 timestamp: '" + std::string(text) + "'");
}

bool read_digits(std::string_view s, std::size_t pos, int count, int& out) {
  if (pos + count > s.size()) return false;
  int v = 0;
  for (int i = 0; i < count; ++i) {
    const char c = s[pos + i];
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
  }
  out = v;
  return true;
}

}  // namespace

Timestamp hours_to_seconds(double hours) {
  return static_cast<Timestamp>(std::llround(hours * kSecondsPerHour));
}

Timestamp parse_iso8601_utc(std::string_view text) {
  int year = 0, month = 0, day = 0, hour = 0, minute = 0, second = 0;
  if (!read_digits(text, 0, 4, year) || text.size() < 20 || text[4] != '-' ||
      !read_digits(text, 5, 2, month) || text[7] != '-' || !read_digits(text, 8, 2, day) ||
      text[10] != 'T' || !read_digits(text, 11, 2, hour) || text[13] != ':' ||
      !read_digits(text, 14, 2, minute) || text[16] != ':' ||
      !read_digits(text, 17, 2, second)) {
    bad_timestamp(text);
  }
  std::size_t pos = 19;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    std::size_t digits = 0;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
      ++pos;
      ++digits;
    }
    if (digits == 0) bad_timestamp(text);
  }
  std::int64_t offset = 0;
  if (pos >= text.size()) bad_timestamp(text);
  if (text[pos] == 'Z') {
    ++pos;
  } else if (text[pos] == '+' || text[pos] == '-') {
    const int sign = text[pos] == '+' ? 1 : -1;
    int oh = 0, om = 0;
    if (!read_digits(text, pos + 1, 2, oh) || pos + 3 >= text.size() || text[pos + 3] != ':' ||
        !read_digits(text, pos + 4, 2, om)) {
      bad_timestamp(text);
    }
    offset = sign * (oh * 3600 + om * 60);
    pos += 6;
  } else {
    bad_timestamp(text);
  }
  if (pos != text.size()) bad_timestamp(text);
  if (month < 1 || month > 12 || day < 1 || hour > 23 || minute > 59 || second > 59) {
    bad_timestamp(text);
  }
  // Round-trip the date to reject impossible days such as Feb 30.
  const std::int64_t days = days_from_civil(year, month, day);
  std::int64_t y2;
  int m2, d2;
  civil_from_days(days, y2, m2, d2);
  if (y2 != year || m2 != month || d2 != day) bad_timestamp(text);

  return days * 86400 + hour * 3600 + minute * 60 + second - offset;
}

std::string format_iso8601_utc(Timestamp t) {
  std::int64_t days = t / 86400;
  std::int64_t rem = t % 86400;
  if (rem < 0) {
    rem += 86400;
    --days;
  }
  std::int64_t year;
  int month, day;
  civil_from_days(days, year, month, day);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04lld-%02d-%02dT%02d:%02d:%02dZ",
                static_cast<long long>(year), month, day, static_cast<int>(rem / 3600),
                static_cast<int>((rem % 3600) / 60), static_cast<int>(rem % 60));
  return buf;
}

}  // namespace wardboost
