#include "errql/time.hpp"

#include <cctype>
#include <cstdio>

#include "errql/errors.hpp"

namespace errql {

namespace {

bool all_digits(const std::string& s, std::size_t from, std::size_t count) {
  if (from + count > s.size()) return false;
  for (std::size_t i = from; i < from + count; ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  }
  return true;
}

int to_int(const std::string& s, std::size_t from, std::size_t count) {
  int v = 0;
  for (std::size_t i = from; i < from + count; ++i) v = v * 10 + (s[i] - '0');
  return v;
}

}  // namespace

Timestamp parse_rfc3339(const std::string& text) {
  using namespace std::chrono;
  const auto fail = [&](const char* why) -> Timestamp {
    throw ParseError("bad RFC3339 timestamp '" + text + "': " + why);
  };

  // Fixed prefix: YYYY-MM-DDTHH:MM:SS
  if (text.size() < 20) fail("too short");
  if (!all_digits(text, 0, 4) || text[4] != '-' || !all_digits(text, 5, 2) ||
      text[7] != '-' || !all_digits(text, 8, 2)) {
    fail("bad date");
  }
  if ((text[10] != 'T' && text[10] != 't' && text[10] != ' ') ||
      !all_digits(text, 11, 2) || text[13] != ':' || !all_digits(text, 14, 2) ||
      text[16] != ':' || !all_digits(text, 17, 2)) {
    fail("bad time");
  }
  const int yy = to_int(text, 0, 4);
  const int mo = to_int(text, 5, 2);
  const int dd = to_int(text, 8, 2);
  const int hh = to_int(text, 11, 2);
  const int mi = to_int(text, 14, 2);
  const int ss = to_int(text, 17, 2);

  std::size_t pos = 19;
  int millis = 0;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    std::size_t digits = 0;
    while (pos + digits < text.size() &&
           std::isdigit(static_cast<unsigned char>(text[pos + digits]))) {
      ++digits;
    }
    if (digits == 0) fail("empty fraction");
    for (std::size_t i = 0; i < 3; ++i) {
      millis = millis * 10 + (i < digits ? text[pos + i] - '0' : 0);
    }
    pos += digits;
  }

  // Offset: 'Z' or +-HH:MM.
  minutes offset{0};
  if (pos >= text.size()) fail("missing offset");
  if (text[pos] == 'Z' || text[pos] == 'z') {
    ++pos;
  } else if (text[pos] == '+' || text[pos] == '-') {
    const int sign = text[pos] == '+' ? 1 : -1;
    if (!all_digits(text, pos + 1, 2) || pos + 3 >= text.size() ||
        text[pos + 3] != ':' || !all_digits(text, pos + 4, 2)) {
      fail("bad offset");
    }
    offset = minutes{sign * (to_int(text, pos + 1, 2) * 60 + to_int(text, pos + 4, 2))};
    pos += 6;
  } else {
    fail("bad offset");
  }
  if (pos != text.size()) fail("trailing characters");

  const year_month_day ymd{year{yy}, month{static_cast<unsigned>(mo)},
                           day{static_cast<unsigned>(dd)}};
  if (!ymd.ok()) fail("invalid calendar date");
  if (hh > 23 || mi > 59 || ss > 60) fail("invalid time of day");

  const sys_days date{ymd};
  Timestamp tp = date + hours{hh} + minutes{mi} + seconds{ss} + milliseconds{millis};
  return tp - offset;
}

std::string format_rfc3339(Timestamp tp) {
  using namespace std::chrono;
  const sys_days date = floor<days>(tp);
  const year_month_day ymd{date};
  const auto tod = tp - date;
  const auto h = duration_cast<hours>(tod);
  const auto m = duration_cast<minutes>(tod - h);
  const auto s = duration_cast<seconds>(tod - h - m);
  const auto ms = duration_cast<milliseconds>(tod - h - m - s);

  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02d.%03dZ",
                static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()), static_cast<int>(h.count()),
                static_cast<int>(m.count()), static_cast<int>(s.count()),
                static_cast<int>(ms.count()));
  return buf;
}

}  // namespace errql
