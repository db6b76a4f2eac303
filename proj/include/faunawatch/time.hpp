#pragma once

#include <chrono>
#include <cstdio>
#include <string>
#include <string_view>

#include "faunawatch/error.hpp"

namespace faunawatch {

// All timestamps are UTC with second resolution.
using utc_seconds = std::chrono::sys_seconds;
using utc_day = std::chrono::sys_days;

// Half-open interval [start, end).
struct TimeWindow {
  utc_seconds start{};
  utc_seconds end{};

  std::chrono::seconds duration() const { return end - start; }
  bool contains(utc_seconds t) const { return t >= start && t < end; }
};

inline TimeWindow make_window(utc_seconds start, utc_seconds end) {
  if (!(start < end))
    fail(errc::malformed_config, "time window start must precede end");
  return TimeWindow{start, end};
}

namespace detail {

inline bool parse_fixed_uint(std::string_view s, size_t pos, size_t len,
                             int& out) {
  if (pos + len > s.size()) return false;
  int v = 0;
  for (size_t i = 0; i < len; ++i) {
    char c = s[pos + i];
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
  }
  out = v;
  return true;
}

inline utc_seconds make_utc(int y, int mo, int d, int h, int mi, int sec,
                            std::string_view original) {
  using namespace std::chrono;
  year_month_day ymd{year{y}, month{unsigned(mo)}, day{unsigned(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || sec > 60)
    fail(errc::malformed_config,
         "invalid calendar date-time: " + std::string(original));
  return utc_seconds{sys_days{ymd}.time_since_epoch() + hours{h} +
                     minutes{mi} + seconds{sec}};
}

}  // namespace detail

// Accepts `YYYY-MM-DDTHH:MM:SSZ` and the date-only shorthand `YYYY-MM-DD`
// (midnight UTC).
inline utc_seconds parse_iso8601(std::string_view s) {
  int y, mo, d, h = 0, mi = 0, sec = 0;
  bool ok = detail::parse_fixed_uint(s, 0, 4, y) && s.size() > 4 &&
            s[4] == '-' && detail::parse_fixed_uint(s, 5, 2, mo) &&
            s.size() > 7 && s[7] == '-' && detail::parse_fixed_uint(s, 8, 2, d);
  if (ok && s.size() == 10) return detail::make_utc(y, mo, d, 0, 0, 0, s);
  ok = ok && s.size() == 20 && s[10] == 'T' &&
       detail::parse_fixed_uint(s, 11, 2, h) && s[13] == ':' &&
       detail::parse_fixed_uint(s, 14, 2, mi) && s[16] == ':' &&
       detail::parse_fixed_uint(s, 17, 2, sec) && s[19] == 'Z';
  if (!ok)
    fail(errc::malformed_config, "invalid ISO-8601 UTC timestamp: " +
                                     std::string(s));
  return detail::make_utc(y, mo, d, h, mi, sec, s);
}

// GDELT ArtList `seendate`: YYYYMMDDThhmmssZ.
inline utc_seconds parse_gdelt_seendate(std::string_view s) {
  int y, mo, d, h, mi, sec;
  bool ok = s.size() == 16 && s[8] == 'T' && s[15] == 'Z' &&
            detail::parse_fixed_uint(s, 0, 4, y) &&
            detail::parse_fixed_uint(s, 4, 2, mo) &&
            detail::parse_fixed_uint(s, 6, 2, d) &&
            detail::parse_fixed_uint(s, 9, 2, h) &&
            detail::parse_fixed_uint(s, 11, 2, mi) &&
            detail::parse_fixed_uint(s, 13, 2, sec);
  if (!ok)
    fail(errc::malformed_response,
         "invalid seendate: " + std::string(s));
  return detail::make_utc(y, mo, d, h, mi, sec, s);
}

namespace detail {

struct SplitUtc {
  int y, mo, d, h, mi, s;
};

inline SplitUtc split_utc(utc_seconds t) {
  using namespace std::chrono;
  auto dp = floor<days>(t);
  year_month_day ymd{dp};
  auto tod = t - dp;
  auto h = duration_cast<hours>(tod);
  auto mi = duration_cast<minutes>(tod - h);
  auto s = duration_cast<seconds>(tod - h - mi);
  return {int(ymd.year()), int(unsigned(ymd.month())),
          int(unsigned(ymd.day())), int(h.count()), int(mi.count()),
          int(s.count())};
}

}  // namespace detail

inline std::string format_iso8601(utc_seconds t) {
  auto u = detail::split_utc(t);
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", u.y, u.mo,
                u.d, u.h, u.mi, u.s);
  return buf;
}

// The DOC API's startdatetime/enddatetime format, also used to name
// fixture replay files.
inline std::string format_gdelt_datetime(utc_seconds t) {
  auto u = detail::split_utc(t);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d%02d%02d%02d%02d%02d", u.y, u.mo, u.d,
                u.h, u.mi, u.s);
  return buf;
}

inline utc_day day_of(utc_seconds t) {
  return std::chrono::floor<std::chrono::days>(t);
}

inline std::string format_date(utc_day d) {
  std::chrono::year_month_day ymd{d};
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", int(ymd.year()),
                unsigned(ymd.month()), unsigned(ymd.day()));
  return buf;
}

}  // namespace faunawatch
