#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "faunawatch/domain.hpp"
#include "faunawatch/error.hpp"
#include "faunawatch/record.hpp"
#include "faunawatch/time.hpp"

namespace faunawatch {

struct DailyStat {
  utc_day date{};
  std::string taxon;
  size_t article_count = 0;
  std::optional<double> mean_sentiment;  // present iff article_count > 0
};

struct CountryStat {
  std::string country;  // alpha-2 when mapped, else the verbatim raw string
  std::string taxon;
  size_t article_count = 0;
  std::optional<double> mean_sentiment;
  std::optional<bool> is_range;  // present when a range table resolves it
};

struct DailySeries {
  std::string taxon;
  std::vector<DailyStat> stats;
};

namespace detail {

inline std::vector<utc_day> window_days(const TimeWindow& window) {
  using namespace std::chrono;
  std::vector<utc_day> out;
  utc_day first = day_of(window.start);
  utc_day last = day_of(window.end - seconds(1));
  for (utc_day d = first; d <= last; d += days(1)) out.push_back(d);
  return out;
}

}  // namespace detail

// One row per calendar day in the window, zero-article days included.
// Records are expected to be pre-filtered to relevant = true.
inline std::vector<DailyStat> daily_counts(
    const std::vector<ArticleRecord>& records, const std::string& taxon,
    const TimeWindow& window) {
  std::map<utc_day, size_t> counts;
  for (const auto& rec : records) {
    if (rec.taxon != taxon || !window.contains(rec.seen_date)) continue;
    counts[day_of(rec.seen_date)] += 1;
  }
  std::vector<DailyStat> out;
  for (utc_day d : detail::window_days(window)) {
    DailyStat stat;
    stat.date = d;
    stat.taxon = taxon;
    stat.article_count = counts.count(d) ? counts[d] : 0;
    out.push_back(std::move(stat));
  }
  return out;
}

// Fraction of days with at least one article.
inline double coverage_fraction(const std::vector<DailyStat>& daily) {
  if (daily.empty())
    fail(errc::empty_window, "coverage over an empty day list");
  size_t covered = 0;
  for (const auto& d : daily)
    if (d.article_count > 0) ++covered;
  return double(covered) / double(daily.size());
}

inline std::vector<DailyStat> daily_mean_sentiment(
    const std::vector<ArticleRecord>& records, const std::string& taxon,
    const TimeWindow& window) {
  std::map<utc_day, std::pair<double, size_t>> acc;  // day -> (sum, n)
  for (const auto& rec : records) {
    if (rec.taxon != taxon || !window.contains(rec.seen_date)) continue;
    if (!rec.sentiment)
      fail(errc::unscored_record,
           "record " + rec.id + " is relevant but has no sentiment score;"
           " run the scoring stage first");
    auto& [sum, n] = acc[day_of(rec.seen_date)];
    sum += *rec.sentiment;
    n += 1;
  }
  std::vector<DailyStat> out;
  for (utc_day d : detail::window_days(window)) {
    DailyStat stat;
    stat.date = d;
    stat.taxon = taxon;
    auto it = acc.find(d);
    if (it != acc.end()) {
      stat.article_count = it->second.second;
      stat.mean_sentiment = it->second.first / double(it->second.second);
    }
    out.push_back(std::move(stat));
  }
  return out;
}

// Groups by mapped ISO code when available, else by the verbatim index
// string so mapping gaps stay visible instead of vanishing. Rows sort by
// country key. An empty range set means globally distributed and counts
// every resolved country as range.
inline std::vector<CountryStat> country_stats(
    const std::vector<ArticleRecord>& records, const std::string& taxon,
    const RangeTable* ranges = nullptr) {
  struct Group {
    size_t count = 0;
    double sum = 0.0;
    bool iso_mapped = false;
  };
  std::map<std::string, Group> groups;
  for (const auto& rec : records) {
    if (rec.taxon != taxon) continue;
    if (!rec.sentiment)
      fail(errc::unscored_record,
           "record " + rec.id + " is relevant but has no sentiment score");
    std::string key = rec.source_country_iso ? *rec.source_country_iso
                                             : rec.source_country_raw;
    auto& g = groups[key];
    g.count += 1;
    g.sum += *rec.sentiment;
    g.iso_mapped = rec.source_country_iso.has_value();
  }
  std::vector<CountryStat> out;
  for (const auto& [country, g] : groups) {
    CountryStat stat;
    stat.country = country;
    stat.taxon = taxon;
    stat.article_count = g.count;
    stat.mean_sentiment = g.sum / double(g.count);
    if (ranges && g.iso_mapped && ranges->has(taxon)) {
      const auto& codes = ranges->entries.at(taxon);
      stat.is_range = codes.empty() ? true : codes.count(country) > 0;
    }
    out.push_back(std::move(stat));
  }
  return out;
}

// Article-weighted mean sentiment over range vs non-range countries.
// Entries without a resolved is_range are excluded; a side with no
// articles comes back absent.
inline std::pair<std::optional<double>, std::optional<double>> range_split(
    const std::vector<CountryStat>& stats) {
  double range_sum = 0, nonrange_sum = 0;
  size_t range_n = 0, nonrange_n = 0;
  bool any_resolved = false;
  for (const auto& s : stats) {
    if (!s.is_range || !s.mean_sentiment) continue;
    any_resolved = true;
    double total = *s.mean_sentiment * double(s.article_count);
    if (*s.is_range) {
      range_sum += total;
      range_n += s.article_count;
    } else {
      nonrange_sum += total;
      nonrange_n += s.article_count;
    }
  }
  if (!any_resolved)
    fail(errc::no_resolved_countries,
         "no country in the stat list has a resolved range flag");
  std::optional<double> range_mean, nonrange_mean;
  if (range_n > 0) range_mean = range_sum / double(range_n);
  if (nonrange_n > 0) nonrange_mean = nonrange_sum / double(nonrange_n);
  return {range_mean, nonrange_mean};
}

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

inline std::string csv_float(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace detail

// RFC 4180 output (CRLF line ends, quoting only where needed), floats at
// six decimals, byte-identical for identical inputs.
inline std::string render_csv(const std::vector<DailyStat>& stats) {
  std::string out = "date,taxon,count,mean_sentiment\r\n";
  for (const auto& s : stats) {
    out += format_date(s.date) + "," + detail::csv_field(s.taxon) + "," +
           std::to_string(s.article_count) + ",";
    if (s.mean_sentiment) out += detail::csv_float(*s.mean_sentiment);
    out += "\r\n";
  }
  return out;
}

inline std::string render_csv(const std::vector<CountryStat>& stats) {
  std::string out = "country,taxon,count,mean_sentiment,is_range\r\n";
  for (const auto& s : stats) {
    out += detail::csv_field(s.country) + "," + detail::csv_field(s.taxon) +
           "," + std::to_string(s.article_count) + ",";
    if (s.mean_sentiment) out += detail::csv_float(*s.mean_sentiment);
    out += ",";
    if (s.is_range) out += *s.is_range ? "true" : "false";
    out += "\r\n";
  }
  return out;
}

enum class ChartMetric { count, sentiment };

namespace detail {

inline const char* series_color(size_t i) {
  static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                  "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                  "#bcbd22", "#17becf"};
  return palette[i % (sizeof(palette) / sizeof(palette[0]))];
}

inline std::string svg_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace detail

// Deterministic SVG line chart, one polyline per taxon. Count series plot
// zero-article days as 0; sentiment series break the line at them, so a
// day without articles reads as a gap rather than a fake neutral value.
inline std::string render_chart(const std::vector<DailySeries>& series,
                                ChartMetric metric) {
  if (series.empty())
    fail(errc::empty_series, "chart needs at least one series");
  size_t max_len = 0;
  for (const auto& s : series) max_len = std::max(max_len, s.stats.size());
  if (max_len == 0)
    fail(errc::empty_series, "chart needs at least one data point");

  double lo = 0, hi = 0;
  bool seen = false;
  auto value_of = [&](const DailyStat& s) -> std::optional<double> {
    if (metric == ChartMetric::count) return double(s.article_count);
    return s.mean_sentiment;
  };
  for (const auto& s : series)
    for (const auto& st : s.stats) {
      auto v = value_of(st);
      if (!v) continue;
      if (!seen) {
        lo = hi = *v;
        seen = true;
      } else {
        lo = std::min(lo, *v);
        hi = std::max(hi, *v);
      }
    }
  if (!seen) {
    lo = 0;
    hi = 1;
  }
  double pad = (hi - lo) * 0.05;
  if (pad == 0) pad = std::max(0.5, std::abs(hi) * 0.05);
  lo -= pad;
  hi += pad;

  const double width = 960, height = 480;
  const double ml = 60, mr = 20, mt = 20, mb = 40;
  const double plot_w = width - ml - mr, plot_h = height - mt - mb;
  auto x_at = [&](size_t i) {
    if (max_len <= 1) return ml + plot_w / 2;
    return ml + plot_w * double(i) / double(max_len - 1);
  };
  auto y_at = [&](double v) { return mt + plot_h * (1.0 - (v - lo) / (hi - lo)); };

  std::string svg =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 960 480\" "
      "width=\"960\" height=\"480\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"960\" height=\"480\" fill=\"white\"/>\n";
  // Axes with min/max labels.
  svg += "<line x1=\"" + detail::svg_num(ml) + "\" y1=\"" +
         detail::svg_num(mt) + "\" x2=\"" + detail::svg_num(ml) + "\" y2=\"" +
         detail::svg_num(mt + plot_h) + "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + detail::svg_num(ml) + "\" y1=\"" +
         detail::svg_num(mt + plot_h) + "\" x2=\"" +
         detail::svg_num(ml + plot_w) + "\" y2=\"" +
         detail::svg_num(mt + plot_h) + "\" stroke=\"black\"/>\n";
  svg += "<text x=\"8\" y=\"" + detail::svg_num(mt + 10) +
         "\" font-size=\"12\">" + detail::svg_num(hi) + "</text>\n";
  svg += "<text x=\"8\" y=\"" + detail::svg_num(mt + plot_h) +
         "\" font-size=\"12\">" + detail::svg_num(lo) + "</text>\n";
  if (!series[0].stats.empty()) {
    svg += "<text x=\"" + detail::svg_num(ml) + "\" y=\"" +
           detail::svg_num(height - 12) + "\" font-size=\"12\">" +
           format_date(series[0].stats.front().date) + "</text>\n";
    svg += "<text x=\"" + detail::svg_num(ml + plot_w - 70) + "\" y=\"" +
           detail::svg_num(height - 12) + "\" font-size=\"12\">" +
           format_date(series[0].stats.back().date) + "</text>\n";
  }

  for (size_t si = 0; si < series.size(); ++si) {
    const char* color = detail::series_color(si);
    std::vector<std::vector<std::pair<double, double>>> segments(1);
    for (size_t i = 0; i < series[si].stats.size(); ++i) {
      auto v = value_of(series[si].stats[i]);
      if (!v) {
        if (!segments.back().empty()) segments.emplace_back();
        continue;
      }
      segments.back().emplace_back(x_at(i), y_at(*v));
    }
    for (const auto& seg : segments) {
      if (seg.empty()) continue;
      if (seg.size() == 1) {
        svg += "<circle cx=\"" + detail::svg_num(seg[0].first) + "\" cy=\"" +
               detail::svg_num(seg[0].second) + "\" r=\"2\" fill=\"" + color +
               "\"/>\n";
        continue;
      }
      svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
             "\" stroke-width=\"1.5\" points=\"";
      for (size_t k = 0; k < seg.size(); ++k) {
        if (k) svg += " ";
        svg += detail::svg_num(seg[k].first) + "," +
               detail::svg_num(seg[k].second);
      }
      svg += "\"/>\n";
    }
    // Legend, input order.
    double ly = mt + 16 * double(si);
    svg += "<rect x=\"" + detail::svg_num(ml + plot_w - 110) + "\" y=\"" +
           detail::svg_num(ly) + "\" width=\"10\" height=\"10\" fill=\"" +
           color + "\"/>\n";
    svg += "<text x=\"" + detail::svg_num(ml + plot_w - 96) + "\" y=\"" +
           detail::svg_num(ly + 9) + "\" font-size=\"12\">" +
           series[si].taxon + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace faunawatch
