#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "faunawatch/domain.hpp"
#include "faunawatch/error.hpp"
#include "faunawatch/time.hpp"
#include "faunawatch/transport.hpp"
#include "faunawatch/url.hpp"

namespace faunawatch {

struct Query {
  std::string text;
  TimeWindow window;
  int max_records = 250;  // DOC API page limit
};

// One search hit from the index. taxon and matched_keyword record which
// family and which query produced it.
struct ArticleRef {
  std::string url;
  std::optional<std::string> mobile_url;
  std::string title;
  utc_seconds seen_date{};
  std::string source_country;  // verbatim index string
  std::string language;        // verbatim index string
  std::string domain;
  std::string taxon;
  std::string matched_keyword;
};

// One query per unique additional keyword: `<main> <keyword>
// sourcelang:eng`. Terms AND together; the language term pins the
// English-only collection policy.
inline std::vector<Query> build_queries(const SearchFamily& family,
                                        const TimeWindow& window) {
  std::vector<Query> out;
  out.reserve(family.additional_keywords.size());
  for (const auto& keyword : family.additional_keywords)
    out.push_back(Query{
        family.main_keyword + " " + keyword + " sourcelang:eng", window});
  return out;
}

struct ArtListReport {
  size_t skipped_missing_url = 0;
  size_t skipped_bad_url = 0;
  size_t skipped_bad_date = 0;

  size_t skipped() const {
    return skipped_missing_url + skipped_bad_url + skipped_bad_date;
  }
};

// Parses a DOC API ArtList response. Entries without a usable url or
// seendate are dropped and counted, not errors; an undecodable document
// is MalformedResponse.
inline std::vector<ArticleRef> parse_artlist(std::string_view body,
                                             ArtListReport* report = nullptr) {
  auto doc = nlohmann::json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object())
    fail(errc::malformed_response, "artlist: not a JSON object");
  ArtListReport local;
  std::vector<ArticleRef> out;
  // The index omits the key entirely when a query matches nothing.
  if (doc.contains("articles")) {
    const auto& articles = doc["articles"];
    if (!articles.is_array())
      fail(errc::malformed_response, "artlist: \"articles\" is not an array");
    for (const auto& entry : articles) {
      if (!entry.is_object() || !entry.contains("url") ||
          !entry["url"].is_string()) {
        ++local.skipped_missing_url;
        continue;
      }
      ArticleRef ref;
      ref.url = entry["url"].get<std::string>();
      if (!parse_url(ref.url)) {
        ++local.skipped_bad_url;
        continue;
      }
      if (entry.contains("url_mobile") && entry["url_mobile"].is_string() &&
          !entry["url_mobile"].get<std::string>().empty())
        ref.mobile_url = entry["url_mobile"].get<std::string>();
      auto str = [&](const char* key) {
        return entry.contains(key) && entry[key].is_string()
                   ? entry[key].get<std::string>()
                   : std::string();
      };
      ref.title = str("title");
      ref.source_country = str("sourcecountry");
      ref.language = str("language");
      ref.domain = str("domain");
      std::string seendate = str("seendate");
      try {
        ref.seen_date = parse_gdelt_seendate(seendate);
      } catch (const Error&) {
        ++local.skipped_bad_date;
        continue;
      }
      out.push_back(std::move(ref));
    }
  }
  if (report) *report = local;
  return out;
}

// First occurrence per normalized-URL key wins, input order preserved.
inline std::vector<ArticleRef> dedupe_refs(
    const std::vector<ArticleRef>& refs) {
  std::vector<ArticleRef> out;
  std::unordered_set<std::string> seen;
  for (const auto& ref : refs) {
    auto key = normalize_url(ref.url);
    if (!key) continue;  // parse_artlist never emits these
    if (seen.insert(*key).second) out.push_back(ref);
  }
  return out;
}

struct ScanOptions {
  bool best_effort = false;
  std::function<void(const std::string&)> warn;  // optional sink
};

namespace detail {

inline void scan_warn(const ScanOptions& opts, const std::string& msg) {
  if (opts.warn) opts.warn(msg);
}

}  // namespace detail

// Runs every family query over the window, tags and deduplicates the
// hits. Output order is query order then response order, so a fixture
// scan is a pure function of its inputs. A failing query aborts the scan
// unless best_effort is set, in which case it is logged and skipped.
inline std::vector<ArticleRef> scan_window(const SearchFamily& family,
                                           const TimeWindow& window,
                                           Transport& transport,
                                           const ScanOptions& opts = {}) {
  using namespace std::chrono;
  if (transport.live() && window.duration() > hours(72))
    fail(errc::window_too_wide,
         "live index search is limited to the previous 3 days; window is " +
             std::to_string(duration_cast<hours>(window.duration()).count()) +
             "h");
  auto queries = build_queries(family, window);
  std::vector<ArticleRef> all;
  for (size_t i = 0; i < queries.size(); ++i) {
    const std::string& keyword = family.additional_keywords[i];
    std::string context =
        "taxon=" + family.taxon + " keyword=" + keyword;
    try {
      ArtListRequest req{family.taxon, keyword, queries[i].text, window,
                         queries[i].max_records};
      HttpResponse resp = transport.artlist(req);
      if (resp.status < 200 || resp.status >= 300)
        fail(errc::transport_error,
             "index returned HTTP " + std::to_string(resp.status));
      ArtListReport report;
      auto refs = parse_artlist(resp.body, &report);
      if (report.skipped() > 0)
        detail::scan_warn(opts, "skipped " + std::to_string(report.skipped()) +
                                    " malformed entries (" + context + ")");
      if (int(refs.size() + report.skipped()) >= queries[i].max_records)
        detail::scan_warn(
            opts, "response hit the " +
                      std::to_string(queries[i].max_records) +
                      "-record page limit; narrow the window (" + context +
                      ")");
      for (auto& ref : refs) {
        if (ref.seen_date < window.start || ref.seen_date > window.end) {
          detail::scan_warn(opts, "dropped out-of-window hit " + ref.url +
                                      " (" + context + ")");
          continue;
        }
        ref.taxon = family.taxon;
        ref.matched_keyword = keyword;
        all.push_back(std::move(ref));
      }
    } catch (const Error& e) {
      if (e.code() != errc::transport_error &&
          e.code() != errc::malformed_response)
        throw;
      Error wrapped(e.code(), std::string(e.what()) + " (" + context + ")");
      if (!opts.best_effort) throw wrapped;
      detail::scan_warn(opts,
                        std::string("skipping failed query: ") +
                            wrapped.what());
    }
  }
  return dedupe_refs(all);
}

inline nlohmann::json ref_to_json(const ArticleRef& ref) {
  nlohmann::json j;
  j["url"] = ref.url;
  if (ref.mobile_url) j["mobile_url"] = *ref.mobile_url;
  j["title"] = ref.title;
  j["seen_date"] = format_iso8601(ref.seen_date);
  j["source_country"] = ref.source_country;
  j["language"] = ref.language;
  j["domain"] = ref.domain;
  j["taxon"] = ref.taxon;
  j["matched_keyword"] = ref.matched_keyword;
  return j;
}

inline ArticleRef ref_from_json(const nlohmann::json& j) {
  ArticleRef ref;
  try {
    ref.url = j.at("url").get<std::string>();
    if (j.contains("mobile_url"))
      ref.mobile_url = j["mobile_url"].get<std::string>();
    ref.title = j.at("title").get<std::string>();
    ref.seen_date = parse_iso8601(j.at("seen_date").get<std::string>());
    ref.source_country = j.at("source_country").get<std::string>();
    ref.language = j.at("language").get<std::string>();
    ref.domain = j.at("domain").get<std::string>();
    ref.taxon = j.at("taxon").get<std::string>();
    ref.matched_keyword = j.at("matched_keyword").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    fail(errc::corrupt_line, std::string("ref: ") + e.what());
  }
  return ref;
}

}  // namespace faunawatch
