#pragma once

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "faunawatch/error.hpp"
#include "faunawatch/hash.hpp"
#include "faunawatch/time.hpp"

namespace faunawatch {

// One persisted article. id is the SHA-256 hex of the normalized URL, so
// the same article reached through tracking-parameter or scheme variants
// collapses to one identity. Optional fields stay absent until the
// corresponding pipeline stage has run.
struct ArticleRecord {
  std::string id;
  std::string taxon;
  std::string url;
  std::string fetched_url;
  utc_seconds seen_date{};
  std::string source_country_raw;
  std::optional<std::string> source_country_iso;
  std::string language;
  std::string title;
  std::string text;
  utc_seconds fetched_at{};
  std::optional<bool> relevant;
  std::optional<double> relevance_posterior;
  std::optional<double> sentiment;
};

inline nlohmann::json record_to_json(const ArticleRecord& r) {
  nlohmann::json j;
  j["id"] = r.id;
  j["taxon"] = r.taxon;
  j["url"] = r.url;
  j["fetched_url"] = r.fetched_url;
  j["seen_date"] = format_iso8601(r.seen_date);
  j["source_country_raw"] = r.source_country_raw;
  if (r.source_country_iso) j["source_country_iso"] = *r.source_country_iso;
  j["language"] = r.language;
  j["title"] = r.title;
  j["text"] = r.text;
  j["fetched_at"] = format_iso8601(r.fetched_at);
  if (r.relevant) j["relevant"] = *r.relevant;
  if (r.relevance_posterior) j["relevance_posterior"] = *r.relevance_posterior;
  if (r.sentiment) j["sentiment"] = *r.sentiment;
  return j;
}

inline ArticleRecord record_from_json(const nlohmann::json& j) {
  ArticleRecord r;
  try {
    r.id = j.at("id").get<std::string>();
    r.taxon = j.at("taxon").get<std::string>();
    r.url = j.at("url").get<std::string>();
    r.fetched_url = j.at("fetched_url").get<std::string>();
    r.seen_date = parse_iso8601(j.at("seen_date").get<std::string>());
    r.source_country_raw = j.at("source_country_raw").get<std::string>();
    if (j.contains("source_country_iso"))
      r.source_country_iso = j["source_country_iso"].get<std::string>();
    r.language = j.at("language").get<std::string>();
    r.title = j.at("title").get<std::string>();
    r.text = j.at("text").get<std::string>();
    r.fetched_at = parse_iso8601(j.at("fetched_at").get<std::string>());
    if (j.contains("relevant")) r.relevant = j["relevant"].get<bool>();
    if (j.contains("relevance_posterior"))
      r.relevance_posterior = j["relevance_posterior"].get<double>();
    if (j.contains("sentiment")) r.sentiment = j["sentiment"].get<double>();
  } catch (const nlohmann::json::exception& e) {
    fail(errc::corrupt_line, std::string("record: ") + e.what());
  }
  if (!is_hex_id(r.id))
    fail(errc::corrupt_line, "record: id is not 64 hex chars: " + r.id);
  if (r.text.empty())
    fail(errc::corrupt_line, "record: empty text for id " + r.id);
  return r;
}

inline std::string record_to_line(const ArticleRecord& r) {
  return record_to_json(r).dump();
}

}  // namespace faunawatch
