#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "faunawatch/error.hpp"
#include "faunawatch/time.hpp"

namespace faunawatch {

// One Table-1-style row: a taxon's main keyword plus its qualifying
// keywords, normalized and de-duplicated.
struct SearchFamily {
  std::string taxon;
  std::string main_keyword;
  std::vector<std::string> additional_keywords;  // nonempty, unique, ordered
};

struct RangeTable {
  // taxon -> alpha-2 codes of native range countries. An empty set means
  // globally distributed; analytics treats that as all-range.
  std::map<std::string, std::set<std::string>> entries;

  bool has(const std::string& taxon) const { return entries.count(taxon) > 0; }
};

// Lowercase, trim surrounding whitespace, collapse internal runs to one
// space. The search index is case-insensitive; a canonical form makes
// keyword dedup deterministic.
inline std::string normalize_keyword(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (unsigned char c : raw) {
    if (std::isspace(c)) {
      if (!out.empty()) pending_space = true;
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(char(std::tolower(c)));
  }
  return out;
}

namespace detail {

using ordered_json = nlohmann::ordered_json;

inline ordered_json parse_config_json(std::string_view text,
                                      const char* what,
                                      std::vector<std::string>* top_keys) {
  ordered_json::parser_callback_t cb = [&](int depth,
                                           ordered_json::parse_event_t ev,
                                           ordered_json& parsed) {
    if (top_keys && depth == 1 && ev == ordered_json::parse_event_t::key)
      top_keys->push_back(parsed.get<std::string>());
    return true;
  };
  ordered_json doc = ordered_json::parse(text, cb, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object())
    fail(errc::malformed_config,
         std::string(what) + ": not a well-formed JSON object");
  return doc;
}

}  // namespace detail

inline std::vector<SearchFamily> parse_family_config(std::string_view text) {
  std::vector<std::string> keys;
  auto doc = detail::parse_config_json(text, "families", &keys);

  std::set<std::string> seen;
  for (const auto& k : keys) {
    std::string taxon = normalize_keyword(k);
    if (!seen.insert(taxon).second)
      fail(errc::duplicate_taxon, "duplicate taxon: " + taxon);
  }

  std::vector<SearchFamily> out;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    SearchFamily fam;
    fam.taxon = normalize_keyword(it.key());
    if (fam.taxon.empty())
      fail(errc::malformed_config, "families: empty taxon key");
    const auto& val = it.value();
    if (!val.is_object() || !val.contains("main") ||
        !val["main"].is_string() || !val.contains("additional") ||
        !val["additional"].is_array())
      fail(errc::malformed_config,
           "families: entry for '" + fam.taxon +
               "' must be {\"main\": string, \"additional\": [string,...]}");
    fam.main_keyword = normalize_keyword(val["main"].get<std::string>());
    if (fam.main_keyword.empty())
      fail(errc::malformed_config,
           "families: empty main keyword for taxon '" + fam.taxon + "'");
    std::set<std::string> dedup;
    for (const auto& kw : val["additional"]) {
      if (!kw.is_string())
        fail(errc::malformed_config,
             "families: non-string keyword for taxon '" + fam.taxon + "'");
      std::string norm = normalize_keyword(kw.get<std::string>());
      if (norm.empty())
        fail(errc::malformed_config,
             "families: blank keyword for taxon '" + fam.taxon + "'");
      // The main keyword is implicit in every query; listing it again
      // (or listing a keyword twice, as Table-1-style configs do) is
      // collapsed rather than rejected.
      if (norm == fam.main_keyword) continue;
      if (dedup.insert(norm).second) fam.additional_keywords.push_back(norm);
    }
    if (fam.additional_keywords.empty())
      fail(errc::empty_family,
           "taxon '" + fam.taxon + "' has no additional keywords");
    out.push_back(std::move(fam));
  }
  return out;
}

inline std::string serialize_family_config(
    const std::vector<SearchFamily>& families) {
  detail::ordered_json doc = detail::ordered_json::object();
  for (const auto& fam : families) {
    detail::ordered_json entry;
    entry["main"] = fam.main_keyword;
    entry["additional"] = fam.additional_keywords;
    doc[fam.taxon] = std::move(entry);
  }
  return doc.dump(2) + "\n";
}

inline bool is_alpha2_code(std::string_view s) {
  return s.size() == 2 && s[0] >= 'A' && s[0] <= 'Z' && s[1] >= 'A' &&
         s[1] <= 'Z';
}

inline RangeTable parse_range_table(std::string_view text) {
  auto doc = detail::parse_config_json(text, "ranges", nullptr);
  RangeTable table;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    std::string taxon = normalize_keyword(it.key());
    if (!it.value().is_array())
      fail(errc::malformed_config,
           "ranges: entry for '" + taxon + "' must be an array of codes");
    std::set<std::string>& codes = table.entries[taxon];
    for (const auto& code : it.value()) {
      if (!code.is_string())
        fail(errc::malformed_config,
             "ranges: non-string code for taxon '" + taxon + "'");
      std::string norm = code.get<std::string>();
      std::transform(norm.begin(), norm.end(), norm.begin(),
                     [](unsigned char c) { return char(std::toupper(c)); });
      if (!is_alpha2_code(norm))
        fail(errc::invalid_country_code,
             "ranges: '" + code.get<std::string>() + "' for taxon '" + taxon +
                 "' is not an ISO 3166-1 alpha-2 code");
      codes.insert(norm);
    }
  }
  return table;
}

// Every configured taxon must have a range entry (possibly empty).
inline void check_range_coverage(const std::vector<SearchFamily>& families,
                                 const RangeTable& ranges) {
  for (const auto& fam : families)
    if (!ranges.has(fam.taxon))
      fail(errc::malformed_config,
           "ranges: no entry for configured taxon '" + fam.taxon + "'");
}

}  // namespace faunawatch
