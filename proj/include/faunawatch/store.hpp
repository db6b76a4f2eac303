#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "faunawatch/error.hpp"
#include "faunawatch/io.hpp"
#include "faunawatch/record.hpp"
#include "faunawatch/relevance.hpp"
#include "faunawatch/time.hpp"

namespace faunawatch {

struct RecordFilter {
  std::optional<std::set<std::string>> taxa;
  std::optional<TimeWindow> window;  // on seen_date
  bool relevant_only = false;
};

struct ReadReport {
  size_t lines = 0;
  size_t corrupt = 0;
};

namespace detail {

template <typename OnLine>
inline void for_each_line(std::string_view text, OnLine&& on_line) {
  size_t pos = 0;
  while (pos < text.size()) {
    size_t nl = text.find('\n', pos);
    // A line is only complete once its newline hit the disk; a trailing
    // fragment is a torn write and is surfaced to the caller as corrupt.
    bool torn = nl == std::string_view::npos;
    std::string_view line =
        torn ? text.substr(pos) : text.substr(pos, nl - pos);
    on_line(line, torn);
    if (torn) break;
    pos = nl + 1;
  }
}

}  // namespace detail

// Append-only NDJSON log of article records. Later pipeline stages append
// superseding lines for an id; reads resolve last-writer-wins. A single
// Store instance is the sole writer for its file.
class Store {
 public:
  explicit Store(std::filesystem::path articles_file)
      : path_(std::move(articles_file)) {
    if (std::filesystem::exists(path_)) {
      detail::for_each_line(read_file(path_), [&](std::string_view line,
                                                  bool torn) {
        if (torn || line.empty()) return;
        auto j = nlohmann::json::parse(line, nullptr, false);
        if (!j.is_discarded() && j.is_object() && j.contains("id") &&
            j["id"].is_string())
          ids_.insert(j["id"].get<std::string>());
      });
    }
  }

  const std::filesystem::path& path() const { return path_; }

  bool contains(const std::string& id) const { return ids_.count(id) > 0; }

  // Ingest-time append: no write when the id is already present. This is
  // what makes overlapping scan windows idempotent.
  bool append_record(const ArticleRecord& record) {
    if (contains(record.id)) return false;
    append_line(path_, record_to_line(record));
    ids_.insert(record.id);
    return true;
  }

  // Stage-update append: unconditionally writes a superseding version line.
  void append_version(const ArticleRecord& record) {
    append_line(path_, record_to_line(record));
    ids_.insert(record.id);
  }

  std::vector<ArticleRecord> query(const RecordFilter& filter = {},
                                   ReadReport* report = nullptr) const {
    ReadReport local;
    std::unordered_map<std::string, ArticleRecord> latest;
    if (std::filesystem::exists(path_)) {
      detail::for_each_line(
          read_file(path_), [&](std::string_view line, bool torn) {
            if (line.empty()) return;
            ++local.lines;
            if (torn) {
              ++local.corrupt;
              return;
            }
            auto j = nlohmann::json::parse(line, nullptr, false);
            if (j.is_discarded() || !j.is_object()) {
              ++local.corrupt;
              return;
            }
            try {
              ArticleRecord rec = record_from_json(j);
              latest[rec.id] = std::move(rec);
            } catch (const Error&) {
              ++local.corrupt;
            }
          });
    }
    if (local.corrupt * 100 > local.lines)
      fail(errc::corrupt_line,
           std::to_string(local.corrupt) + " of " +
               std::to_string(local.lines) + " lines corrupt in " +
               path_.string());
    if (report) *report = local;

    std::vector<ArticleRecord> out;
    for (auto& [id, rec] : latest) {
      if (filter.taxa && !filter.taxa->count(rec.taxon)) continue;
      if (filter.window && !filter.window->contains(rec.seen_date)) continue;
      if (filter.relevant_only && !(rec.relevant && *rec.relevant)) continue;
      out.push_back(std::move(rec));
    }
    std::sort(out.begin(), out.end(),
              [](const ArticleRecord& a, const ArticleRecord& b) {
                if (a.seen_date != b.seen_date) return a.seen_date < b.seen_date;
                return a.id < b.id;
              });
    return out;
  }

 private:
  std::filesystem::path path_;
  std::unordered_set<std::string> ids_;
};

struct LabelEntry {
  std::string id;
  Label label;
  utc_seconds labeled_at{};
};

inline void append_label(const std::filesystem::path& label_file,
                         const std::string& id, Label label,
                         utc_seconds labeled_at) {
  if (!is_hex_id(id))
    fail(errc::malformed_config,
         "label id must be 64 lowercase hex chars: " + id);
  nlohmann::json j;
  j["id"] = id;
  j["class"] = label_name(label);
  j["labeled_at"] = format_iso8601(labeled_at);
  append_line(label_file, j.dump());
}

// Last label per id wins; re-labeling appends rather than rewrites.
inline std::map<std::string, Label> read_labels(
    const std::filesystem::path& label_file, ReadReport* report = nullptr) {
  std::map<std::string, Label> out;
  ReadReport local;
  if (std::filesystem::exists(label_file)) {
    detail::for_each_line(
        read_file(label_file), [&](std::string_view line, bool torn) {
          if (line.empty()) return;
          ++local.lines;
          auto j = torn ? nlohmann::json(nlohmann::json::value_t::discarded)
                        : nlohmann::json::parse(line, nullptr, false);
          if (j.is_discarded() || !j.is_object() || !j.contains("id") ||
              !j.contains("class") || !j["id"].is_string() ||
              !j["class"].is_string()) {
            ++local.corrupt;
            return;
          }
          auto label = parse_label(j["class"].get<std::string>());
          std::string id = j["id"].get<std::string>();
          if (!label || !is_hex_id(id)) {
            ++local.corrupt;
            return;
          }
          out[id] = *label;
        });
  }
  if (report) *report = local;
  return out;
}

// countries.tsv sidecar: verbatim index country name -> alpha-2 code.
inline std::unordered_map<std::string, std::string> load_country_map(
    std::string_view tsv) {
  std::unordered_map<std::string, std::string> map;
  size_t pos = 0, lineno = 0;
  while (pos <= tsv.size()) {
    size_t nl = tsv.find('\n', pos);
    std::string_view line = tsv.substr(
        pos, nl == std::string_view::npos ? tsv.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? tsv.size() + 1 : nl + 1;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string_view::npos)
      fail(errc::malformed_config,
           "countries: line " + std::to_string(lineno) + " has no tab");
    std::string raw(line.substr(0, tab));
    std::string code(line.substr(tab + 1));
    if (code.size() != 2 || !std::isalpha((unsigned char)code[0]) ||
        !std::isalpha((unsigned char)code[1]))
      fail(errc::malformed_config,
           "countries: bad alpha-2 code '" + code + "' at line " +
               std::to_string(lineno));
    code[0] = char(std::toupper((unsigned char)code[0]));
    code[1] = char(std::toupper((unsigned char)code[1]));
    map[raw] = code;
  }
  return map;
}

}  // namespace faunawatch
