#pragma once

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "faunawatch/analytics.hpp"
#include "faunawatch/domain.hpp"
#include "faunawatch/error.hpp"
#include "faunawatch/fetcher.hpp"
#include "faunawatch/gdelt.hpp"
#include "faunawatch/relevance.hpp"
#include "faunawatch/sentiment.hpp"
#include "faunawatch/store.hpp"
#include "faunawatch/transport.hpp"

namespace faunawatch {

struct PipelineConfig {
  std::filesystem::path families_path;
  std::filesystem::path ranges_path;
  std::filesystem::path lexicon_path;
  std::filesystem::path shifters_path;
  std::filesystem::path model_path;
  std::filesystem::path store_dir;
  std::optional<std::filesystem::path> fixtures_dir;
  std::optional<std::filesystem::path> countries_path;
  double threshold = 0.5;
  TimeWindow window{};
  bool best_effort = false;
  // Pins fetched_at (and label timestamps) for reproducible offline runs.
  std::optional<utc_seconds> fixed_clock;

  std::filesystem::path articles_file() const {
    return store_dir / "articles.ndjson";
  }
  std::filesystem::path refs_file() const { return store_dir / "refs.ndjson"; }
  std::filesystem::path labels_file() const {
    return store_dir / "labels.ndjson";
  }
  std::function<utc_seconds()> clock() const {
    if (fixed_clock) {
      utc_seconds t = *fixed_clock;
      return [t] { return t; };
    }
    return system_clock_utc;
  }
};

inline PipelineConfig load_pipeline_config(
    const std::filesystem::path& config_path) {
  auto doc = nlohmann::json::parse(read_file(config_path), nullptr, false);
  if (doc.is_discarded() || !doc.is_object())
    fail(errc::malformed_config,
         "config: not a JSON object: " + config_path.string());
  auto base = config_path.parent_path();
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
  };
  PipelineConfig cfg;
  try {
    cfg.families_path = resolve(doc.at("families").get<std::string>());
    cfg.ranges_path = resolve(doc.at("ranges").get<std::string>());
    cfg.lexicon_path = resolve(doc.at("lexicon").get<std::string>());
    cfg.shifters_path = resolve(doc.at("shifters").get<std::string>());
    cfg.model_path = resolve(doc.at("model").get<std::string>());
    cfg.store_dir = resolve(doc.at("store_dir").get<std::string>());
    cfg.window = make_window(
        parse_iso8601(doc.at("window").at("start").get<std::string>()),
        parse_iso8601(doc.at("window").at("end").get<std::string>()));
    if (doc.contains("fixtures"))
      cfg.fixtures_dir = resolve(doc["fixtures"].get<std::string>());
    if (doc.contains("countries"))
      cfg.countries_path = resolve(doc["countries"].get<std::string>());
    if (doc.contains("threshold")) cfg.threshold = doc["threshold"].get<double>();
    if (doc.contains("clock"))
      cfg.fixed_clock = parse_iso8601(doc["clock"].get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    fail(errc::malformed_config,
         "config " + config_path.string() + ": " + e.what());
  }
  if (!(cfg.threshold > 0.0 && cfg.threshold < 1.0))
    fail(errc::malformed_config, "config: threshold must lie in (0,1)");
  return cfg;
}

struct PipelineSummary {
  size_t scanned = 0;
  size_t fetched = 0;
  size_t relevant = 0;
  size_t scored = 0;
};

using WarnSink = std::function<void(const std::string&)>;

namespace detail {

inline std::unordered_map<std::string, std::string> load_countries_for(
    const PipelineConfig& cfg) {
  std::filesystem::path path = cfg.countries_path
                                   ? *cfg.countries_path
                                   : cfg.store_dir / "countries.tsv";
  if (!std::filesystem::exists(path)) return {};
  return load_country_map(read_file(path));
}

inline void apply_country(ArticleRecord& rec,
                          const std::unordered_map<std::string, std::string>&
                              countries,
                          std::set<std::string>& unmapped) {
  auto it = countries.find(rec.source_country_raw);
  if (it != countries.end())
    rec.source_country_iso = it->second;
  else if (!rec.source_country_raw.empty())
    unmapped.insert(rec.source_country_raw);
}

inline void report_unmapped(const std::set<std::string>& unmapped,
                            const WarnSink& warn) {
  if (unmapped.empty() || !warn) return;
  std::string msg = "unmapped source countries:";
  for (const auto& name : unmapped) msg += " \"" + name + "\"";
  warn(msg);
}

inline FetchOptions fetch_options_for(const PipelineConfig& cfg,
                                      const Transport& transport) {
  FetchOptions opts;
  opts.clock = cfg.clock();
  // Backoff is politeness toward live servers; replay failures are
  // configuration bugs and should fail fast.
  if (!transport.live()) opts.initial_backoff = std::chrono::milliseconds(0);
  return opts;
}

}  // namespace detail

// The full search -> retrieval -> filtering -> processing chain for every
// configured family. Records append once, fully populated; identity dedup
// in the store makes re-runs over overlapping windows no-ops.
inline PipelineSummary run_pipeline(const PipelineConfig& cfg,
                                    Transport& transport,
                                    const WarnSink& warn = {}) {
  // The model gate runs before anything can touch the network.
  BayesModel model = load_model(cfg.model_path);
  auto families = parse_family_config(read_file(cfg.families_path));
  Lexicon lexicon = load_lexicon(read_file(cfg.lexicon_path));
  ShifterTable shifters =
      load_shifters(read_file(cfg.shifters_path), &lexicon);
  auto countries = detail::load_countries_for(cfg);

  std::filesystem::create_directories(cfg.store_dir);
  Store store(cfg.articles_file());
  FetchOptions fetch_opts = detail::fetch_options_for(cfg, transport);
  ScanOptions scan_opts{cfg.best_effort, warn};

  PipelineSummary summary;
  std::set<std::string> unmapped;
  for (const auto& family : families) {
    auto refs = scan_window(family, cfg.window, transport, scan_opts);
    summary.scanned += refs.size();
    for (const auto& ref : refs) {
      auto normalized = normalize_url(ref.url);
      if (!normalized) continue;
      if (store.contains(sha256_hex(*normalized))) continue;
      ArticleRecord record;
      try {
        record = fetch_article(ref, transport, fetch_opts);
      } catch (const Error& e) {
        if (!cfg.best_effort)
          throw Error(e.code(), std::string(e.what()) + " (taxon=" +
                                    ref.taxon + " url=" + ref.url + ")");
        if (warn)
          warn("skipping " + ref.url + ": " + e.cli_line());
        continue;
      }
      detail::apply_country(record, countries, unmapped);
      auto [label, posterior] = classify(model, record.text, cfg.threshold);
      record.relevant = label == Label::relevant;
      record.relevance_posterior = posterior;
      if (*record.relevant) {
        record.sentiment =
            score_article(record.text, lexicon, shifters).article_score;
        ++summary.relevant;
        ++summary.scored;
      }
      if (store.append_record(record)) ++summary.fetched;
    }
  }
  detail::report_unmapped(unmapped, warn);
  return summary;
}

namespace detail {

// Fixture replay when the config names a fixture directory, live HTTP
// otherwise. The live transport exists only in binaries compiled with
// FAUNAWATCH_ENABLE_LIVE_TRANSPORT; everything else stays offline by
// construction.
inline std::unique_ptr<Transport> make_transport(const PipelineConfig& cfg) {
  if (cfg.fixtures_dir)
    return std::make_unique<FixtureTransport>(*cfg.fixtures_dir);
#if defined(FAUNAWATCH_ENABLE_LIVE_TRANSPORT)
  const char* cache = std::getenv("FAUNAWATCH_CACHE");
  std::optional<std::filesystem::path> cache_dir;
  if (cache && *cache) cache_dir = cache;
  return std::make_unique<LiveTransport>(cache_dir);
#else
  fail(errc::transport_error,
       "live transport not compiled into this binary; configure a fixtures "
       "directory");
#endif
}

}  // namespace detail

inline PipelineSummary run_pipeline(const PipelineConfig& cfg,
                                    const WarnSink& warn = {}) {
  auto transport = detail::make_transport(cfg);
  return run_pipeline(cfg, *transport, warn);
}

// ---------------------------------------------------------------------------
// Individually invokable stages backing the CLI subcommands. Each reads
// its inputs from the store directory and appends superseding record
// versions, so stages are re-runnable in any order that satisfies their
// inputs.

inline size_t stage_scan(const PipelineConfig& cfg, Transport& transport,
                         const WarnSink& warn = {}) {
  auto families = parse_family_config(read_file(cfg.families_path));
  std::filesystem::create_directories(cfg.store_dir);
  ScanOptions opts{cfg.best_effort, warn};
  std::string out;
  size_t count = 0;
  for (const auto& family : families) {
    for (const auto& ref : scan_window(family, cfg.window, transport, opts)) {
      out += ref_to_json(ref).dump();
      out += "\n";
      ++count;
    }
  }
  write_file(cfg.refs_file(), out);
  return count;
}

inline size_t stage_fetch(const PipelineConfig& cfg, Transport& transport,
                          const WarnSink& warn = {}) {
  if (!std::filesystem::exists(cfg.refs_file()))
    fail(errc::io_error,
         "no scan output at " + cfg.refs_file().string() + "; run scan first");
  Store store(cfg.articles_file());
  auto countries = detail::load_countries_for(cfg);
  FetchOptions opts = detail::fetch_options_for(cfg, transport);
  std::set<std::string> unmapped;
  size_t fetched = 0;
  detail::for_each_line(
      read_file(cfg.refs_file()), [&](std::string_view line, bool torn) {
        if (torn || line.empty()) return;
        auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) return;
        ArticleRef ref = ref_from_json(j);
        auto normalized = normalize_url(ref.url);
        if (!normalized) return;
        if (store.contains(sha256_hex(*normalized))) return;
        ArticleRecord record;
        try {
          record = fetch_article(ref, transport, opts);
        } catch (const Error& e) {
          if (!cfg.best_effort)
            throw Error(e.code(), std::string(e.what()) + " (taxon=" +
                                      ref.taxon + " url=" + ref.url + ")");
          if (warn) warn("skipping " + ref.url + ": " + e.cli_line());
          return;
        }
        detail::apply_country(record, countries, unmapped);
        if (store.append_record(record)) ++fetched;
      });
  detail::report_unmapped(unmapped, warn);
  return fetched;
}

// Classifies every record that has not been classified yet. Returns
// {classified, relevant}.
inline std::pair<size_t, size_t> stage_classify(const PipelineConfig& cfg) {
  BayesModel model = load_model(cfg.model_path);
  Store store(cfg.articles_file());
  size_t classified = 0, relevant = 0;
  for (auto& record : store.query()) {
    if (record.relevant) continue;
    auto [label, posterior] = classify(model, record.text, cfg.threshold);
    record.relevant = label == Label::relevant;
    record.relevance_posterior = posterior;
    store.append_version(record);
    ++classified;
    if (*record.relevant) ++relevant;
  }
  return {classified, relevant};
}

// Scores sentiment for relevant records that lack a score.
inline size_t stage_score(const PipelineConfig& cfg) {
  Lexicon lexicon = load_lexicon(read_file(cfg.lexicon_path));
  ShifterTable shifters =
      load_shifters(read_file(cfg.shifters_path), &lexicon);
  Store store(cfg.articles_file());
  size_t scored = 0;
  for (auto& record : store.query()) {
    if (!record.relevant || !*record.relevant || record.sentiment) continue;
    record.sentiment =
        score_article(record.text, lexicon, shifters).article_score;
    store.append_version(record);
    ++scored;
  }
  return scored;
}

inline void stage_report(const PipelineConfig& cfg,
                         const std::filesystem::path& out_dir) {
  auto families = parse_family_config(read_file(cfg.families_path));
  RangeTable ranges = parse_range_table(read_file(cfg.ranges_path));
  check_range_coverage(families, ranges);
  Store store(cfg.articles_file());
  RecordFilter filter;
  filter.window = cfg.window;
  filter.relevant_only = true;
  auto records = store.query(filter);

  std::vector<DailyStat> daily;
  std::vector<CountryStat> country;
  for (const auto& family : families) {
    auto rows = daily_mean_sentiment(records, family.taxon, cfg.window);
    daily.insert(daily.end(), rows.begin(), rows.end());
    auto crows = country_stats(records, family.taxon, &ranges);
    country.insert(country.end(), crows.begin(), crows.end());
  }
  std::filesystem::create_directories(out_dir);
  write_file(out_dir / "report_daily.csv", render_csv(daily));
  write_file(out_dir / "report_country.csv", render_csv(country));
}

inline void stage_chart(const PipelineConfig& cfg,
                        const std::filesystem::path& out_dir) {
  auto families = parse_family_config(read_file(cfg.families_path));
  Store store(cfg.articles_file());
  RecordFilter filter;
  filter.window = cfg.window;
  filter.relevant_only = true;
  auto records = store.query(filter);

  std::vector<DailySeries> counts, sentiments;
  for (const auto& family : families) {
    counts.push_back(
        {family.taxon, daily_counts(records, family.taxon, cfg.window)});
    sentiments.push_back(
        {family.taxon,
         daily_mean_sentiment(records, family.taxon, cfg.window)});
  }
  std::filesystem::create_directories(out_dir);
  write_file(out_dir / "chart_counts.svg",
             render_chart(counts, ChartMetric::count));
  write_file(out_dir / "chart_sentiment.svg",
             render_chart(sentiments, ChartMetric::sentiment));
}

// ---------------------------------------------------------------------------
// Labeling and training support.

// Interactive labeling over unlabeled store records: r/i label, s skips,
// q quits. Labels hit the file as each key is processed, so an
// interrupted session loses nothing.
inline size_t label_loop(const std::filesystem::path& articles_file,
                         const std::filesystem::path& label_file,
                         size_t count, std::istream& in, std::ostream& out,
                         const std::function<utc_seconds()>& clock =
                             system_clock_utc) {
  Store store(articles_file);
  auto labels = read_labels(label_file);
  std::vector<ArticleRecord> unlabeled;
  for (auto& rec : store.query())
    if (!labels.count(rec.id)) unlabeled.push_back(std::move(rec));
  if (unlabeled.empty())
    fail(errc::no_unlabeled, "no unlabeled records in " +
                                 articles_file.string());
  size_t labeled = 0;
  size_t presented = 0;
  for (const auto& rec : unlabeled) {
    if (presented >= count) break;
    ++presented;
    out << "--- [" << presented << "/" << std::min(count, unlabeled.size())
        << "] " << rec.taxon << " | " << rec.title << "\n";
    out << rec.text.substr(0, 600) << "\n";
    out << "[r]elevant [i]rrelevant [s]kip [q]uit> " << std::flush;
    char key = 0;
    bool quit = false;
    while (in.get(key)) {
      if (key == 'r' || key == 'i') {
        append_label(label_file, rec.id,
                     key == 'r' ? Label::relevant : Label::irrelevant,
                     clock());
        ++labeled;
        break;
      }
      if (key == 's') break;
      if (key == 'q') {
        quit = true;
        break;
      }
      // Ignore newlines and anything else.
    }
    if (quit || !in) break;
  }
  return labeled;
}

// Joins store texts with their labels; ids without a stored record are
// counted, not fatal.
inline std::vector<std::pair<std::string, Label>> build_labeled_corpus(
    const std::filesystem::path& articles_file,
    const std::filesystem::path& label_file, size_t* missing = nullptr) {
  Store store(articles_file);
  auto labels = read_labels(label_file);
  std::vector<std::pair<std::string, Label>> corpus;
  size_t missing_count = 0;
  std::set<std::string> stored;
  for (const auto& rec : store.query()) {
    stored.insert(rec.id);
    auto it = labels.find(rec.id);
    if (it != labels.end()) corpus.emplace_back(rec.text, it->second);
  }
  for (const auto& [id, label] : labels)
    if (!stored.count(id)) ++missing_count;
  if (missing) *missing = missing_count;
  return corpus;
}

// Train/holdout split. The seeded shuffle is printed by the CLI so a run
// can be reproduced; chronological keeps store order (records sort by
// seen_date) for before/after experiments.
inline std::pair<std::vector<std::pair<std::string, Label>>,
                 std::vector<std::pair<std::string, Label>>>
split_corpus(std::vector<std::pair<std::string, Label>> corpus,
             double holdout_fraction, uint64_t seed, bool chronological) {
  if (holdout_fraction < 0.0 || holdout_fraction >= 1.0)
    fail(errc::malformed_config, "holdout fraction must lie in [0,1)");
  if (!chronological) {
    std::mt19937_64 rng(seed);
    std::shuffle(corpus.begin(), corpus.end(), rng);
  }
  size_t n = corpus.size();
  size_t holdout = size_t(double(n) * holdout_fraction + 0.5);
  if (holdout >= n && n > 0) holdout = n - 1;
  size_t train_n = n - holdout;
  std::vector<std::pair<std::string, Label>> train_set(
      corpus.begin(), corpus.begin() + ptrdiff_t(train_n));
  std::vector<std::pair<std::string, Label>> test_set(
      corpus.begin() + ptrdiff_t(train_n), corpus.end());
  return {std::move(train_set), std::move(test_set)};
}

}  // namespace faunawatch
