// Acceptance suite: one pass/fail line per criterion. The end-to-end
// criteria shell out to the real CLI binary against generated fixture
// trees; everything runs offline.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "faunawatch/faunawatch.hpp"
#include "support/test_support.hpp"

namespace fw = faunawatch;
using fwtest::TempDir;

#ifndef FAUNAWATCH_CLI_PATH
#error "FAUNAWATCH_CLI_PATH must name the built CLI binary"
#endif

namespace {

int g_failures = 0;

struct CheckFailure {
  std::string message;
};

void require(bool ok, const std::string& why) {
  if (!ok) throw CheckFailure{why};
}

void criterion(const std::string& name, double time_budget_s,
               const std::function<void()>& body) {
  auto start = std::chrono::steady_clock::now();
  std::string verdict = "PASS";
  std::string detail;
  try {
    body();
  } catch (const CheckFailure& f) {
    verdict = "FAIL";
    detail = f.message;
  } catch (const std::exception& e) {
    verdict = "FAIL";
    detail = e.what();
  }
  double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  if (verdict == "PASS" && time_budget_s > 0 && elapsed > time_budget_s) {
    verdict = "FAIL";
    detail = "exceeded time budget (" + std::to_string(elapsed) + "s > " +
             std::to_string(time_budget_s) + "s)";
  }
  std::printf("%s %s (%.2fs)%s%s\n", verdict.c_str(), name.c_str(), elapsed,
              detail.empty() ? "" : ": ", detail.c_str());
  if (verdict == "FAIL") ++g_failures;
}

// Runs the CLI, captures stdout, requires exit 0.
std::string run_cli(const std::string& args, const TempDir& dir,
                    const std::string& tag) {
  auto out_path = dir.path() / (tag + ".out");
  auto err_path = dir.path() / (tag + ".err");
  std::string cmd = std::string(FAUNAWATCH_CLI_PATH) + " " + args + " > " +
                    out_path.string() + " 2> " + err_path.string();
  int rc = std::system(cmd.c_str());
  require(rc == 0, "CLI exited " + std::to_string(rc) + " for: " + args +
                       " | stderr: " + fw::read_file(err_path));
  return fw::read_file(out_path);
}

size_t parse_summary_field(const std::string& out, const std::string& key) {
  auto pos = out.find(key + "=");
  require(pos != std::string::npos, "missing " + key + " in: " + out);
  return size_t(std::strtoull(out.c_str() + pos + key.size() + 1, nullptr, 10));
}

// --------------------------------------------------------------------------

void criterion_bayes_oracle() {
  auto model = fw::train(fwtest::minicorpus());
  auto bag = fw::tokenize("ivory trafficking arrest");
  double p = fw::posterior_relevant(model, bag);
  require(std::abs(p - 0.8667) <= 1e-4,
          "posterior " + std::to_string(p) + " != 0.8667 +- 1e-4");
  require(std::abs(p - fwtest::oracle_posterior_relevant(model, bag)) <= 1e-9,
          "log-space posterior disagrees with the rational oracle");

  // Full sweep: every document of length 0..3 over the 19-token vocabulary.
  std::vector<std::string> vocab;
  for (const auto& counts : model.token_counts)
    for (const auto& [token, n] : counts) vocab.push_back(token);
  std::sort(vocab.begin(), vocab.end());
  vocab.erase(std::unique(vocab.begin(), vocab.end()), vocab.end());
  require(vocab.size() == 19, "expected the 19-token minicorpus vocabulary");

  size_t checked = 0;
  fw::TokenBag doc;
  std::function<void(size_t)> sweep = [&](size_t remaining) {
    double impl = fw::posterior_relevant(model, doc);
    double oracle = fwtest::oracle_posterior_relevant(model, doc);
    require(std::abs(impl - oracle) <= 1e-9,
            "sweep mismatch at a " + std::to_string(doc.size()) +
                "-token document");
    ++checked;
    if (remaining == 0) return;
    for (const auto& token : vocab) {
      doc.push_back(token);
      sweep(remaining - 1);
      doc.pop_back();
    }
  };
  sweep(3);
  require(checked == 1 + 19 + 19 * 19 + 19 * 19 * 19,
          "sweep covered " + std::to_string(checked) + " documents");
}

void criterion_synthetic_classifier() {
  auto docs = fwtest::make_synthetic_corpus(200, 200, 20240506);
  std::vector<std::pair<std::string, fw::Label>> corpus;
  for (const auto& d : docs) corpus.emplace_back(d.text, d.label);
  std::vector<std::pair<std::string, fw::Label>> train_set(
      corpus.begin(), corpus.begin() + 300);
  std::vector<std::pair<std::string, fw::Label>> test_set(corpus.begin() + 300,
                                                          corpus.end());
  auto model = fw::train(train_set);
  auto report = fw::evaluate(model, test_set);
  require(report.precision().has_value() && report.recall().has_value(),
          "degenerate confusion matrix");
  require(*report.precision() >= 0.9,
          "precision " + std::to_string(*report.precision()) + " < 0.9");
  require(*report.recall() >= 0.9,
          "recall " + std::to_string(*report.recall()) + " < 0.9");
}

void criterion_eval_arithmetic() {
  TempDir dir("accept_eval");
  auto store_dir = dir.path() / "store";
  std::filesystem::create_directories(store_dir);
  fw::Store store(store_dir / "articles.ndjson");
  auto labels = store_dir / "labels.ndjson";
  auto clock = fw::parse_iso8601("2019-05-08T00:00:00Z");

  auto add = [&](int i, const std::string& text, fw::Label label) {
    fw::ArticleRecord rec;
    std::string url = "https://eval.example.com/" + std::to_string(i);
    rec.id = fw::sha256_hex(*fw::normalize_url(url));
    rec.taxon = "tiger";
    rec.url = url;
    rec.fetched_url = url;
    rec.seen_date = clock;
    rec.source_country_raw = "India";
    rec.language = "English";
    rec.title = "t";
    rec.text = text;
    rec.fetched_at = clock;
    store.append_record(rec);
    fw::append_label(labels, rec.id, label, clock);
  };
  int i = 0;
  for (int k = 0; k < 10; ++k)
    add(i++, "ivory trafficking arrest", fw::Label::relevant);  // TP
  for (int k = 0; k < 3; ++k)
    add(i++, "ivory trafficking arrest", fw::Label::irrelevant);  // FP
  add(i++, "football team season", fw::Label::relevant);  // FN
  for (int k = 0; k < 20; ++k)
    add(i++, "football team season", fw::Label::irrelevant);  // TN

  auto model_path = dir.path() / "model.json";
  fw::save_model(fw::train(fwtest::minicorpus()), model_path);

  auto out = run_cli("eval --model " + model_path.string() + " --labels " +
                         labels.string() + " --store " + store_dir.string(),
                     dir, "eval");
  require(out.find("precision=0.769231") != std::string::npos,
          "missing exact precision in: " + out);
  require(out.find("recall=0.909091") != std::string::npos,
          "missing exact recall in: " + out);
  require(out.find("tp=10 fp=3 fn=1 tn=20") != std::string::npos,
          "wrong confusion counts in: " + out);
}

void criterion_sentiment_suite() {
  auto lex = fwtest::minilex();
  auto shift = fwtest::minishifters();
  auto score = [&](std::vector<std::string> tokens) {
    return fw::score_sentence(tokens, lex, shift);
  };
  for (const auto& [w, p] : lex.polarities) {
    double base = score({w});
    require(std::signbit(score({"not", w})) != std::signbit(base),
            "no sign flip under not for " + w);
    require(std::signbit(score({"not", "not", w})) == std::signbit(base),
            "double negation broke for " + w);
    require(std::abs(score({"very", w})) > std::abs(score({"pad", w})),
            "amplifier not dominant for " + w);
  }
  auto neutral =
      fw::score_article("The committee met on Tuesday.", lex, shift);
  require(neutral.article_score == 0.0, "neutral text scored nonzero");

  auto result =
      fw::score_article("Good news. Not good for poachers.", lex, shift);
  require(std::abs(result.article_score - 0.1036) <= 1e-4,
          "article score " + std::to_string(result.article_score) +
              " != 0.1036 +- 1e-4");
}

// Shared state between the end-to-end criteria: the synthetic-trained
// model from criterion 2's protocol.
fw::BayesModel synthetic_model() {
  auto docs = fwtest::make_synthetic_corpus(200, 200, 20240506);
  std::vector<std::pair<std::string, fw::Label>> train_set;
  for (size_t i = 0; i < 300; ++i)
    train_set.emplace_back(docs[i].text, docs[i].label);
  return fw::train(train_set);
}

void criterion_filtering_ratio() {
  TempDir dir("accept_ratio");
  auto docs = fwtest::make_synthetic_corpus(31, 69, 31337);
  auto fixture =
      fwtest::write_pipeline_fixture(dir.path(), docs, synthetic_model());
  auto out = run_cli("run --config " + fixture.config_path.string(), dir,
                     "run");
  require(parse_summary_field(out, "scanned") == 100, "expected 100 scanned");
  require(parse_summary_field(out, "fetched") == 100, "expected 100 fetched");
  size_t relevant = parse_summary_field(out, "relevant");
  require(relevant + 5 >= 31 && relevant <= 36,
          "relevant " + std::to_string(relevant) + " outside 31 +- 5");

  fw::Store store(fixture.store_dir / "articles.ndjson");
  fw::RecordFilter filter;
  filter.relevant_only = true;
  require(store.query(filter).size() == relevant,
          "summary disagrees with the store");
}

void criterion_aggregation_conservation() {
  std::mt19937_64 rng(990);
  std::uniform_int_distribution<int> day(1, 9), val(-100, 100), country(0, 5);
  const char* isos[] = {"IN", "ZW", "GB", "US", "FR", "JM"};
  std::vector<fw::ArticleRecord> records;
  auto window = fw::make_window(fw::parse_iso8601("2019-05-01T00:00:00Z"),
                                fw::parse_iso8601("2019-05-11T00:00:00Z"));
  for (int i = 0; i < 1000; ++i) {
    fw::ArticleRecord r;
    std::string url = "https://agg.example.com/" + std::to_string(i);
    r.id = fw::sha256_hex(*fw::normalize_url(url));
    r.taxon = "tiger";
    r.url = url;
    r.fetched_url = url;
    r.seen_date = fw::parse_iso8601("2019-05-0" + std::to_string(day(rng))) +
                  std::chrono::hours(i % 24);
    r.source_country_raw = isos[country(rng)];
    r.source_country_iso = isos[country(rng)];
    r.language = "English";
    r.title = "t";
    r.text = "text";
    r.fetched_at = r.seen_date;
    r.relevant = true;
    r.relevance_posterior = 0.9;
    r.sentiment = double(val(rng)) / 100.0;
    records.push_back(std::move(r));
  }

  auto daily = fw::daily_counts(records, "tiger", window);
  size_t total = 0;
  for (const auto& d : daily) total += d.article_count;
  require(total == records.size(), "daily counts lost articles");

  auto means = fw::daily_mean_sentiment(records, "tiger", window);
  for (const auto& d : means) {
    double sum = 0;
    size_t n = 0;
    for (const auto& r : records)
      if (fw::day_of(r.seen_date) == d.date) {
        sum += *r.sentiment;
        ++n;
      }
    if (n == 0) {
      require(!d.mean_sentiment, "mean present on an empty day");
    } else {
      require(std::abs(*d.mean_sentiment - sum / double(n)) <= 1e-12,
              "daily mean deviates from brute force");
    }
  }

  fw::RangeTable ranges;
  ranges.entries["tiger"] = {"IN", "ZW"};
  auto stats = fw::country_stats(records, "tiger", &ranges);
  auto [range_mean, nonrange_mean] = fw::range_split(stats);
  require(range_mean && nonrange_mean, "one-sided split unexpectedly");
  size_t range_n = 0, nonrange_n = 0;
  for (const auto& s : stats)
    (*s.is_range ? range_n : nonrange_n) += s.article_count;
  double overall = 0;
  for (const auto& r : records) overall += *r.sentiment;
  overall /= double(records.size());
  double recomposed = (*range_mean * double(range_n) +
                       *nonrange_mean * double(nonrange_n)) /
                      double(range_n + nonrange_n);
  require(std::abs(recomposed - overall) <= 1e-12,
          "range/non-range means do not recompose");
}

void criterion_determinism() {
  auto docs = fwtest::make_synthetic_corpus(31, 69, 777);
  auto model = synthetic_model();

  auto run_once = [&](const TempDir& dir, const std::string& tag) {
    auto fixture = fwtest::write_pipeline_fixture(dir.path(), docs, model);
    run_cli("run --config " + fixture.config_path.string(), dir, tag + "_run");
    auto out_dir = dir.path() / "out";
    run_cli("report --config " + fixture.config_path.string() + " --out " +
                out_dir.string(),
            dir, tag + "_report");
    run_cli("chart --config " + fixture.config_path.string() + " --out " +
                out_dir.string(),
            dir, tag + "_chart");
    std::vector<std::string> outputs;
    outputs.push_back(fw::read_file(fixture.store_dir / "articles.ndjson"));
    outputs.push_back(fw::read_file(out_dir / "report_daily.csv"));
    outputs.push_back(fw::read_file(out_dir / "report_country.csv"));
    outputs.push_back(fw::read_file(out_dir / "chart_counts.svg"));
    outputs.push_back(fw::read_file(out_dir / "chart_sentiment.svg"));
    return outputs;
  };

  TempDir a("accept_det_a"), b("accept_det_b");
  auto first = run_once(a, "a");
  auto second = run_once(b, "b");
  static const char* names[] = {"articles.ndjson", "report_daily.csv",
                                "report_country.csv", "chart_counts.svg",
                                "chart_sentiment.svg"};
  for (size_t i = 0; i < first.size(); ++i)
    require(first[i] == second[i],
            std::string(names[i]) + " differs between identical runs");
  require(!first[0].empty(), "empty ndjson output");
}

void criterion_dedup_idempotence() {
  TempDir dir("accept_dedup");
  auto docs = fwtest::make_synthetic_corpus(10, 10, 4242);
  auto fixture = fwtest::write_pipeline_fixture(dir.path(), docs,
                                                synthetic_model());
  auto first = run_cli("run --config " + fixture.config_path.string(), dir,
                       "first");
  require(parse_summary_field(first, "fetched") == 20, "first pass fetched");
  auto articles = fixture.store_dir / "articles.ndjson";
  auto before = fw::read_file(articles);

  auto second = run_cli("run --config " + fixture.config_path.string(), dir,
                        "second");
  require(parse_summary_field(second, "fetched") == 0,
          "second pass appended records");
  require(fw::read_file(articles) == before,
          "store bytes changed on the second pass");
}

}  // namespace

int main() {
  criterion("1-bayes-oracle-equivalence", 1.0, criterion_bayes_oracle);
  criterion("2-synthetic-classifier-quality", 5.0,
            criterion_synthetic_classifier);
  criterion("3-precision-recall-arithmetic", 0, criterion_eval_arithmetic);
  criterion("4-sentiment-shifter-suite", 0, criterion_sentiment_suite);
  criterion("5-filtering-ratio-fixture", 10.0, criterion_filtering_ratio);
  criterion("6-aggregation-conservation", 0,
            criterion_aggregation_conservation);
  criterion("7-offline-determinism", 0, criterion_determinism);
  criterion("8-dedup-idempotence", 0, criterion_dedup_idempotence);
  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all acceptance criteria passed\n");
  return 0;
}
