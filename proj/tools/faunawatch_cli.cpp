// faunawatch: monitor online news coverage of wildlife taxa.
//
// Subcommands mirror the pipeline stages (scan, fetch, label, train, eval,
// classify, score, report, chart); `run` composes the whole chain. Every
// network-touching subcommand accepts --fixtures DIR to replay recorded
// responses instead of hitting the live index.

#define FAUNAWATCH_ENABLE_LIVE_TRANSPORT

#include <CLI11.hpp>

#include <termios.h>
#include <unistd.h>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "faunawatch/faunawatch.hpp"

namespace fw = faunawatch;

namespace {

// Unbuffered keys for the labeling loop when stdin is a terminal, so a
// single keypress acts without Enter. Piped input is left untouched.
class RawTerminal {
 public:
  RawTerminal() {
    if (!isatty(STDIN_FILENO)) return;
    if (tcgetattr(STDIN_FILENO, &saved_) != 0) return;
    termios raw = saved_;
    raw.c_lflag &= ~tcflag_t(ICANON | ECHO);
    raw.c_cc[VMIN] = 1;
    raw.c_cc[VTIME] = 0;
    active_ = tcsetattr(STDIN_FILENO, TCSANOW, &raw) == 0;
  }
  ~RawTerminal() {
    if (active_) tcsetattr(STDIN_FILENO, TCSANOW, &saved_);
  }

 private:
  termios saved_{};
  bool active_ = false;
};

struct CommonOpts {
  std::string config_path;
  std::string fixtures;
  std::string clock;
  double threshold = -1;
  bool best_effort = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_threshold = true) {
  cmd->add_option("--config", opts.config_path, "pipeline config JSON")
      ->required();
  cmd->add_option("--fixtures", opts.fixtures,
                  "replay fixtures from DIR instead of live HTTP");
  cmd->add_option("--clock", opts.clock,
                  "fixed UTC timestamp for fetched_at (reproducible runs)");
  cmd->add_flag("--best-effort", opts.best_effort,
                "log and skip failing queries/fetches instead of aborting");
  if (with_threshold)
    cmd->add_option("--threshold", opts.threshold,
                    "relevance decision threshold, default from config");
}

fw::PipelineConfig resolve_config(const CommonOpts& opts) {
  fw::PipelineConfig cfg = fw::load_pipeline_config(opts.config_path);
  if (!opts.fixtures.empty()) cfg.fixtures_dir = opts.fixtures;
  if (!opts.clock.empty()) cfg.fixed_clock = fw::parse_iso8601(opts.clock);
  if (opts.threshold >= 0) {
    if (!(opts.threshold > 0.0 && opts.threshold < 1.0))
      fw::fail(fw::errc::malformed_config, "--threshold must lie in (0,1)");
    cfg.threshold = opts.threshold;
  }
  if (opts.best_effort) cfg.best_effort = true;
  return cfg;
}

void warn_to_stderr(const std::string& msg) {
  std::cerr << "warn: " << msg << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"faunawatch: wildlife news saliency and sentiment monitor"};
  app.require_subcommand(1);

  CommonOpts run_opts, scan_opts, fetch_opts, classify_opts, score_opts,
      report_opts, chart_opts;
  std::string out_dir = ".";

  auto* run_cmd = app.add_subcommand("run", "scan, fetch, classify and score");
  add_common(run_cmd, run_opts);

  auto* scan_cmd =
      app.add_subcommand("scan", "query the index, write refs.ndjson");
  add_common(scan_cmd, scan_opts, false);

  auto* fetch_cmd = app.add_subcommand(
      "fetch", "download scanned refs into the article store");
  add_common(fetch_cmd, fetch_opts, false);

  auto* classify_cmd =
      app.add_subcommand("classify", "apply the relevance model to the store");
  add_common(classify_cmd, classify_opts);

  auto* score_cmd =
      app.add_subcommand("score", "sentiment-score relevant records");
  add_common(score_cmd, score_opts, false);

  auto* report_cmd =
      app.add_subcommand("report", "emit report_daily.csv and report_country.csv");
  add_common(report_cmd, report_opts, false);
  report_cmd->add_option("--out", out_dir, "output directory (default .)");

  auto* chart_cmd =
      app.add_subcommand("chart", "emit chart_counts.svg and chart_sentiment.svg");
  add_common(chart_cmd, chart_opts, false);
  chart_cmd->add_option("--out", out_dir, "output directory (default .)");

  // label
  std::string label_store, label_file;
  std::size_t label_count = 20;
  auto* label_cmd =
      app.add_subcommand("label", "interactively label unlabeled articles");
  label_cmd->add_option("--store", label_store, "store directory")->required();
  label_cmd->add_option("--labels", label_file,
                        "label file (default <store>/labels.ndjson)");
  label_cmd->add_option("--count", label_count,
                        "maximum articles to present (default 20)");

  // train
  std::string train_store, train_labels, train_out = "model.json";
  double holdout = 0.25;
  std::uint64_t seed = 42;
  bool chronological = false;
  auto* train_cmd =
      app.add_subcommand("train", "train the relevance model from labels");
  train_cmd->add_option("--store", train_store, "store directory")->required();
  train_cmd->add_option("--labels", train_labels, "label NDJSON file")
      ->required();
  train_cmd->add_option("--out", train_out, "model output path");
  train_cmd->add_option("--holdout", holdout,
                        "fraction held out for validation (default 0.25)");
  train_cmd->add_option("--seed", seed, "shuffle seed (default 42)");
  train_cmd->add_flag("--chronological", chronological,
                      "split by store order instead of shuffling");

  // eval
  std::string eval_store, eval_labels, eval_model;
  double eval_threshold = 0.5;
  auto* eval_cmd =
      app.add_subcommand("eval", "evaluate a model against labeled articles");
  eval_cmd->add_option("--model", eval_model, "model JSON file")->required();
  eval_cmd->add_option("--labels", eval_labels, "label NDJSON file")
      ->required();
  eval_cmd->add_option("--store", eval_store, "store directory")->required();
  eval_cmd->add_option("--threshold", eval_threshold,
                       "decision threshold (default 0.5)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      auto cfg = resolve_config(run_opts);
      auto summary = fw::run_pipeline(cfg, warn_to_stderr);
      std::cout << "scanned=" << summary.scanned
                << " fetched=" << summary.fetched
                << " relevant=" << summary.relevant
                << " scored=" << summary.scored << "\n";
    } else if (*scan_cmd) {
      auto cfg = resolve_config(scan_opts);
      auto transport = fw::detail::make_transport(cfg);
      size_t scanned = fw::stage_scan(cfg, *transport, warn_to_stderr);
      std::cout << "scanned=" << scanned << "\n";
    } else if (*fetch_cmd) {
      auto cfg = resolve_config(fetch_opts);
      auto transport = fw::detail::make_transport(cfg);
      size_t fetched = fw::stage_fetch(cfg, *transport, warn_to_stderr);
      std::cout << "fetched=" << fetched << "\n";
    } else if (*classify_cmd) {
      auto cfg = resolve_config(classify_opts);
      auto [classified, relevant] = fw::stage_classify(cfg);
      std::cout << "classified=" << classified << " relevant=" << relevant
                << "\n";
    } else if (*score_cmd) {
      auto cfg = resolve_config(score_opts);
      size_t scored = fw::stage_score(cfg);
      std::cout << "scored=" << scored << "\n";
    } else if (*report_cmd) {
      auto cfg = resolve_config(report_opts);
      fw::stage_report(cfg, out_dir);
      std::cout << "wrote report_daily.csv report_country.csv\n";
    } else if (*chart_cmd) {
      auto cfg = resolve_config(chart_opts);
      fw::stage_chart(cfg, out_dir);
      std::cout << "wrote chart_counts.svg chart_sentiment.svg\n";
    } else if (*label_cmd) {
      std::filesystem::path store_dir(label_store);
      std::filesystem::path labels = label_file.empty()
                                         ? store_dir / "labels.ndjson"
                                         : std::filesystem::path(label_file);
      RawTerminal raw;
      size_t n = fw::label_loop(store_dir / "articles.ndjson", labels,
                                label_count, std::cin, std::cout);
      std::cout << "labeled=" << n << "\n";
    } else if (*train_cmd) {
      std::filesystem::path store_dir(train_store);
      size_t missing = 0;
      auto corpus = fw::build_labeled_corpus(store_dir / "articles.ndjson",
                                             train_labels, &missing);
      if (missing > 0)
        std::cerr << "warn: " << missing
                  << " labeled ids have no stored record\n";
      auto [train_set, test_set] =
          fw::split_corpus(corpus, holdout, seed, chronological);
      auto model = fw::train(train_set);
      fw::save_model(model, train_out);
      std::cout << "trained on " << train_set.size() << " docs (seed=" << seed
                << (chronological ? ", chronological" : ", shuffled")
                << "), holdout " << test_set.size() << "\n";
      if (!test_set.empty())
        std::cout << fw::format_eval_report(fw::evaluate(model, test_set))
                  << "\n";
      std::cout << "model written to " << train_out << "\n";
    } else if (*eval_cmd) {
      auto model = fw::load_model(eval_model);
      std::filesystem::path store_dir(eval_store);
      auto corpus = fw::build_labeled_corpus(store_dir / "articles.ndjson",
                                             eval_labels);
      if (corpus.empty())
        fw::fail(fw::errc::no_unlabeled,
                 "no labeled articles found to evaluate against");
      std::cout << fw::format_eval_report(
                       fw::evaluate(model, corpus, eval_threshold))
                << "\n";
    }
  } catch (const fw::Error& e) {
    std::cerr << e.cli_line() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error:Internal: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
