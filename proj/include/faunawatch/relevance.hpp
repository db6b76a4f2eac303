#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "faunawatch/error.hpp"
#include "faunawatch/io.hpp"

namespace faunawatch {

enum class Label { relevant = 0, irrelevant = 1 };

inline const char* label_name(Label l) {
  return l == Label::relevant ? "relevant" : "irrelevant";
}

inline std::optional<Label> parse_label(std::string_view s) {
  if (s == "relevant") return Label::relevant;
  if (s == "irrelevant") return Label::irrelevant;
  return {};
}

// A multiset of normalized tokens; multiplicity matters, order does not.
using TokenBag = std::vector<std::string>;

// Lowercase, split on any non-alphanumeric byte, drop tokens shorter than
// two characters and pure numbers. Stopwords stay in: smoothed Bayes
// tolerates them and dropping them would add a language-specific list.
// keep_single_char is for the sentiment tokenizer, which must not lose
// short carriers around valence shifters.
inline TokenBag tokenize(std::string_view text, bool keep_single_char = false) {
  TokenBag bag;
  std::string cur;
  auto flush = [&] {
    if (cur.empty()) return;
    bool all_digits =
        std::all_of(cur.begin(), cur.end(),
                    [](unsigned char c) { return std::isdigit(c); });
    size_t min_len = keep_single_char ? 1 : 2;
    if (cur.size() >= min_len && !all_digits) bag.push_back(cur);
    cur.clear();
  };
  for (unsigned char c : text) {
    if (std::isalnum(c))
      cur.push_back(char(std::tolower(c)));
    else
      flush();
  }
  flush();
  return bag;
}

// Multinomial naive Bayes counts with add-one smoothing applied at
// query time. Plain counts keep the serialized model diffable.
struct BayesModel {
  std::array<size_t, 2> class_doc_counts{};  // indexed by Label
  std::array<std::map<std::string, size_t>, 2> token_counts;
  std::array<size_t, 2> class_token_totals{};
  size_t vocabulary_size = 0;

  size_t docs(Label l) const { return class_doc_counts[size_t(l)]; }
  size_t total(Label l) const { return class_token_totals[size_t(l)]; }
  size_t count(Label l, const std::string& token) const {
    const auto& m = token_counts[size_t(l)];
    auto it = m.find(token);
    return it == m.end() ? 0 : it->second;
  }
  bool seen_anywhere(const std::string& token) const {
    return token_counts[0].count(token) > 0 || token_counts[1].count(token) > 0;
  }
};

inline BayesModel train(
    const std::vector<std::pair<std::string, Label>>& labeled) {
  BayesModel model;
  for (const auto& [text, label] : labeled) {
    size_t c = size_t(label);
    model.class_doc_counts[c] += 1;
    for (const auto& token : tokenize(text)) {
      model.token_counts[c][token] += 1;
      model.class_token_totals[c] += 1;
    }
  }
  if (model.class_doc_counts[0] == 0 || model.class_doc_counts[1] == 0)
    fail(errc::missing_class,
         "training set must contain at least one document per class");
  std::set<std::string> vocab;
  for (const auto& m : model.token_counts)
    for (const auto& [token, n] : m) vocab.insert(token);
  model.vocabulary_size = vocab.size();
  return model;
}

// P(relevant | bag) and P(irrelevant | bag), exp-normalized from log-space
// scores. Tokens unseen in both classes carry no evidence and are skipped,
// so fetch-time boilerplate noise cannot drag the posterior to the prior.
inline std::pair<double, double> posteriors(const BayesModel& model,
                                            const TokenBag& bag) {
  double v = double(model.vocabulary_size);
  double total_docs = double(model.docs(Label::relevant) +
                             model.docs(Label::irrelevant));
  std::array<double, 2> score{};
  for (size_t c = 0; c < 2; ++c)
    score[c] = std::log(double(model.class_doc_counts[c]) / total_docs);
  for (const auto& token : bag) {
    if (!model.seen_anywhere(token)) continue;
    for (size_t c = 0; c < 2; ++c) {
      double num = double(model.count(Label(c), token)) + 1.0;
      double den = double(model.class_token_totals[c]) + v;
      score[c] += std::log(num / den);
    }
  }
  double hi = std::max(score[0], score[1]);
  double e0 = std::exp(score[0] - hi);
  double e1 = std::exp(score[1] - hi);
  double z = e0 + e1;
  return {e0 / z, e1 / z};
}

inline double posterior_relevant(const BayesModel& model,
                                 const TokenBag& bag) {
  return posteriors(model, bag).first;
}

inline std::pair<Label, double> classify(const BayesModel& model,
                                         std::string_view text,
                                         double threshold = 0.5) {
  double p = posterior_relevant(model, tokenize(text));
  return {p >= threshold ? Label::relevant : Label::irrelevant, p};
}

struct EvalReport {
  size_t true_positives = 0;
  size_t false_positives = 0;
  size_t false_negatives = 0;
  size_t true_negatives = 0;

  std::optional<double> precision() const {
    size_t den = true_positives + false_positives;
    if (den == 0) return {};
    return double(true_positives) / double(den);
  }
  std::optional<double> recall() const {
    size_t den = true_positives + false_negatives;
    if (den == 0) return {};
    return double(true_positives) / double(den);
  }
};

inline EvalReport evaluate(
    const BayesModel& model,
    const std::vector<std::pair<std::string, Label>>& labeled_test,
    double threshold = 0.5) {
  EvalReport report;
  for (const auto& [text, truth] : labeled_test) {
    Label predicted = classify(model, text, threshold).first;
    if (truth == Label::relevant)
      (predicted == Label::relevant ? report.true_positives
                                    : report.false_negatives)++;
    else
      (predicted == Label::relevant ? report.false_positives
                                    : report.true_negatives)++;
  }
  return report;
}

// `precision=... recall=... tp=... fp=... fn=... tn=...`; absent metrics
// print as na.
inline std::string format_eval_report(const EvalReport& r) {
  auto fmt = [](std::optional<double> v) {
    if (!v) return std::string("na");
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", *v);
    return std::string(buf);
  };
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "precision=%s recall=%s tp=%zu fp=%zu fn=%zu tn=%zu",
                fmt(r.precision()).c_str(), fmt(r.recall()).c_str(),
                r.true_positives, r.false_positives, r.false_negatives,
                r.true_negatives);
  return buf;
}

// Model file: plain JSON counts, token maps sorted by token, so models
// diff cleanly and identical training data yields identical bytes.
inline std::string serialize_model(const BayesModel& model) {
  nlohmann::json doc;
  for (Label l : {Label::relevant, Label::irrelevant}) {
    const char* name = label_name(l);
    doc["class_doc_counts"][name] = model.docs(l);
    doc["class_token_totals"][name] = model.total(l);
    doc["token_counts"][name] = model.token_counts[size_t(l)];
  }
  doc["vocabulary_size"] = model.vocabulary_size;
  return doc.dump(2) + "\n";
}

inline BayesModel parse_model(std::string_view text) {
  auto doc = nlohmann::json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object())
    fail(errc::malformed_config, "model file: not a JSON object");
  BayesModel model;
  try {
    for (Label l : {Label::relevant, Label::irrelevant}) {
      const char* name = label_name(l);
      size_t c = size_t(l);
      model.class_doc_counts[c] = doc.at("class_doc_counts").at(name);
      model.class_token_totals[c] = doc.at("class_token_totals").at(name);
      model.token_counts[c] =
          doc.at("token_counts").at(name).get<std::map<std::string, size_t>>();
    }
    model.vocabulary_size = doc.at("vocabulary_size");
  } catch (const nlohmann::json::exception& e) {
    fail(errc::malformed_config, std::string("model file: ") + e.what());
  }
  for (size_t c = 0; c < 2; ++c) {
    size_t sum = 0;
    for (const auto& [token, n] : model.token_counts[c]) sum += n;
    if (sum != model.class_token_totals[c])
      fail(errc::malformed_config,
           "model file: class_token_totals disagree with token_counts");
    if (model.vocabulary_size < model.token_counts[c].size())
      fail(errc::malformed_config,
           "model file: vocabulary_size smaller than a class vocabulary");
  }
  return model;
}

inline void save_model(const BayesModel& model,
                       const std::filesystem::path& path) {
  write_file(path, serialize_model(model));
}

inline BayesModel load_model(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path))
    fail(errc::missing_model, "model file not found: " + path.string());
  return parse_model(read_file(path));
}

}  // namespace faunawatch
