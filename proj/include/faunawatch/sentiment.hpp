#pragma once

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "faunawatch/domain.hpp"
#include "faunawatch/error.hpp"
#include "faunawatch/relevance.hpp"

namespace faunawatch {

struct Lexicon {
  // token -> signed polarity, typically in [-1, 1]. Zero entries are
  // never stored; loaders drop them.
  std::unordered_map<std::string, double> polarities;

  double polarity(const std::string& token) const {
    auto it = polarities.find(token);
    return it == polarities.end() ? 0.0 : it->second;
  }
};

struct ShifterTable {
  std::unordered_set<std::string> negators;
  std::unordered_set<std::string> amplifiers;
  std::unordered_set<std::string> de_amplifiers;
};

// Shifter context window and intensity constants. The defaults follow the
// common augmented-dictionary scheme: four tokens of left context, two of
// right, 0.8 per amplifier step, and a 0.2 intensity floor so stacked
// de-amplifiers weaken but never erase or flip a term.
struct ScoreParams {
  int before = 4;
  int after = 2;
  double amplifier_weight = 0.8;
  double intensity_floor = 0.2;
};

struct SentimentResult {
  double article_score = 0.0;
  std::vector<double> sentence_scores;
  size_t polarized_token_count = 0;
};

// Sentences end at '.', '!' or '?' followed by whitespace or end of text.
// Abbreviations ("Dr.") therefore split; accepted, the averaging step is
// robust to it. Tokens keep single-character survivors so shifter
// neighborhoods are not distorted by dropped fragments.
inline std::vector<std::vector<std::string>> segment_sentences(
    std::string_view text) {
  std::vector<std::vector<std::string>> out;
  size_t start = 0;
  auto emit = [&](size_t end) {
    auto tokens = tokenize(text.substr(start, end - start),
                           /*keep_single_char=*/true);
    if (!tokens.empty()) out.push_back(std::move(tokens));
  };
  for (size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if ((c == '.' || c == '!' || c == '?') &&
        (i + 1 == text.size() ||
         std::isspace(static_cast<unsigned char>(text[i + 1])))) {
      emit(i);
      start = i + 1;
    }
  }
  if (start < text.size()) emit(text.size());
  return out;
}

// Each polarized token contributes p * (-1)^N * max(floor, 1 + w*(A - D)),
// where N, A, D count negators, amplifiers and de-amplifiers in the
// surrounding context window. The sentence score is the contribution sum
// over sqrt(L), L = sentence token count.
inline double score_sentence(std::span<const std::string> tokens,
                             const Lexicon& lexicon,
                             const ShifterTable& shifters,
                             const ScoreParams& params = {}) {
  if (tokens.empty()) return 0.0;
  double sum = 0.0;
  auto n = ptrdiff_t(tokens.size());
  for (ptrdiff_t i = 0; i < n; ++i) {
    double p = lexicon.polarity(tokens[size_t(i)]);
    if (p == 0.0) continue;
    int negs = 0, amps = 0, deamps = 0;
    ptrdiff_t lo = std::max<ptrdiff_t>(0, i - params.before);
    ptrdiff_t hi = std::min<ptrdiff_t>(n - 1, i + params.after);
    for (ptrdiff_t j = lo; j <= hi; ++j) {
      if (j == i) continue;
      const std::string& t = tokens[size_t(j)];
      if (shifters.negators.count(t)) ++negs;
      else if (shifters.amplifiers.count(t)) ++amps;
      else if (shifters.de_amplifiers.count(t)) ++deamps;
    }
    double intensity = std::max(
        params.intensity_floor,
        1.0 + params.amplifier_weight * double(amps - deamps));
    double sign = (negs % 2 == 0) ? 1.0 : -1.0;
    sum += p * sign * intensity;
  }
  return sum / std::sqrt(double(tokens.size()));
}

inline SentimentResult score_article(std::string_view text,
                                     const Lexicon& lexicon,
                                     const ShifterTable& shifters,
                                     const ScoreParams& params = {}) {
  SentimentResult result;
  for (const auto& sentence : segment_sentences(text)) {
    result.sentence_scores.push_back(
        score_sentence(sentence, lexicon, shifters, params));
    for (const auto& t : sentence)
      if (lexicon.polarity(t) != 0.0) ++result.polarized_token_count;
  }
  if (!result.sentence_scores.empty()) {
    double sum = 0.0;
    for (double s : result.sentence_scores) sum += s;
    result.article_score = sum / double(result.sentence_scores.size());
  }
  return result;
}

namespace detail {

inline std::vector<std::pair<std::string, std::string>> parse_tsv(
    std::string_view text, const char* what) {
  std::vector<std::pair<std::string, std::string>> rows;
  size_t pos = 0, lineno = 0;
  while (pos <= text.size()) {
    size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(
        pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string_view::npos || tab == 0 || tab + 1 == line.size())
      fail(errc::malformed_config, std::string(what) + ": line " +
                                       std::to_string(lineno) +
                                       " is not token<TAB>value");
    rows.emplace_back(std::string(line.substr(0, tab)),
                      std::string(line.substr(tab + 1)));
  }
  return rows;
}

}  // namespace detail

// TSV `token<TAB>polarity`. Zero-polarity rows are dropped.
inline Lexicon load_lexicon(std::string_view text) {
  Lexicon lex;
  for (auto& [token, value] : detail::parse_tsv(text, "lexicon")) {
    std::string norm = normalize_keyword(token);
    char* end = nullptr;
    double p = std::strtod(value.c_str(), &end);
    if (end == value.c_str() || *end != '\0')
      fail(errc::malformed_config,
           "lexicon: bad polarity '" + value + "' for token '" + norm + "'");
    if (p == 0.0) continue;
    lex.polarities[norm] = p;
  }
  return lex;
}

// TSV `token<TAB>class`, class in {negator, amplifier, deamplifier}. The
// three sets must be pairwise disjoint; pass the lexicon to also enforce
// disjointness from polarized tokens.
inline ShifterTable load_shifters(std::string_view text,
                                  const Lexicon* lexicon = nullptr) {
  ShifterTable table;
  for (auto& [token, cls] : detail::parse_tsv(text, "shifters")) {
    std::string norm = normalize_keyword(token);
    if (table.negators.count(norm) || table.amplifiers.count(norm) ||
        table.de_amplifiers.count(norm))
      fail(errc::malformed_config,
           "shifters: token '" + norm + "' listed in more than one class");
    if (lexicon && lexicon->polarities.count(norm))
      fail(errc::malformed_config,
           "shifters: token '" + norm + "' also carries lexicon polarity");
    if (cls == "negator")
      table.negators.insert(norm);
    else if (cls == "amplifier")
      table.amplifiers.insert(norm);
    else if (cls == "deamplifier")
      table.de_amplifiers.insert(norm);
    else
      fail(errc::malformed_config,
           "shifters: unknown class '" + cls + "' for token '" + norm + "'");
  }
  return table;
}

}  // namespace faunawatch
