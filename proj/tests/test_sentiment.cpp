#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "faunawatch/io.hpp"
#include "faunawatch/sentiment.hpp"
#include "support/test_support.hpp"

using namespace faunawatch;
using fwtest::minilex;
using fwtest::minishifters;

namespace {

double score_tokens(std::vector<std::string> tokens) {
  static const Lexicon lex = minilex();
  static const ShifterTable shift = minishifters();
  return score_sentence(tokens, lex, shift);
}

}  // namespace

TEST_CASE("segment_sentences splits on terminal punctuation", "[sentiment]") {
  auto s = segment_sentences("Good news. Not good for poachers.");
  REQUIRE(s.size() == 2);
  CHECK(s[0] == std::vector<std::string>{"good", "news"});
  CHECK(s[1] == std::vector<std::string>{"not", "good", "for", "poachers"});

  // Known abbreviation limitation, accepted behavior.
  auto abbrev = segment_sentences("Dr. Smith arrived.");
  REQUIRE(abbrev.size() == 2);
  CHECK(abbrev[0] == std::vector<std::string>{"dr"});
  CHECK(abbrev[1] == std::vector<std::string>{"smith", "arrived"});

  CHECK(segment_sentences("").empty());
  CHECK(segment_sentences("   . ! ?").empty());
  CHECK(segment_sentences("No terminal punctuation at all").size() == 1);
  CHECK(segment_sentences("Really! Awful? Yes.").size() == 3);
  // A dot not followed by whitespace does not split.
  CHECK(segment_sentences("visit example.com today").size() == 1);
}

TEST_CASE("score_sentence applies the shifter formula exactly", "[sentiment]") {
  CHECK_THAT(score_tokens({"good"}), Catch::Matchers::WithinAbs(1.0, 1e-12));
  CHECK_THAT(score_tokens({"not", "good"}),
             Catch::Matchers::WithinAbs(-1.0 / std::sqrt(2.0), 1e-12));
  CHECK_THAT(score_tokens({"very", "good"}),
             Catch::Matchers::WithinAbs(1.8 / std::sqrt(2.0), 1e-12));
  CHECK_THAT(score_tokens({"barely", "good"}),
             Catch::Matchers::WithinAbs(0.2 / std::sqrt(2.0), 1e-12));
}

TEST_CASE("shifters only act inside the context window", "[sentiment]") {
  // Negator five tokens before the polarized word: out of the 4-before
  // window, so no flip.
  CHECK(score_tokens({"not", "x1", "x2", "x3", "x4", "good"}) > 0);
  CHECK(score_tokens({"not", "x1", "x2", "x3", "good"}) < 0);
  // Two tokens of right context count, a third does not.
  CHECK(score_tokens({"good", "x1", "not"}) < 0);
  CHECK(score_tokens({"good", "x1", "x2", "not"}) > 0);
}

TEST_CASE("stacked shifters compose multiplicatively with a floor",
          "[sentiment]") {
  // Two negators cancel.
  CHECK(score_tokens({"not", "not", "good"}) > 0);
  // Amplifier and de-amplifier cancel to the base weight.
  CHECK_THAT(score_tokens({"very", "barely", "good"}),
             Catch::Matchers::WithinAbs(1.0 / std::sqrt(3.0), 1e-12));
  // De-amplifiers bottom out at the floor instead of flipping.
  ShifterTable shift = minishifters();
  shift.de_amplifiers.insert("scarcely");
  Lexicon lex = minilex();
  double v = score_sentence(
      std::vector<std::string>{"barely", "scarcely", "good"}, lex, shift);
  CHECK_THAT(v, Catch::Matchers::WithinAbs(0.2 / std::sqrt(3.0), 1e-12));
}

TEST_CASE("score_article averages sentence scores", "[sentiment]") {
  auto result =
      score_article("Good news. Not good for poachers.", minilex(),
                    minishifters());
  REQUIRE(result.sentence_scores.size() == 2);
  CHECK_THAT(result.sentence_scores[0],
             Catch::Matchers::WithinAbs(0.7071, 1e-4));
  CHECK_THAT(result.sentence_scores[1],
             Catch::Matchers::WithinAbs(-0.5, 1e-12));
  CHECK_THAT(result.article_score, Catch::Matchers::WithinAbs(0.1036, 1e-4));
  CHECK(result.polarized_token_count == 2);
}

TEST_CASE("neutral and empty texts score zero", "[sentiment]") {
  auto neutral = score_article("The committee met on Tuesday as planned.",
                               minilex(), minishifters());
  CHECK(neutral.article_score == 0.0);
  CHECK(neutral.polarized_token_count == 0);

  auto empty = score_article("", minilex(), minishifters());
  CHECK(empty.article_score == 0.0);
  CHECK(empty.sentence_scores.empty());

  CHECK(score_article("happy", minilex(), minishifters()).article_score > 0);
}

TEST_CASE("shifter laws hold for every lexicon token", "[sentiment]") {
  auto lex = minilex();
  for (const auto& [w, p] : lex.polarities) {
    double base = score_tokens({w});
    double negated = score_tokens({"not", w});
    double doubled = score_tokens({"not", "not", w});
    double amplified = score_tokens({"very", w});
    double padded = score_tokens({"pad", w});
    CHECK(std::signbit(negated) != std::signbit(base));
    CHECK(std::signbit(doubled) == std::signbit(base));
    CHECK(std::abs(amplified) > std::abs(padded));
  }
}

TEST_CASE("sentence scores respect the intensity bound", "[sentiment]") {
  auto lex = minilex();
  auto shift = minishifters();
  std::vector<std::vector<std::string>> cases = {
      {"very", "very", "good", "very", "very"},
      {"not", "very", "bad", "dead", "good"},
      {"barely", "dead", "not", "no", "very", "happy", "good"},
  };
  for (const auto& tokens : cases) {
    size_t polarized = 0;
    for (const auto& t : tokens)
      if (lex.polarity(t) != 0) ++polarized;
    double bound = 1.0 * (1.0 + 0.8 * 6.0) * double(polarized) /
                   std::sqrt(double(tokens.size()));
    CHECK(std::abs(score_sentence(tokens, lex, shift)) <= bound + 1e-12);
  }
}

TEST_CASE("article score equals the mean of its sentences", "[sentiment]") {
  auto result = score_article(
      "Very good news arrived. Bad day for poachers! Nothing else happened. "
      "The dead snare lines were barely visible.",
      minilex(), minishifters());
  double sum = 0;
  for (double s : result.sentence_scores) sum += s;
  CHECK_THAT(result.article_score,
             Catch::Matchers::WithinAbs(
                 sum / double(result.sentence_scores.size()), 1e-12));
}

TEST_CASE("lexicon and shifter files load and validate", "[sentiment]") {
  auto lex = load_lexicon("good\t0.5\nneutralword\t0\nbad\t-0.75\n");
  CHECK(lex.polarities.size() == 2);  // zero entry dropped
  CHECK(lex.polarity("bad") == -0.75);

  CHECK_THROWS_AS(load_lexicon("good\tnot-a-number\n"), Error);
  CHECK_THROWS_AS(load_lexicon("missing-tab-line\n"), Error);

  auto shift = load_shifters("not\tnegator\nvery\tamplifier\nbarely\tdeamplifier\n");
  CHECK(shift.negators.count("not") == 1);
  CHECK_THROWS_AS(load_shifters("not\tnegator\nnot\tamplifier\n"), Error);
  CHECK_THROWS_AS(load_shifters("x\tmystery\n"), Error);

  Lexicon overlap = load_lexicon("verygood\t1\n");
  CHECK_NOTHROW(load_shifters("very\tamplifier\n", &overlap));
  CHECK_THROWS_AS(load_shifters("verygood\tamplifier\n", &overlap), Error);
}

TEST_CASE("shipped lexicon and shifters are loadable and disjoint",
          "[sentiment]") {
  auto lex = load_lexicon(read_file(std::filesystem::path(FAUNAWATCH_DATA_DIR) /
                                    "lexicon.tsv"));
  CHECK(lex.polarities.size() > 100);
  CHECK_NOTHROW(load_shifters(
      read_file(std::filesystem::path(FAUNAWATCH_DATA_DIR) / "shifters.tsv"),
      &lex));
  // The spec'd headline example behaves under the shipped lexicon too.
  auto shift = load_shifters(
      read_file(std::filesystem::path(FAUNAWATCH_DATA_DIR) / "shifters.tsv"));
  CHECK(score_article("Rangers celebrated a thriving elephant herd.", lex,
                      shift).article_score > 0);
  CHECK(score_article("Poachers slaughtered the herd.", lex, shift)
            .article_score < 0);
}
