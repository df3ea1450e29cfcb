#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "support.hpp"
#include "vj/affect.hpp"
#include "vj/error.hpp"

using namespace vj;
using affect::Emotion;
using affect::ValenceLabel;

namespace {

affect::ValenceRecord score(const std::string& s, const affect::SentimentLexicon& lex = *test::sentiment()) {
  return affect::valence(test::analyze(s).tokens, lex);
}

}  // namespace

TEST_CASE("valence of shipped lexicon examples") {
  const auto empty = score("");
  CHECK(empty.score == 0.0);
  CHECK(empty.label == ValenceLabel::Neutral);

  REQUIRE(test::sentiment()->lookup("love") == 0.8);
  const auto love = score("I love hiking");
  CHECK(love.score == doctest::Approx(0.8));
  CHECK(love.label == ValenceLabel::Positive);

  const auto notLove = score("I do not love hiking");
  CHECK(notLove.score == doctest::Approx(-0.8));
  CHECK(notLove.label == ValenceLabel::Negative);

  CHECK(score("I don't love hiking").score == doctest::Approx(-0.8));
}

TEST_CASE("valence averages hits and negation reaches two tokens back") {
  const auto lex = affect::SentimentLexicon::parse("good\t+0.6\nawful\t-1.0\n");
  CHECK(score("good and awful", lex).score == doctest::Approx(-0.2));
  CHECK(score("not very good", lex).score == doctest::Approx(-0.6));
  CHECK(score("not at all good", lex).score == doctest::Approx(0.6));
  CHECK(score("nothing here", lex).hits.empty());
}

TEST_CASE("negating the lexicon negates score and swaps labels") {
  const auto& lex = *test::sentiment();
  const auto flipped = lex.negated();
  const std::vector<std::string> sentences = {
      "I love hiking but I hate rain", "The food was terrible", "This is not bad at all",
      "What a wonderful, happy day", "I am sad and tired", "It was okay", "I never liked it"};
  for (const auto& s : sentences) {
    const auto a = score(s, lex);
    const auto b = score(s, flipped);
    CHECK(b.score == -a.score);
    if (a.label == ValenceLabel::Positive) CHECK(b.label == ValenceLabel::Negative);
    if (a.label == ValenceLabel::Negative) CHECK(b.label == ValenceLabel::Positive);
    if (a.label == ValenceLabel::Neutral) CHECK(b.label == ValenceLabel::Neutral);
  }
}

TEST_CASE("label thresholds hold for all scores") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const double s = d(rng);
    const auto label = affect::labelFor(s);
    if (s > 0.1) CHECK(label == ValenceLabel::Positive);
    else if (s < -0.1) CHECK(label == ValenceLabel::Negative);
    else CHECK(label == ValenceLabel::Neutral);
  }
  CHECK(affect::labelFor(0.1) == ValenceLabel::Neutral);
  CHECK(affect::labelFor(-0.1) == ValenceLabel::Neutral);
  CHECK(affect::labelFor(std::nextafter(0.1, 1.0)) == ValenceLabel::Positive);
  CHECK(affect::labelFor(std::nextafter(-0.1, -1.0)) == ValenceLabel::Negative);
}

TEST_CASE("agentEmotion precedence") {
  affect::ValenceRecord positive;
  positive.score = 0.8;
  positive.label = ValenceLabel::Positive;
  affect::ValenceRecord negative;
  negative.score = -0.5;
  negative.label = ValenceLabel::Negative;
  const affect::ValenceRecord neutral;

  for (const auto& v : {positive, negative, neutral}) {
    CHECK(affect::agentEmotion(v, Emotion::Surprised, true) == Emotion::Surprised);
    CHECK(affect::agentEmotion(v, Emotion::Surprised, false) == Emotion::Surprised);
    CHECK(affect::agentEmotion(v, std::nullopt, false) == Emotion::Neutral);
  }
  CHECK(affect::agentEmotion(positive, std::nullopt, true) == Emotion::Happy);
  CHECK(affect::agentEmotion(negative, std::nullopt, true) == Emotion::Sad);
  CHECK(affect::agentEmotion(neutral, std::nullopt, true) == Emotion::Interested);
}

TEST_CASE("agentEmotion is total") {
  const std::vector<Emotion> all = {Emotion::Happy, Emotion::Sad, Emotion::Surprised, Emotion::Interested,
                                    Emotion::Neutral};
  std::vector<std::optional<Emotion>> defaults{std::nullopt};
  defaults.insert(defaults.end(), all.begin(), all.end());
  for (auto label : {ValenceLabel::Negative, ValenceLabel::Neutral, ValenceLabel::Positive}) {
    affect::ValenceRecord v;
    v.label = label;
    for (const auto& d : defaults) {
      for (bool mirror : {false, true}) {
        const auto e = affect::agentEmotion(v, d, mirror);
        CHECK(std::find(all.begin(), all.end(), e) != all.end());
        CHECK(affect::parseEmotion(affect::toString(e)) == e);
      }
    }
  }
}

TEST_CASE("sentiment lexicon format errors") {
  CHECK_THROWS_WITH_AS(affect::SentimentLexicon::parse("good\t0.5\nbad\tworse\n", "s.tsv"),
                       doctest::Contains("s.tsv:2"), FormatError);
  CHECK_THROWS_AS(affect::SentimentLexicon::parse("good\t1.5\n"), FormatError);
  CHECK_THROWS_AS(affect::SentimentLexicon::load("/nonexistent/sentiment.tsv"), ConfigError);
}
