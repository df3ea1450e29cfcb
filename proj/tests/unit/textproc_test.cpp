#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "support.hpp"
#include "vj/error.hpp"
#include "vj/textproc.hpp"

using namespace vj;
using text::Pos;

namespace {

std::vector<Pos> tags(const std::string& s) {
  std::vector<Pos> out;
  for (const auto& t : test::analyzer()->tagPos(text::tokenize(s).tokens)) out.push_back(t.pos);
  return out;
}

std::string randomAscii(std::mt19937_64& rng, std::size_t maxLen) {
  static const std::string alphabet =
      "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 .,!?'\"-;:()\t\n$%&";
  std::uniform_int_distribution<std::size_t> len(0, maxLen);
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::string s(len(rng), ' ');
  for (auto& c : s) c = alphabet[pick(rng)];
  return s;
}

std::string randomSentence(std::mt19937_64& rng) {
  static const std::vector<std::string> words = {
      "I", "my", "dog", "Rex", "is", "great", "he", "she", "they", "love", "hiking", "in",
      "Colorado", "the", "red", "car", "and", "it", "was", "not", "bad", "Sam's", "sister",
      "Ana", "a", "big", "house", ".", ",", "!", "?", "with", "his", "her", "cats", "run"};
  std::uniform_int_distribution<std::size_t> len(0, 20);
  std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1);
  std::string s;
  for (std::size_t i = len(rng); i > 0; --i) s += words[pick(rng)] + " ";
  return s;
}

}  // namespace

TEST_CASE("tokenize splits words and punctuation") {
  CHECK(text::tokenize("").tokens.empty());

  const auto t = text::tokenize("I love hiking in Colorado.").tokens;
  REQUIRE(t.size() == 6);
  CHECK(t.back().surface == ".");
  for (const auto& tok : t) CHECK(tok.sentence == 0);
  CHECK(t[4].lemma == "colorado");
  CHECK(t[2].offset == 7);

  const auto u = text::tokenize("It's fun. Really fun.").tokens;
  std::vector<std::size_t> sentences;
  for (const auto& tok : u) sentences.push_back(tok.sentence);
  CHECK(sentences == std::vector<std::size_t>{0, 0, 0, 1, 1, 1});
}

TEST_CASE("tokenize round-trips arbitrary text") {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 2000; ++i) {
    const auto s = randomAscii(rng, 80);
    CHECK(text::tokenize(s).reconstruct() == s);
  }
  for (const std::string s : {"  leading", "trailing  ", "multi\n\nline\ttext", "don't stop!!", "a...b"}) {
    CHECK(text::tokenize(s).reconstruct() == s);
  }
}

TEST_CASE("tagPos uses lexicon and closed-class words") {
  CHECK(tags("") .empty());
  CHECK(tags("I love hiking") == std::vector<Pos>{Pos::Pron, Pos::Verb, Pos::Noun});
  CHECK(tags("the red car") == std::vector<Pos>{Pos::Det, Pos::Adj, Pos::Noun});
  CHECK(tags("My dog Rex") == std::vector<Pos>{Pos::Det, Pos::Noun, Pos::Propn});
  CHECK(tags("3 cats") == std::vector<Pos>{Pos::Num, Pos::Noun});
}

TEST_CASE("closed-class words are never nouns") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 500; ++i) {
    const auto a = test::analyzer()->analyze(randomSentence(rng), {});
    for (const auto& t : a.tokens) {
      if (text::isClosedClass(t.lemma)) {
        CHECK(t.pos != Pos::Noun);
        CHECK(t.pos != Pos::Propn);
      }
    }
  }
  // Capitalized at sentence start or mid-sentence, still closed class.
  for (const auto& t : test::analyze("The cat saw THE dog. And Then he left.").tokens) {
    if (text::isClosedClass(t.lemma)) CHECK(t.pos != Pos::Propn);
  }
}

TEST_CASE("analyze chunks subject and proper nouns") {
  const auto a = test::analyze("My dog Rex is great");
  REQUIRE(a.subject);
  CHECK(a.spanText(*a.subject) == "My dog");
  REQUIRE(a.properNouns.size() == 1);
  CHECK(a.spanText(a.properNouns[0]) == "Rex");
  REQUIRE(a.nounPhrases.size() == 1);
  CHECK(a.spanText(a.nounPhrases[0]) == "My dog");

  const auto b = test::analyze("I visited New York with my older brother.");
  REQUIRE(b.properNouns.size() == 1);
  CHECK(b.spanText(b.properNouns[0]) == "New York");
  REQUIRE(b.nounPhrases.size() == 1);
  CHECK(b.spanText(b.nounPhrases[0]) == "my older brother");
}

TEST_CASE("gerunds after verbs and prepositions are nouns") {
  const auto a = test::analyze("I enjoy swimming and I talk about fishing.");
  std::vector<std::string> phrases;
  for (const auto& s : a.nounPhrases) phrases.push_back(a.spanText(s));
  CHECK(phrases == std::vector<std::string>{"swimming", "fishing"});
}

TEST_CASE("pronouns resolve to compatible salient referents") {
  const std::vector<text::Referent> rex{{"rex", text::AnaphoraClass::SingularAny}};
  const auto a = test::analyzer()->analyze("He is great", rex);
  REQUIRE(a.resolvedReferences.size() == 1);
  CHECK(a.resolvedReferences.at(0) == "rex");

  CHECK(test::analyzer()->analyze("He is great", {}).resolvedReferences.empty());

  const std::vector<text::Referent> plural{{"cats", text::AnaphoraClass::Plural},
                                           {"mia", text::AnaphoraClass::SingularFem}};
  const auto b = test::analyzer()->analyze("She feeds them.", plural);
  CHECK(b.resolvedReferences.at(0) == "mia");
  CHECK(b.resolvedReferences.at(2) == "cats");

  const std::vector<text::Referent> masc{{"tom", text::AnaphoraClass::SingularMasc}};
  CHECK(test::analyzer()->analyze("She left.", masc).resolvedReferences.empty());
}

TEST_CASE("analyze is deterministic and spans are sound") {
  std::mt19937_64 rng(2024);
  const std::vector<text::Referent> refs{{"rex", text::AnaphoraClass::SingularAny},
                                         {"cats", text::AnaphoraClass::Plural}};
  for (int i = 0; i < 1000; ++i) {
    const auto s = i % 2 ? randomAscii(rng, 60) : randomSentence(rng);
    const auto a = test::analyzer()->analyze(s, refs);
    const auto b = test::analyzer()->analyze(s, refs);
    CHECK(a.tokens.size() == b.tokens.size());
    CHECK(a.nounPhrases == b.nounPhrases);
    CHECK(a.properNouns == b.properNouns);
    CHECK(a.resolvedReferences == b.resolvedReferences);
    for (const auto* list : {&a.nounPhrases, &a.properNouns}) {
      for (const auto& span : *list) {
        CHECK(span.begin < span.end);
        CHECK(span.end <= a.tokens.size());
        CHECK(a.tokens[span.begin].sentence == a.tokens[span.end - 1].sentence);
      }
    }
    if (a.subject) CHECK(a.subject->end <= a.tokens.size());
    for (const auto& [index, name] : a.resolvedReferences) CHECK(index < a.tokens.size());
  }
}

TEST_CASE("lexicon parse errors name the line") {
  CHECK_THROWS_WITH_AS(text::Lexicon::parse("dog\tNOUN\ncat NOUN\n", "lex.tsv"),
                       doctest::Contains("lex.tsv:2"), FormatError);
  CHECK_THROWS_WITH_AS(text::Lexicon::parse("dog\tBOGUS\n", "lex.tsv"), doctest::Contains("lex.tsv:1"),
                       FormatError);
  CHECK_THROWS_AS(text::Lexicon::load("/nonexistent/lexicon.tsv"), Error);
  const auto lex = text::Lexicon::parse("# comment\n\nDog\tNOUN\n");
  CHECK(lex.lookup("dog") == Pos::Noun);
}
