#pragma once

// Rule-based shallow analysis of user utterances: tokenization, lexicon
// driven part-of-speech tagging, noun-phrase chunking, subject detection and
// single-pronoun anaphora resolution.

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace vj::text {

enum class Pos { Noun, Propn, Verb, Adj, Pron, Det, Adp, Num, Other };

std::string_view toString(Pos pos);
std::optional<Pos> parsePos(std::string_view name);

struct Token {
  std::string surface;
  std::string lemma;
  Pos pos = Pos::Other;
  std::size_t index = 0;
  std::size_t sentence = 0;
  // Source text between the previous token (or the start) and this one.
  std::string separator;
  std::size_t offset = 0;
};

/// Output of tokenize(); `trailing` holds whatever follows the last token so
/// that the source text can be rebuilt exactly.
struct Tokenization {
  std::vector<Token> tokens;
  std::string trailing;

  std::string reconstruct() const;
};

Tokenization tokenize(std::string_view text);

/// True when the token carries at least one letter or digit.
bool isWord(const Token& token);

/// "Rex's", "sister's": a noun-like token whose lemma had a possessive suffix
/// stripped.
bool isPossessive(const Token& token);

/// Half-open token-index range [begin, end).
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool contains(std::size_t index) const { return index >= begin && index < end; }
  friend bool operator==(const Span&, const Span&) = default;
};

enum class AnaphoraClass { SingularMasc, SingularFem, SingularAny, Plural };

std::string_view toString(AnaphoraClass cls);
std::optional<AnaphoraClass> parseAnaphoraClass(std::string_view name);

/// A candidate antecedent for pronoun resolution.
struct Referent {
  std::string name;
  AnaphoraClass cls = AnaphoraClass::SingularAny;
};

/// Grammatical class a third-person pronoun demands, if `lemma` is one.
enum class PronounKind { Masc, Fem, Neuter, Plural };
std::optional<PronounKind> thirdPersonPronoun(std::string_view lemma);
bool compatible(PronounKind pronoun, AnaphoraClass cls);

struct Analysis {
  std::vector<Token> tokens;
  std::vector<Span> nounPhrases;
  std::vector<Span> properNouns;
  std::optional<Span> subject;
  std::map<std::size_t, std::string> resolvedReferences;

  std::size_t wordCount() const;
  std::size_t sentenceCount() const;
  std::string spanText(const Span& span) const;
};

/// Built-in function-word lexicon. These words never receive an open-class
/// tag, whatever the loaded lexicon or the suffix rules say.
std::optional<Pos> closedClassTag(std::string_view lemma);
inline bool isClosedClass(std::string_view lemma) { return closedClassTag(lemma).has_value(); }

/// Open-class word lexicon, loaded from `lemma<TAB>TAG` lines.
class Lexicon {
 public:
  Lexicon() = default;

  static Lexicon load(const std::filesystem::path& path);
  static Lexicon parse(std::string_view content, std::string_view origin = "<memory>");

  void add(std::string lemma, Pos pos);
  std::optional<Pos> lookup(std::string_view lemma) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::unordered_map<std::string, Pos> entries_;
};

class Analyzer {
 public:
  explicit Analyzer(std::shared_ptr<const Lexicon> lexicon);

  std::vector<Token> tagPos(std::vector<Token> tokens) const;

  /// `salient` is ordered most-salient first.
  Analysis analyze(std::string_view text, std::span<const Referent> salient) const;

  const Lexicon& lexicon() const { return *lexicon_; }

 private:
  std::optional<Pos> stemTag(std::string_view word, std::string_view suffix, Pos wanted,
                             std::string* stem) const;

  std::shared_ptr<const Lexicon> lexicon_;
};

}  // namespace vj::text
