#include <algorithm>
#include <cctype>

#include "vj/textproc.hpp"

namespace vj::text {
namespace {

bool isNumeric(std::string_view s) {
  bool digit = false;
  for (char c : s) {
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digit = true;
    } else if (c != '.' && c != ',') {
      return false;
    }
  }
  return digit;
}

bool isCapitalized(std::string_view surface) {
  if (surface.empty() || !std::isupper(static_cast<unsigned char>(surface[0]))) return false;
  // ALL-CAPS words are emphasis, not names.
  std::size_t letters = 0;
  std::size_t upper = 0;
  for (char c : surface) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalpha(u)) {
      ++letters;
      if (std::isupper(u)) ++upper;
    }
  }
  return letters <= 1 || upper < letters;
}

bool isAuxiliary(std::string_view lemma) { return closedClassTag(lemma) == Pos::Verb; }

std::vector<std::string> stemCandidates(std::string_view word, std::string_view suffix) {
  std::vector<std::string> out;
  if (word.size() <= suffix.size() + 1 || !word.ends_with(suffix)) return out;
  std::string base(word.substr(0, word.size() - suffix.size()));
  out.push_back(base);
  out.push_back(base + "e");
  if (base.size() >= 2 && base[base.size() - 1] == base[base.size() - 2]) {
    out.push_back(base.substr(0, base.size() - 1));
  }
  if (suffix == "ed" && base.ends_with('i')) out.push_back(base.substr(0, base.size() - 1) + "y");
  return out;
}

std::vector<std::string> pluralStems(std::string_view word) {
  std::vector<std::string> out;
  if (word.size() <= 3 || !word.ends_with('s') || word.ends_with("ss")) return out;
  if (word.ends_with("ies")) out.push_back(std::string(word.substr(0, word.size() - 3)) + "y");
  if (word.ends_with("es")) out.emplace_back(word.substr(0, word.size() - 2));
  out.emplace_back(word.substr(0, word.size() - 1));
  return out;
}

// Greedy maximal DET? ADJ* NOUN+ chunks, never crossing a sentence boundary and
// closing after a possessive noun.
std::vector<Span> chunkNounPhrases(const std::vector<Token>& tokens) {
  std::vector<Span> spans;
  std::size_t i = 0;
  while (i < tokens.size()) {
    const auto sentence = tokens[i].sentence;
    const auto inSentence = [&](std::size_t k) {
      return k < tokens.size() && tokens[k].sentence == sentence;
    };
    std::size_t j = i;
    if (tokens[j].pos == Pos::Det) ++j;
    while (inSentence(j) && tokens[j].pos == Pos::Adj) ++j;
    std::size_t k = j;
    while (inSentence(k) && tokens[k].pos == Pos::Noun) {
      ++k;
      if (isPossessive(tokens[k - 1])) break;
    }
    if (k > j) {
      spans.push_back({i, k});
      i = k;
    } else {
      ++i;
    }
  }
  return spans;
}

std::vector<Span> chunkProperNouns(const std::vector<Token>& tokens) {
  std::vector<Span> spans;
  std::size_t i = 0;
  while (i < tokens.size()) {
    if (tokens[i].pos != Pos::Propn) {
      ++i;
      continue;
    }
    std::size_t k = i;
    while (k < tokens.size() && tokens[k].pos == Pos::Propn && tokens[k].sentence == tokens[i].sentence) {
      ++k;
      if (isPossessive(tokens[k - 1])) break;
    }
    spans.push_back({i, k});
    i = k;
  }
  return spans;
}

}  // namespace

Analyzer::Analyzer(std::shared_ptr<const Lexicon> lexicon) : lexicon_(std::move(lexicon)) {
  if (!lexicon_) lexicon_ = std::make_shared<Lexicon>();
}

std::optional<Pos> Analyzer::stemTag(std::string_view word, std::string_view suffix, Pos wanted,
                                     std::string* stem) const {
  const auto candidates = suffix == "s" ? pluralStems(word) : stemCandidates(word, suffix);
  for (const auto& candidate : candidates) {
    if (lexicon_->lookup(candidate) == wanted) {
      if (stem) *stem = candidate;
      return wanted;
    }
  }
  return std::nullopt;
}

std::vector<Token> Analyzer::tagPos(std::vector<Token> tokens) const {
  std::vector<bool> gerundCandidate(tokens.size(), false);
  std::size_t lastSentence = static_cast<std::size_t>(-1);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    auto& token = tokens[i];
    if (!isWord(token)) {
      token.pos = Pos::Other;
      continue;
    }
    const bool initial = token.sentence != lastSentence;
    lastSentence = token.sentence;
    const std::string& lemma = token.lemma;

    if (isNumeric(lemma)) {
      token.pos = Pos::Num;
    } else if (auto closed = closedClassTag(lemma)) {
      token.pos = *closed;
    } else if (!initial && isCapitalized(token.surface)) {
      token.pos = Pos::Propn;
    } else if (auto known = lexicon_->lookup(lemma)) {
      token.pos = *known;
    } else if (lemma.size() > 3 && lemma.ends_with("ly")) {
      token.pos = Pos::Other;
    } else if (stemTag(lemma, "ing", Pos::Verb, nullptr)) {
      token.pos = Pos::Verb;
      gerundCandidate[i] = true;
    } else if (stemTag(lemma, "ed", Pos::Verb, nullptr)) {
      token.pos = Pos::Verb;
    } else if (std::string stem; stemTag(lemma, "s", Pos::Noun, &stem)) {
      token.pos = Pos::Noun;
      token.lemma = stem;
    } else if (stemTag(lemma, "s", Pos::Verb, nullptr)) {
      token.pos = Pos::Verb;
    } else {
      token.pos = Pos::Noun;
    }
  }

  // "-ing" forms read as nouns after a determiner, a preposition or a
  // non-auxiliary verb ("I enjoy swimming", "about fishing").
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (!gerundCandidate[i]) continue;
    for (std::size_t p = i; p-- > 0;) {
      if (!isWord(tokens[p])) continue;
      if (tokens[p].sentence != tokens[i].sentence) break;
      const Pos prev = tokens[p].pos;
      if (prev == Pos::Det || prev == Pos::Adp || (prev == Pos::Verb && !isAuxiliary(tokens[p].lemma))) {
        tokens[i].pos = Pos::Noun;
      }
      break;
    }
  }
  return tokens;
}

Analysis Analyzer::analyze(std::string_view text, std::span<const Referent> salient) const {
  Analysis analysis;
  analysis.tokens = tagPos(tokenize(text).tokens);
  const auto& tokens = analysis.tokens;
  analysis.nounPhrases = chunkNounPhrases(tokens);
  analysis.properNouns = chunkProperNouns(tokens);

  const auto firstVerb = std::find_if(tokens.begin(), tokens.end(), [](const Token& t) {
    return t.sentence == 0 && t.pos == Pos::Verb;
  });
  if (firstVerb != tokens.end()) {
    const auto verbIndex = firstVerb->index;
    std::optional<Span> best;
    for (const auto* list : {&analysis.nounPhrases, &analysis.properNouns}) {
      for (const auto& span : *list) {
        if (span.end <= verbIndex && (!best || span.begin < best->begin)) {
          best = span;
          break;
        }
      }
    }
    analysis.subject = best;
  }

  for (const auto& token : tokens) {
    if (token.pos != Pos::Pron && token.pos != Pos::Det) continue;
    const auto kind = thirdPersonPronoun(token.lemma);
    if (!kind) continue;
    const auto match = std::find_if(salient.begin(), salient.end(),
                                    [&](const Referent& r) { return compatible(*kind, r.cls); });
    if (match != salient.end()) analysis.resolvedReferences.emplace(token.index, match->name);
  }
  return analysis;
}

}  // namespace vj::text
