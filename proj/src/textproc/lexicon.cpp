#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "vj/error.hpp"
#include "vj/textproc.hpp"

namespace vj::text {
namespace {

using ClosedTable = std::unordered_map<std::string_view, Pos>;

ClosedTable buildClosedClass() {
  ClosedTable table;
  const auto add = [&](Pos pos, std::initializer_list<std::string_view> words) {
    for (auto w : words) table.emplace(w, pos);
  };
  add(Pos::Pron, {"i", "me", "you", "he", "him", "she", "it", "we", "us", "they", "them",
                  "myself", "yourself", "yourselves", "himself", "herself", "itself", "ourselves",
                  "themselves", "mine", "yours", "hers", "ours", "theirs", "who", "whom", "what",
                  "which", "someone", "something", "anyone", "anything", "everyone",
                  "everything", "nobody", "nothing", "somebody", "everybody", "anybody", "none",
                  "i'm", "i've", "i'll", "i'd", "you're", "you've", "you'll", "you'd", "he's",
                  "he'll", "he'd", "she's", "she'll", "she'd", "it's", "it'll", "we're", "we've",
                  "we'll", "we'd", "they're", "they've", "they'll", "they'd", "that's",
                  "there's", "here's", "what's", "who's", "let's", "where's", "how's"});
  add(Pos::Det, {"the", "a", "an", "this", "that", "these", "those", "my", "your", "his", "her",
                 "its", "our", "their", "some", "any", "no", "every", "each", "all", "both",
                 "either", "neither", "another", "many", "much", "few", "several", "whose"});
  add(Pos::Adp, {"in", "on", "at", "to", "from", "with", "without", "about", "of", "for", "by",
                 "into", "onto", "over", "under", "after", "before", "during", "through",
                 "between", "among", "around", "near", "since", "until", "across", "against",
                 "along", "behind", "beside", "beyond", "inside", "outside", "towards", "toward",
                 "upon", "within", "than", "via", "per", "throughout", "despite", "except"});
  add(Pos::Verb, {"be", "am", "is", "are", "was", "were", "been", "being", "have", "has", "had",
                  "having", "do", "does", "did", "will", "would", "can", "could", "shall",
                  "should", "may", "might", "must", "don't", "doesn't", "didn't", "isn't",
                  "aren't", "wasn't", "weren't", "can't", "cannot", "won't", "wouldn't",
                  "couldn't", "shouldn't", "haven't", "hasn't", "hadn't", "mustn't", "ain't"});
  add(Pos::Other, {"and", "or", "but", "so", "because", "if", "then", "not", "never", "very",
                   "too", "also", "just", "really", "yes", "yeah", "yep", "nope", "oh", "ah",
                   "um", "uh", "hmm", "hey", "hi", "hello", "bye", "goodbye", "ok", "okay",
                   "please", "thanks", "when", "where", "why", "how", "there", "here", "as",
                   "while", "although", "though", "unless", "whether", "nor", "yet", "up",
                   "down", "out", "off", "again", "still", "even", "only", "quite", "rather",
                   "maybe", "perhaps", "well", "now", "wow", "n't", "'s"});
  return table;
}

const ClosedTable& closedClass() {
  static const ClosedTable table = buildClosedClass();
  return table;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::string_view toString(Pos pos) {
  switch (pos) {
    case Pos::Noun: return "NOUN";
    case Pos::Propn: return "PROPN";
    case Pos::Verb: return "VERB";
    case Pos::Adj: return "ADJ";
    case Pos::Pron: return "PRON";
    case Pos::Det: return "DET";
    case Pos::Adp: return "ADP";
    case Pos::Num: return "NUM";
    case Pos::Other: return "OTHER";
  }
  return "OTHER";
}

std::optional<Pos> parsePos(std::string_view name) {
  for (auto pos : {Pos::Noun, Pos::Propn, Pos::Verb, Pos::Adj, Pos::Pron, Pos::Det, Pos::Adp,
                   Pos::Num, Pos::Other}) {
    if (toString(pos) == name) return pos;
  }
  return std::nullopt;
}

std::string_view toString(AnaphoraClass cls) {
  switch (cls) {
    case AnaphoraClass::SingularMasc: return "singular-masc";
    case AnaphoraClass::SingularFem: return "singular-fem";
    case AnaphoraClass::SingularAny: return "singular-any";
    case AnaphoraClass::Plural: return "plural";
  }
  return "singular-any";
}

std::optional<AnaphoraClass> parseAnaphoraClass(std::string_view name) {
  for (auto cls : {AnaphoraClass::SingularMasc, AnaphoraClass::SingularFem,
                   AnaphoraClass::SingularAny, AnaphoraClass::Plural}) {
    if (toString(cls) == name) return cls;
  }
  return std::nullopt;
}

std::optional<PronounKind> thirdPersonPronoun(std::string_view lemma) {
  static const std::unordered_map<std::string_view, PronounKind> kinds = {
      {"he", PronounKind::Masc},       {"him", PronounKind::Masc},
      {"his", PronounKind::Masc},      {"himself", PronounKind::Masc},
      {"he's", PronounKind::Masc},     {"she", PronounKind::Fem},
      {"her", PronounKind::Fem},       {"hers", PronounKind::Fem},
      {"herself", PronounKind::Fem},   {"she's", PronounKind::Fem},
      {"it", PronounKind::Neuter},     {"its", PronounKind::Neuter},
      {"itself", PronounKind::Neuter}, {"it's", PronounKind::Neuter},
      {"they", PronounKind::Plural},   {"them", PronounKind::Plural},
      {"their", PronounKind::Plural},  {"theirs", PronounKind::Plural},
      {"themselves", PronounKind::Plural}, {"they're", PronounKind::Plural},
  };
  const auto it = kinds.find(lemma);
  if (it == kinds.end()) return std::nullopt;
  return it->second;
}

bool compatible(PronounKind pronoun, AnaphoraClass cls) {
  switch (pronoun) {
    case PronounKind::Masc:
      return cls == AnaphoraClass::SingularMasc || cls == AnaphoraClass::SingularAny;
    case PronounKind::Fem:
      return cls == AnaphoraClass::SingularFem || cls == AnaphoraClass::SingularAny;
    case PronounKind::Neuter: return cls == AnaphoraClass::SingularAny;
    case PronounKind::Plural: return cls == AnaphoraClass::Plural;
  }
  return false;
}

std::optional<Pos> closedClassTag(std::string_view lemma) {
  const auto& table = closedClass();
  const auto it = table.find(lemma);
  if (it != table.end()) return it->second;
  // Any other negated contraction ("needn't") is still a function word.
  if (lemma.size() > 3 && lemma.ends_with("n't")) return Pos::Verb;
  return std::nullopt;
}

void Lexicon::add(std::string lemma, Pos pos) {
  for (auto& c : lemma) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  entries_.insert_or_assign(std::move(lemma), pos);
}

std::optional<Pos> Lexicon::lookup(std::string_view lemma) const {
  const auto it = entries_.find(std::string(lemma));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

Lexicon Lexicon::parse(std::string_view content, std::string_view origin) {
  Lexicon lexicon;
  std::size_t lineNo = 0;
  std::size_t pos = 0;
  while (pos <= content.size()) {
    const auto eol = content.find('\n', pos);
    const auto raw = content.substr(pos, eol == std::string_view::npos ? content.npos : eol - pos);
    pos = eol == std::string_view::npos ? content.size() + 1 : eol + 1;
    ++lineNo;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) {
      std::ostringstream msg;
      msg << origin << ":" << lineNo << ": expected 'lemma<TAB>TAG'";
      throw FormatError(msg.str());
    }
    const auto lemma = trim(line.substr(0, tab));
    const auto tag = parsePos(trim(line.substr(tab + 1)));
    if (lemma.empty() || !tag) {
      std::ostringstream msg;
      msg << origin << ":" << lineNo << ": bad entry '" << line << "'";
      throw FormatError(msg.str());
    }
    lexicon.add(std::string(lemma), *tag);
  }
  return lexicon;
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read lexicon file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str(), path.string());
}

}  // namespace vj::text
