#include "vj/textproc.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace vj::text {
namespace {

bool isSpace(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// Length of a UTF-8 sequence in the General Punctuation block (U+2000..U+206F)
// starting at `i`, or 0.
std::size_t generalPunctuationAt(std::string_view s, std::size_t i) {
  if (i + 2 < s.size() && static_cast<unsigned char>(s[i]) == 0xE2 &&
      (static_cast<unsigned char>(s[i + 1]) == 0x80 ||
       static_cast<unsigned char>(s[i + 1]) == 0x81)) {
    return 3;
  }
  return 0;
}

bool isRightSingleQuote(std::string_view s, std::size_t i) {
  return i + 2 < s.size() && static_cast<unsigned char>(s[i]) == 0xE2 &&
         static_cast<unsigned char>(s[i + 1]) == 0x80 &&
         static_cast<unsigned char>(s[i + 2]) == 0x99;
}

bool isWordByte(std::string_view s, std::size_t i) {
  const auto c = static_cast<unsigned char>(s[i]);
  if (c < 0x80) return std::isalnum(c) != 0;
  // Continuation bytes are consumed together with their lead byte.
  return generalPunctuationAt(s, i) == 0;
}

std::size_t utf8Length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 1;
}

bool isDigit(std::string_view s, std::size_t i) {
  return i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])) != 0;
}

// Consumes one word starting at `i` and returns the index one past it.
std::size_t scanWord(std::string_view s, std::size_t i) {
  const auto n = s.size();
  while (i < n) {
    if (isWordByte(s, i)) {
      i += std::min(utf8Length(static_cast<unsigned char>(s[i])), n - i);
      continue;
    }
    // Joiners only count between two word characters.
    std::size_t joiner = 0;
    if (s[i] == '\'' || s[i] == '-') {
      joiner = 1;
    } else if (isRightSingleQuote(s, i)) {
      joiner = 3;
    } else if ((s[i] == '.' || s[i] == ',') && i > 0 && isDigit(s, i - 1) && isDigit(s, i + 1)) {
      joiner = 1;
    }
    if (joiner == 0 || i == 0 || i + joiner >= n || !isWordByte(s, i + joiner)) break;
    i += joiner;
  }
  return i;
}

std::size_t scanPunctuation(std::string_view s, std::size_t i) {
  std::size_t len = generalPunctuationAt(s, i);
  if (len == 0) len = std::min(utf8Length(static_cast<unsigned char>(s[i])), s.size() - i);
  const std::string_view unit = s.substr(i, len);
  std::size_t end = i + len;
  while (end + len <= s.size() && s.substr(end, len) == unit) end += len;
  return end;
}

std::string normalizeLemma(std::string_view surface) {
  std::string out;
  out.reserve(surface.size());
  for (std::size_t i = 0; i < surface.size();) {
    if (isRightSingleQuote(surface, i)) {
      out.push_back('\'');
      i += 3;
      continue;
    }
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(surface[i]))));
    ++i;
  }
  if (out.size() > 2 && out.ends_with("'s") && !isClosedClass(out)) out.resize(out.size() - 2);
  return out;
}

constexpr std::array<std::string_view, 12> kAbbreviations = {
    "mr", "mrs", "ms", "dr", "prof", "st", "jr", "sr", "vs", "etc", "mt", "approx"};

bool endsSentence(const Token& token) {
  return !isWord(token) && token.surface.find_first_of(".?!") != std::string::npos;
}

}  // namespace

bool isWord(const Token& token) {
  return std::any_of(token.surface.begin(), token.surface.end(), [](char c) {
    const auto u = static_cast<unsigned char>(c);
    return u >= 0x80 ? true : std::isalnum(u) != 0;
  }) && generalPunctuationAt(token.surface, 0) == 0;
}

bool isPossessive(const Token& token) {
  if (!isWord(token) || token.surface.size() < 3) return false;
  const std::string lowered = [&] {
    std::string s;
    for (std::size_t i = 0; i < token.surface.size();) {
      if (isRightSingleQuote(token.surface, i)) {
        s.push_back('\'');
        i += 3;
      } else {
        s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(token.surface[i++]))));
      }
    }
    return s;
  }();
  return lowered.ends_with("'s") && lowered.size() == token.lemma.size() + 2 &&
         lowered.starts_with(token.lemma);
}

std::string Tokenization::reconstruct() const {
  std::string out;
  for (const auto& t : tokens) {
    out += t.separator;
    out += t.surface;
  }
  out += trailing;
  return out;
}

Tokenization tokenize(std::string_view text) {
  Tokenization result;
  std::size_t i = 0;
  std::size_t gapStart = 0;
  while (i < text.size()) {
    if (isSpace(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    i = isWordByte(text, i) ? scanWord(text, i) : scanPunctuation(text, i);
    Token token;
    token.surface = std::string(text.substr(start, i - start));
    token.separator = std::string(text.substr(gapStart, start - gapStart));
    token.offset = start;
    token.index = result.tokens.size();
    token.lemma = isWord(token) ? normalizeLemma(token.surface) : token.surface;
    result.tokens.push_back(std::move(token));
    gapStart = i;
  }
  result.trailing = std::string(text.substr(gapStart));

  std::size_t sentence = 0;
  for (std::size_t k = 0; k < result.tokens.size(); ++k) {
    auto& token = result.tokens[k];
    if (k > 0) {
      const auto& prev = result.tokens[k - 1];
      const bool abbreviation =
          prev.surface == "." && k >= 2 &&
          std::find(kAbbreviations.begin(), kAbbreviations.end(), result.tokens[k - 2].lemma) !=
              kAbbreviations.end();
      if (endsSentence(prev) && !abbreviation && !token.separator.empty() &&
          std::isupper(static_cast<unsigned char>(token.surface[0])) != 0) {
        ++sentence;
      }
    }
    token.sentence = sentence;
  }
  return result;
}

std::size_t Analysis::wordCount() const {
  return static_cast<std::size_t>(
      std::count_if(tokens.begin(), tokens.end(), [](const Token& t) { return isWord(t); }));
}

std::size_t Analysis::sentenceCount() const {
  return tokens.empty() ? 0 : tokens.back().sentence + 1;
}

std::string Analysis::spanText(const Span& span) const {
  std::string out;
  for (std::size_t i = span.begin; i < span.end && i < tokens.size(); ++i) {
    if (i > span.begin) out += tokens[i].separator;
    out += tokens[i].surface;
  }
  return out;
}

}  // namespace vj::text
