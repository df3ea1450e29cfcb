#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "vj/affect.hpp"
#include "vj/error.hpp"

namespace vj::affect {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void badLine(std::string_view origin, std::size_t lineNo, std::string_view what) {
  std::ostringstream msg;
  msg << origin << ":" << lineNo << ": " << what;
  throw FormatError(msg.str());
}

}  // namespace

std::string_view toString(ValenceLabel label) {
  switch (label) {
    case ValenceLabel::Negative: return "negative";
    case ValenceLabel::Neutral: return "neutral";
    case ValenceLabel::Positive: return "positive";
  }
  return "neutral";
}

ValenceLabel labelFor(double score) {
  if (score < -kNeutralBand) return ValenceLabel::Negative;
  if (score > kNeutralBand) return ValenceLabel::Positive;
  return ValenceLabel::Neutral;
}

void SentimentLexicon::add(std::string lemma, double weight) {
  for (auto& c : lemma) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  weights_.insert_or_assign(std::move(lemma), weight);
}

std::optional<double> SentimentLexicon::lookup(std::string_view lemma) const {
  const auto it = weights_.find(std::string(lemma));
  if (it == weights_.end()) return std::nullopt;
  return it->second;
}

SentimentLexicon SentimentLexicon::negated() const {
  SentimentLexicon out;
  for (const auto& [lemma, weight] : weights_) out.add(lemma, -weight);
  return out;
}

SentimentLexicon SentimentLexicon::parse(std::string_view content, std::string_view origin) {
  SentimentLexicon lexicon;
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
    if (tab == std::string_view::npos) badLine(origin, lineNo, "expected 'lemma<TAB>weight'");
    const auto lemma = trim(line.substr(0, tab));
    auto number = trim(line.substr(tab + 1));
    if (number.size() > 1 && number.front() == '+') number.remove_prefix(1);  // from_chars rejects '+'
    double weight = 0.0;
    const auto [end, ec] = std::from_chars(number.data(), number.data() + number.size(), weight);
    if (lemma.empty() || ec != std::errc() || end != number.data() + number.size()) {
      badLine(origin, lineNo, "bad weight '" + std::string(number) + "'");
    }
    if (!(weight >= -1.0 && weight <= 1.0)) badLine(origin, lineNo, "weight outside [-1, 1]");
    lexicon.add(std::string(lemma), weight);
  }
  return lexicon;
}

SentimentLexicon SentimentLexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read sentiment lexicon: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str(), path.string());
}

bool isNegator(std::string_view lemma) {
  return lemma == "not" || lemma == "never" || lemma == "n't" || lemma.ends_with("n't") ||
         lemma == "cannot";
}

ValenceRecord valence(std::span<const text::Token> tokens, const SentimentLexicon& lexicon) {
  ValenceRecord record;
  double sum = 0.0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto weight = lexicon.lookup(tokens[i].lemma);
    if (!weight) continue;
    bool negated = false;
    for (std::size_t back = 1; back <= kNegationWindow && back <= i; ++back) {
      if (isNegator(tokens[i - back].lemma)) negated = true;
    }
    const double w = negated ? -*weight : *weight;
    record.hits.push_back({tokens[i].lemma, w});
    sum += w;
  }
  if (!record.hits.empty()) {
    record.score = std::clamp(sum / static_cast<double>(record.hits.size()), -1.0, 1.0);
  }
  record.label = labelFor(record.score);
  return record;
}

std::string_view toString(Emotion emotion) {
  switch (emotion) {
    case Emotion::Happy: return "happy";
    case Emotion::Sad: return "sad";
    case Emotion::Surprised: return "surprised";
    case Emotion::Interested: return "interested";
    case Emotion::Neutral: return "neutral";
  }
  return "neutral";
}

std::optional<Emotion> parseEmotion(std::string_view name) {
  for (auto e : {Emotion::Happy, Emotion::Sad, Emotion::Surprised, Emotion::Interested,
                 Emotion::Neutral}) {
    if (toString(e) == name) return e;
  }
  return std::nullopt;
}

Emotion agentEmotion(const ValenceRecord& userValence, std::optional<Emotion> intentDefault,
                     bool mirror) {
  if (intentDefault) return *intentDefault;
  if (!mirror) return Emotion::Neutral;
  switch (userValence.label) {
    case ValenceLabel::Positive: return Emotion::Happy;
    case ValenceLabel::Negative: return Emotion::Sad;
    case ValenceLabel::Neutral: return Emotion::Interested;
  }
  return Emotion::Interested;
}

}  // namespace vj::affect
