#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "vj/textproc.hpp"

namespace vj::affect {

enum class ValenceLabel { Negative, Neutral, Positive };

std::string_view toString(ValenceLabel label);

/// Scores strictly beyond +/-0.1 are polar; the band in between is neutral.
inline constexpr double kNeutralBand = 0.1;

ValenceLabel labelFor(double score);

struct ValenceHit {
  std::string lemma;
  double weight = 0.0;
};

struct ValenceRecord {
  double score = 0.0;
  ValenceLabel label = ValenceLabel::Neutral;
  std::vector<ValenceHit> hits;
};

/// Signed word lexicon, `lemma<TAB>weight` with weights in [-1, 1].
class SentimentLexicon {
 public:
  SentimentLexicon() = default;

  static SentimentLexicon load(const std::filesystem::path& path);
  static SentimentLexicon parse(std::string_view content, std::string_view origin = "<memory>");

  void add(std::string lemma, double weight);
  std::optional<double> lookup(std::string_view lemma) const;
  std::size_t size() const { return weights_.size(); }

  /// Same entries with every weight sign flipped.
  SentimentLexicon negated() const;

 private:
  std::unordered_map<std::string, double> weights_;
};

/// Negators flip a hit when they sit within this many tokens before it.
inline constexpr std::size_t kNegationWindow = 2;

bool isNegator(std::string_view lemma);

ValenceRecord valence(std::span<const text::Token> tokens, const SentimentLexicon& lexicon);

enum class Emotion { Happy, Sad, Surprised, Interested, Neutral };

std::string_view toString(Emotion emotion);
std::optional<Emotion> parseEmotion(std::string_view name);

/// A template-fixed emotion always wins; otherwise mirror the user or stay
/// neutral.
Emotion agentEmotion(const ValenceRecord& userValence, std::optional<Emotion> intentDefault,
                     bool mirror);

}  // namespace vj::affect
