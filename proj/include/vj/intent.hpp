#pragma once

// Communicative intents and their XML-like markup, the boundary between the
// dialogue engine and whatever renders the agent (text console, avatar).

#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "vj/affect.hpp"
#include "vj/error.hpp"
#include "vj/templates.hpp"

namespace vj::dialogue {

enum class IntentFunction {
  Greet,
  ProbeOpen,
  ProbeFollowup,
  ElaborateRequest,
  RephraseRequest,
  TopicSwitch,
  TimeoutPrompt,
  Closing,
};

std::string_view toString(IntentFunction fn);
std::optional<IntentFunction> parseIntentFunction(std::string_view name);

struct IntentMarkup {
  IntentFunction function = IntentFunction::ProbeOpen;
  std::string text;
  affect::Emotion emotion = affect::Emotion::Neutral;
  std::string stateId;
  std::string responseId;
  /// Index into tokenize(text).tokens of the accented token.
  std::optional<std::size_t> accentTokenIndex;

  /// <intent function=".." emotion=".." state=".." response=".."><speech>..</speech></intent>
  std::string serialize() const;

  friend bool operator==(const IntentMarkup&, const IntentMarkup&) = default;
};

class MissingSlotError : public Error {
 public:
  using Error::Error;
};

/// Values for {name}, {X} and {Y}. A missing or empty {name} is dropped along
/// with one neighbouring space; a missing {X} or {Y} throws MissingSlotError.
using SlotValues = std::map<std::string, std::string>;

std::string fillSlots(std::string_view text, const SlotValues& values);

IntentMarkup renderIntent(const Response& response, const SlotValues& values,
                          affect::Emotion emotion, IntentFunction function,
                          std::string stateId);

std::string xmlEscape(std::string_view text);

}  // namespace vj::dialogue
