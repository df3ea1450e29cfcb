#include "vj/intent.hpp"
#include "vj/textproc.hpp"

namespace vj::dialogue {
namespace {

struct Filled {
  std::string text;
  std::optional<std::size_t> accentOffset;
};

Filled fill(std::string_view text, const SlotValues& values,
            const std::optional<std::string>& accentSlot) {
  Filled out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '{') {
      out.text.push_back(text[i++]);
      continue;
    }
    const auto close = text.find('}', i);
    if (close == std::string_view::npos) {
      out.text.append(text.substr(i));
      break;
    }
    const std::string slot(text.substr(i + 1, close - i - 1));
    i = close + 1;
    const auto it = values.find(slot);
    const std::string value = it == values.end() ? std::string() : it->second;
    if (value.empty()) {
      if (slot != "name") throw MissingSlotError("no value for slot {" + slot + "}");
      if (!out.text.empty() && out.text.back() == ' ') {
        out.text.pop_back();
      } else if (i < text.size() && text[i] == ' ') {
        ++i;
      }
      continue;
    }
    if (accentSlot && *accentSlot == slot && !out.accentOffset) out.accentOffset = out.text.size();
    out.text += value;
  }
  return out;
}

}  // namespace

std::string_view toString(IntentFunction fn) {
  switch (fn) {
    case IntentFunction::Greet: return "greet";
    case IntentFunction::ProbeOpen: return "probe-open";
    case IntentFunction::ProbeFollowup: return "probe-followup";
    case IntentFunction::ElaborateRequest: return "elaborate-request";
    case IntentFunction::RephraseRequest: return "rephrase-request";
    case IntentFunction::TopicSwitch: return "topic-switch";
    case IntentFunction::TimeoutPrompt: return "timeout-prompt";
    case IntentFunction::Closing: return "closing";
  }
  return "probe-open";
}

std::optional<IntentFunction> parseIntentFunction(std::string_view name) {
  for (auto fn : {IntentFunction::Greet, IntentFunction::ProbeOpen, IntentFunction::ProbeFollowup,
                  IntentFunction::ElaborateRequest, IntentFunction::RephraseRequest,
                  IntentFunction::TopicSwitch, IntentFunction::TimeoutPrompt,
                  IntentFunction::Closing}) {
    if (toString(fn) == name) return fn;
  }
  return std::nullopt;
}

std::string xmlEscape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string fillSlots(std::string_view text, const SlotValues& values) {
  return fill(text, values, std::nullopt).text;
}

IntentMarkup renderIntent(const Response& response, const SlotValues& values,
                          affect::Emotion emotion, IntentFunction function, std::string stateId) {
  auto filled = fill(response.text, values, response.accentSlot);
  IntentMarkup intent;
  intent.function = function;
  intent.emotion = emotion;
  intent.stateId = std::move(stateId);
  intent.responseId = response.id;
  if (filled.accentOffset) {
    const auto tokens = text::tokenize(filled.text).tokens;
    for (std::size_t k = 0; k < tokens.size(); ++k) {
      if (tokens[k].offset + tokens[k].surface.size() > *filled.accentOffset) {
        intent.accentTokenIndex = k;
        break;
      }
    }
  }
  intent.text = std::move(filled.text);
  return intent;
}

std::string IntentMarkup::serialize() const {
  std::string speech;
  if (accentTokenIndex) {
    const auto t = text::tokenize(text);
    for (std::size_t k = 0; k < t.tokens.size(); ++k) {
      speech += t.tokens[k].separator;
      if (k == *accentTokenIndex) {
        speech += "<accent>" + xmlEscape(t.tokens[k].surface) + "</accent>";
      } else {
        speech += xmlEscape(t.tokens[k].surface);
      }
    }
    speech += t.trailing;
  } else {
    speech = xmlEscape(text);
  }
  std::string out = "<intent function=\"";
  out += toString(function);
  out += "\" emotion=\"";
  out += affect::toString(emotion);
  out += "\" state=\"" + xmlEscape(stateId) + "\" response=\"" + xmlEscape(responseId) +
         "\"><speech>" + speech + "</speech></intent>";
  return out;
}

}  // namespace vj::dialogue
