#include <cctype>

#include "vj/dialogue.hpp"

namespace vj::dialogue {

nlohmann::ordered_json InformationState::toJson() const {
  nlohmann::ordered_json out;
  out["sessionClock"] = sessionClock;
  auto& h = out["history"] = nlohmann::ordered_json::array();
  for (const auto& u : history) {
    nlohmann::ordered_json item{{"speaker", u.speaker == Speaker::User ? "user" : "agent"},
                                {"text", u.text},
                                {"at", u.at}};
    if (u.speaker == Speaker::Agent) item["responseId"] = u.responseId;
    h.push_back(std::move(item));
  }
  out["currentTopic"] = currentTopic;
  out["currentState"] = currentState;
  out["followUpsInTopic"] = followUpsInTopic;
  out["usedResponses"] = usedResponses;
  out["responseLastUsed"] = responseLastUsed;
  out["lastUserInputAt"] = lastUserInputAt;
  out["lastAgentOutputAt"] = lastAgentOutputAt;
  out["userName"] = userName ? nlohmann::ordered_json(*userName) : nlohmann::ordered_json(nullptr);
  out["awaitingReply"] = awaitingReply;
  out["exhaustedTopics"] = exhaustedTopics;
  out["visitedTopics"] = visitedTopics;
  out["newNodesPerTurn"] = newNodesPerTurn;
  if (lastUserValence) {
    out["lastUserValence"] = {{"score", lastUserValence->score},
                              {"label", affect::toString(lastUserValence->label)}};
  } else {
    out["lastUserValence"] = nullptr;
  }
  out["agentTurns"] = agentTurns;
  out["started"] = started;
  out["closed"] = closed;
  return out;
}

ReplyClass classifyReply(const text::Analysis& analysis, std::size_t newNodes,
                         const InformationState& is, const DialogueConfig& config) {
  const auto words = analysis.wordCount();
  if (words > config.complexWords ||
      (analysis.sentenceCount() > config.complexSentences && !analysis.subject)) {
    return ReplyClass::Complex;
  }
  bool barren = newNodes == 0 && config.barrenTurns > 0 &&
                is.newNodesPerTurn.size() + 1 >= config.barrenTurns;
  for (std::size_t k = 1; barren && k < config.barrenTurns; ++k) {
    barren = is.newNodesPerTurn[is.newNodesPerTurn.size() - k] == 0;
  }
  if (is.followUpsInTopic >= config.maxFollowUps || barren) return ReplyClass::Exhausted;
  return words >= config.informativeWords || newNodes >= 1 ? ReplyClass::Informative
                                                          : ReplyClass::Sparse;
}

bool shouldClose(const InformationState& is, const DialogueConfig& config) {
  return is.sessionClock >= config.targetDurationMs && is.exhaustedTopics.contains(is.currentTopic);
}

std::optional<std::pair<std::string, std::string>> captureName(const text::Analysis& analysis) {
  std::vector<const text::Token*> words;
  for (const auto& t : analysis.tokens) {
    if (text::isWord(t)) words.push_back(&t);
  }
  const auto usable = [](const text::Token* t) {
    return t->pos != text::Pos::Num && !text::isClosedClass(t->lemma);
  };
  const auto result = [](const text::Token* t) {
    std::string display = text::isPossessive(*t) ? t->surface.substr(0, t->lemma.size()) : t->surface;
    if (!display.empty()) display[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(display[0])));
    return std::make_pair(display, t->lemma);
  };
  const auto at = [&](std::size_t i, std::string_view lemma) {
    return i < words.size() && words[i]->lemma == lemma;
  };
  for (std::size_t i = 0; i < words.size(); ++i) {
    std::optional<std::size_t> next;
    if (at(i, "name") && text::isPossessive(*words[i])) next = i + 1;  // "name's Sam"
    if (at(i, "name") && at(i + 1, "is")) next = i + 2;
    if (at(i, "i'm") || at(i, "it's")) next = i + 1;
    if (at(i, "i") && at(i + 1, "am")) next = i + 2;
    if (at(i, "call") && at(i + 1, "me")) next = i + 2;
    if (next && *next < words.size() && usable(words[*next])) return result(words[*next]);
  }
  for (const auto* t : words) {
    if (t->pos == text::Pos::Propn) return result(t);
  }
  // A bare lowercase answer ("sam") is only trusted when it is that short.
  if (words.size() > 2) return std::nullopt;
  for (const auto* t : words) {
    if (usable(t) && t->pos == text::Pos::Noun) return result(t);
  }
  return std::nullopt;
}

}  // namespace vj::dialogue
