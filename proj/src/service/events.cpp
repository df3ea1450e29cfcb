#include "vj/error.hpp"
#include "vj/service.hpp"

namespace vj::service {
namespace {

using ojson = nlohmann::ordered_json;

ojson slotsJson(const std::map<std::string, dialogue::SlotFill>& slots) {
  ojson out = ojson::object();
  for (const auto& [name, fill] : slots) {
    ojson s{{"text", fill.text}};
    s["node"] = fill.node ? ojson(*fill.node) : ojson(nullptr);
    s["salience"] = fill.salience ? ojson(*fill.salience) : ojson(nullptr);
    out[name] = std::move(s);
  }
  return out;
}

template <typename T>
T get(const nlohmann::json& j, const char* key, const T& fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("session config: field '") + key + "' has the wrong type");
  }
}

}  // namespace

ojson SessionEvent::toJson() const {
  return ojson{{"seq", seq}, {"at", at}, {"kind", kind}, {"payload", payload}};
}

SessionEvent SessionEvent::fromJson(const ojson& j) {
  if (!j.is_object()) throw FormatError("event is not an object");
  for (const char* key : {"seq", "at", "kind", "payload"}) {
    if (!j.contains(key)) throw FormatError(std::string("event lacks '") + key + "'");
  }
  SessionEvent e;
  try {
    e.seq = j.at("seq").get<std::uint64_t>();
    e.at = j.at("at").get<Millis>();
    e.kind = j.at("kind").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw FormatError("event field has the wrong type");
  }
  e.payload = j.at("payload");
  return e;
}

ojson utterancePayload(const std::string& text, const dialogue::UserTurn& turn) {
  ojson created = ojson::array();
  ojson attributes = ojson::array();
  ojson possessions = ojson::array();
  ojson aliases = ojson::array();
  const auto& x = turn.extraction;
  for (const auto& id : x.created) created.push_back(id);
  for (const auto& [id, adj] : x.attributes) attributes.push_back({{"node", id}, {"value", adj}});
  for (const auto& [owner, owned] : x.possessions) possessions.push_back({{"owner", owner}, {"owned", owned}});
  for (const auto& [id, alias] : x.aliases) aliases.push_back({{"node", id}, {"alias", alias}});
  ojson out{{"text", text},
            {"valence", {{"score", turn.valence.score}, {"label", affect::toString(turn.valence.label)}}},
            {"replyClass", dialogue::toString(turn.replyClass)}};
  if (turn.capturedName) out["userName"] = *turn.capturedName;
  out["extraction"] = {{"created", created},
                       {"attributes", attributes},
                       {"possessions", possessions},
                       {"aliases", aliases},
                       {"cooccurrences", x.cooccurrences}};
  return out;
}

ojson intentPayload(const dialogue::Candidate& c) {
  const auto& i = c.intent;
  ojson out{{"markup", i.serialize()},
            {"function", dialogue::toString(i.function)},
            {"text", i.text},
            {"emotion", affect::toString(i.emotion)},
            {"state", i.stateId},
            {"topic", c.targetTopic},
            {"responseId", i.responseId}};
  out["accentTokenIndex"] = i.accentTokenIndex ? ojson(*i.accentTokenIndex) : ojson(nullptr);
  out["route"] = dialogue::toString(c.route);
  out["slots"] = slotsJson(c.slots);
  return out;
}

ojson candidatesPayload(const std::vector<dialogue::Candidate>& candidates) {
  ojson list = ojson::array();
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const auto& c = candidates[k];
    ojson item{{"rank", k + 1},
               {"responseId", c.intent.responseId},
               {"state", c.intent.stateId},
               {"topic", c.targetTopic},
               {"route", dialogue::toString(c.route)},
               {"function", dialogue::toString(c.intent.function)},
               {"text", c.intent.text},
               {"emotion", affect::toString(c.intent.emotion)},
               {"knowledgeBacked", c.knowledgeBacked}};
    item["salience"] = c.salience ? ojson(*c.salience) : ojson(nullptr);
    item["slots"] = slotsJson(c.slots);
    item["markup"] = c.intent.serialize();
    list.push_back(std::move(item));
  }
  return ojson{{"candidates", list}};
}

std::string_view toString(Mode mode) {
  return mode == Mode::Wizard ? "wizard" : "auto";
}

ojson SessionConfig::toJson() const {
  return ojson{{"mode", toString(mode)},
               {"templatePath", templatePath.string()},
               {"lexiconPaths", {{"pos", lexiconPath.string()}, {"sentiment", sentimentPath.string()}}},
               {"timeoutMs", timeoutMs},
               {"targetDurationMs", targetDurationMs},
               {"seed", seed}};
}

SessionConfig SessionConfig::fromJson(const nlohmann::json& j, const SessionConfig& defaults) {
  if (j.is_null()) return defaults;
  if (!j.is_object()) throw ConfigError("session config must be a JSON object");
  SessionConfig c = defaults;
  const auto mode = get<std::string>(j, "mode", std::string(toString(defaults.mode)));
  if (mode == "auto") {
    c.mode = Mode::Auto;
  } else if (mode == "wizard") {
    c.mode = Mode::Wizard;
  } else {
    throw ConfigError("session config: mode must be 'auto' or 'wizard'");
  }
  c.templatePath = get<std::string>(j, "templatePath", defaults.templatePath.string());
  if (j.contains("lexiconPaths")) {
    const auto& lp = j.at("lexiconPaths");
    if (lp.is_object()) {
      c.lexiconPath = get<std::string>(lp, "pos", defaults.lexiconPath.string());
      c.sentimentPath = get<std::string>(lp, "sentiment", defaults.sentimentPath.string());
    } else if (lp.is_array() && lp.size() == 2 && lp[0].is_string() && lp[1].is_string()) {
      c.lexiconPath = lp[0].get<std::string>();
      c.sentimentPath = lp[1].get<std::string>();
    } else {
      throw ConfigError("session config: lexiconPaths must be {pos, sentiment} or a two-element array");
    }
  }
  c.timeoutMs = get<Millis>(j, "timeoutMs", defaults.timeoutMs);
  c.targetDurationMs = get<Millis>(j, "targetDurationMs", defaults.targetDurationMs);
  c.seed = get<std::uint64_t>(j, "seed", defaults.seed);
  if (c.timeoutMs <= 0) throw ConfigError("session config: timeoutMs must be positive");
  if (c.targetDurationMs < 0) throw ConfigError("session config: targetDurationMs must not be negative");
  return c;
}

dialogue::DialogueConfig SessionConfig::dialogueConfig() const {
  dialogue::DialogueConfig d;
  d.timeoutMs = timeoutMs;
  d.targetDurationMs = targetDurationMs;
  return d;
}

std::shared_ptr<const dialogue::Engine> loadEngine(const SessionConfig& config) {
  std::shared_ptr<const dialogue::TemplateSet> templates;
  try {
    templates = std::make_shared<const dialogue::TemplateSet>(dialogue::loadTemplates(config.templatePath));
  } catch (const dialogue::TemplateError& e) {
    throw ConfigError(config.templatePath.string() + ": " + e.what());
  }
  std::shared_ptr<const text::Lexicon> lexicon;
  std::shared_ptr<const affect::SentimentLexicon> sentiment;
  try {
    lexicon = std::make_shared<const text::Lexicon>(text::Lexicon::load(config.lexiconPath));
    sentiment = std::make_shared<const affect::SentimentLexicon>(
        affect::SentimentLexicon::load(config.sentimentPath));
  } catch (const FormatError& e) {
    throw ConfigError(e.what());
  }
  auto analyzer = std::make_shared<const text::Analyzer>(std::move(lexicon));
  return std::make_shared<const dialogue::Engine>(std::move(templates), std::move(analyzer),
                                                  std::move(sentiment), config.dialogueConfig());
}

}  // namespace vj::service
