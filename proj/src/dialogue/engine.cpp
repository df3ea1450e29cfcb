#include <algorithm>

#include "vj/dialogue.hpp"

namespace vj::dialogue {
namespace {

// Used only when the loaded templates leave a gap, so every event still gets
// an answer.
Response builtin(std::string id, std::string text, affect::Emotion emotion) {
  Response r;
  r.id = std::move(id);
  r.text = std::move(text);
  r.fixedEmotion = emotion;
  return r;
}

const Response& builtinContinue() {
  static const Response r = builtin("builtin-continue", "Tell me more about that.", affect::Emotion::Interested);
  return r;
}

const Response& builtinTimeout() {
  static const Response r =
      builtin("builtin-timeout", "Are you still there? Take your time.", affect::Emotion::Neutral);
  return r;
}

const Response& builtinClosing() {
  static const Response r =
      builtin("builtin-closing", "Thank you for chatting with me. Goodbye!", affect::Emotion::Happy);
  return r;
}

IntentFunction functionFor(ReplyClass cls) {
  switch (cls) {
    case ReplyClass::Informative: return IntentFunction::ProbeFollowup;
    case ReplyClass::Sparse: return IntentFunction::ElaborateRequest;
    case ReplyClass::Complex: return IntentFunction::RephraseRequest;
    case ReplyClass::Silence: return IntentFunction::TimeoutPrompt;
    case ReplyClass::Exhausted: return IntentFunction::TopicSwitch;
  }
  return IntentFunction::ProbeFollowup;
}

}  // namespace

std::string_view toString(Route route) {
  switch (route) {
    case Route::Greeting: return "greeting";
    case Route::Knowledge: return "knowledge";
    case Route::Trigger: return "trigger";
    case Route::Transition: return "transition";
    case Route::TopicSwitch: return "topic-switch";
    case Route::Timeout: return "timeout";
    case Route::Closing: return "closing";
    case Route::Fallback: return "fallback";
  }
  return "fallback";
}

struct Engine::Pool {
  Route route = Route::Fallback;
  std::string stateId;  // where the responses live
  std::string targetTopic;
  std::string targetState;
  IntentFunction function = IntentFunction::ProbeFollowup;
  std::vector<const Response*> members;
};

Engine::Engine(std::shared_ptr<const TemplateSet> templates,
               std::shared_ptr<const text::Analyzer> analyzer,
               std::shared_ptr<const affect::SentimentLexicon> sentiment, DialogueConfig config)
    : templates_(std::move(templates)),
      analyzer_(std::move(analyzer)),
      sentiment_(std::move(sentiment)),
      config_(config) {}

std::vector<const Response*> Engine::eligible(const SessionState& s, const State& state,
                                              bool knowledgeOnly, bool plainOnly) const {
  const auto top = s.kb.topSalient(2, s.is.sessionClock);
  std::vector<const Response*> out;
  for (const auto& r : state.responses) {
    if (knowledgeOnly && !r.requiresKnowledge) continue;
    if (plainOnly && r.requiresKnowledge) continue;
    if (r.requiresKnowledge) {
      const double need = r.minSalience.value_or(config_.minSalience);
      if (top.empty() || top[0].score < need) continue;
      if (r.slots.contains("Y") && top.size() < 2) continue;
    }
    out.push_back(&r);
  }
  return out;
}

Candidate Engine::render(const SessionState& s, const Response& r, const Pool& pool) const {
  Candidate c;
  c.route = pool.route;
  c.targetTopic = pool.targetTopic;
  c.targetState = pool.targetState;
  c.knowledgeBacked = r.requiresKnowledge;

  SlotValues values;
  if (s.is.userName) values["name"] = *s.is.userName;
  if (r.slots.contains("name")) c.slots["name"] = SlotFill{s.is.userName.value_or(""), std::nullopt, std::nullopt};
  if (r.slots.contains("X") || r.slots.contains("Y")) {
    const auto top = s.kb.topSalient(2, s.is.sessionClock);
    const char* names[] = {"X", "Y"};
    for (std::size_t k = 0; k < top.size(); ++k) {
      const auto& node = s.kb.node(top[k].nodeId);
      values[names[k]] = node.canonicalName;
      if (r.slots.contains(names[k])) {
        c.slots[names[k]] = SlotFill{node.canonicalName, node.id, top[k].score};
        if (!c.salience) c.salience = top[k].score;
      }
    }
  }
  const affect::ValenceRecord neutral;
  const auto emotion =
      affect::agentEmotion(s.is.lastUserValence.value_or(neutral), r.fixedEmotion, r.mirror);
  c.intent = renderIntent(r, values, emotion, pool.function, pool.stateId);
  return c;
}

std::vector<Candidate> Engine::choose(SessionState& s, std::vector<Pool> pools) const {
  std::erase_if(pools, [](const Pool& p) { return p.members.empty(); });
  std::vector<Candidate> out;
  if (pools.empty()) return out;

  const auto& is = s.is;
  const auto used = [&](const Response* r) { return is.usedResponses.contains(r->id); };
  const auto& primary = pools.front();
  std::vector<const Response*> fresh;
  for (const auto* r : primary.members) {
    if (!used(r)) fresh.push_back(r);
  }
  const Response* pick = nullptr;
  if (!fresh.empty()) {
    pick = fresh[s.chooser.pick(fresh.size())];
  } else {
    std::uint64_t oldest = UINT64_MAX;
    for (const auto* r : primary.members) {
      const auto it = is.responseLastUsed.find(r->id);
      const std::uint64_t when = it == is.responseLastUsed.end() ? 0 : it->second;
      if (when < oldest) {
        oldest = when;
        pick = r;
      }
    }
  }
  out.push_back(render(s, *pick, primary));

  std::vector<Candidate> others;
  std::set<std::string> seen{pick->id};
  for (const auto& pool : pools) {
    for (const auto* r : pool.members) {
      if (used(r) || !seen.insert(r->id).second) continue;
      others.push_back(render(s, *r, pool));
    }
  }
  std::stable_sort(others.begin(), others.end(), [](const Candidate& a, const Candidate& b) {
    if (a.knowledgeBacked != b.knowledgeBacked) return a.knowledgeBacked;
    return a.salience.value_or(-1e300) > b.salience.value_or(-1e300);
  });
  for (auto& c : others) {
    if (out.size() >= config_.candidateCount) break;
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<Candidate> Engine::greetCandidates(SessionState& s) const {
  const auto& topic = templates_->topics().front();
  Pool pool{Route::Greeting, topic.openerStateId, topic.id, topic.openerStateId,
            IntentFunction::Greet, eligible(s, templates_->state(topic.openerStateId), false, false)};
  return choose(s, {std::move(pool)});
}

std::vector<Candidate> Engine::timeoutCandidates(SessionState& s) const {
  const auto& is = s.is;
  std::vector<Pool> pools;
  const auto add = [&](const State& st) {
    pools.push_back({Route::Timeout, st.id, is.currentTopic, is.currentState,
                     IntentFunction::TimeoutPrompt, eligible(s, st, false, false)});
  };
  if (const auto* cur = templates_->findState(is.currentState)) {
    if (const auto it = cur->transitions.find(ReplyClass::Silence); it != cur->transitions.end()) {
      add(templates_->state(it->second));
    }
  }
  if (const auto* global = templates_->findState(kTimeoutState); global && global->global()) add(*global);
  pools.push_back({Route::Timeout, is.currentState, is.currentTopic, is.currentState,
                   IntentFunction::TimeoutPrompt, {&builtinTimeout()}});
  return choose(s, std::move(pools));
}

std::vector<Candidate> Engine::closingCandidates(SessionState& s) const {
  const auto& is = s.is;
  std::vector<Pool> pools;
  if (const auto* global = templates_->findState(kClosingState); global && global->global()) {
    pools.push_back({Route::Closing, global->id, is.currentTopic, is.currentState,
                     IntentFunction::Closing, eligible(s, *global, false, false)});
  }
  pools.push_back({Route::Closing, is.currentState, is.currentTopic, is.currentState,
                   IntentFunction::Closing, {&builtinClosing()}});
  return choose(s, std::move(pools));
}

std::vector<Candidate> Engine::replyCandidates(SessionState& s, const UserTurn& turn) const {
  const auto& is = s.is;
  const auto& t = *templates_;
  const auto cls = turn.replyClass;
  std::vector<Pool> pools;

  const State* target = nullptr;
  if (const auto* cur = t.findState(is.currentState)) {
    if (const auto it = cur->transitions.find(cls); it != cur->transitions.end()) {
      target = t.findState(it->second);
      if (target && target->global()) target = nullptr;
    }
  }
  const auto functionTowards = [&](const State& st) {
    const auto& topic = t.topic(st.topicId);
    if (topic.openerStateId == st.id && st.topicId != is.currentTopic) {
      return cls == ReplyClass::Exhausted ? IntentFunction::TopicSwitch : IntentFunction::ProbeOpen;
    }
    if (cls == ReplyClass::Exhausted) return IntentFunction::ProbeFollowup;
    // A state with nothing to follow up on is a fresh question.
    if (!st.requiresKnowledge() && cls != ReplyClass::Complex) return IntentFunction::ProbeOpen;
    return functionFor(cls);
  };

  if (target && target->requiresKnowledge()) {
    pools.push_back({Route::Knowledge, target->id, target->topicId, target->id,
                     functionTowards(*target), eligible(s, *target, true, false)});
  }

  std::set<std::string> lemmas;
  for (const auto& tok : turn.analysis.tokens) {
    if (text::isWord(tok)) lemmas.insert(tok.lemma);
  }
  for (const auto& id : t.stateOrder()) {
    const auto& st = t.state(id);
    // Mentioning the current topic again is not a reason to restart it.
    if (st.topicId == is.currentTopic || is.exhaustedTopics.contains(st.topicId)) continue;
    const bool hit = std::any_of(st.triggers.begin(), st.triggers.end(), [&](const auto& keywords) {
      return std::any_of(keywords.begin(), keywords.end(), [&](const std::string& k) {
        const auto forms = t.expand(k);
        return std::any_of(forms.begin(), forms.end(),
                           [&](const std::string& f) { return lemmas.contains(f); });
      });
    });
    if (!hit) continue;
    auto members = eligible(s, st, false, false);
    if (members.empty()) continue;
    pools.push_back({Route::Trigger, st.id, st.topicId, st.id, IntentFunction::ProbeOpen,
                     std::move(members)});
    break;
  }

  if (target) {
    pools.push_back({Route::Transition, target->id, target->topicId, target->id,
                     functionTowards(*target), eligible(s, *target, false, true)});
  }

  // Topic preference: fresh topics first, then unexhausted ones, then any.
  std::vector<const Topic*> order;
  const auto& topics = t.topics();
  const auto consider = [&](auto accept) {
    for (const auto& topic : topics) {
      if (topic.id == is.currentTopic || !accept(topic)) continue;
      if (std::find(order.begin(), order.end(), &topic) == order.end()) order.push_back(&topic);
    }
  };
  consider([&](const Topic& x) { return !is.visitedTopics.contains(x.id) && !is.exhaustedTopics.contains(x.id); });
  consider([&](const Topic& x) { return !is.exhaustedTopics.contains(x.id); });
  consider([](const Topic&) { return true; });
  for (const auto* topic : order) {
    auto members = eligible(s, t.state(topic->openerStateId), false, false);
    if (members.empty()) continue;
    pools.push_back({Route::TopicSwitch, topic->openerStateId, topic->id, topic->openerStateId,
                     IntentFunction::TopicSwitch, std::move(members)});
    break;
  }

  pools.push_back({Route::Fallback, is.currentState, is.currentTopic, is.currentState,
                   functionFor(cls == ReplyClass::Exhausted ? ReplyClass::Sparse : cls),
                   {&builtinContinue()}});
  return choose(s, std::move(pools));
}

Plan Engine::plan(SessionState& s, const Event& event) const {
  auto& is = s.is;
  Plan plan{event, std::nullopt, {}};
  const Millis now = std::max(event.at, is.sessionClock);
  plan.event.at = now;
  is.sessionClock = now;
  const auto& first = templates_->topics().front();
  if (!is.started) {
    is.started = true;
    is.currentTopic = first.id;
    is.currentState = first.openerStateId;
    is.visitedTopics.insert(first.id);
  }

  switch (event.kind) {
    case Event::Kind::SessionStart:
      plan.candidates = greetCandidates(s);
      break;
    case Event::Kind::Timeout:
      plan.candidates = is.closed ? closingCandidates(s) : timeoutCandidates(s);
      break;
    case Event::Kind::Utterance: {
      if (is.closed) {
        plan.candidates = closingCandidates(s);
        break;
      }
      UserTurn turn;
      const auto referents = s.kb.referents(now);
      turn.analysis = analyzer_->analyze(event.text, referents);
      turn.valence = affect::valence(turn.analysis.tokens, *sentiment_);
      if (!is.userName && is.currentState == first.openerStateId) {
        if (auto name = captureName(turn.analysis)) {
          is.userName = name->first;
          turn.capturedName = name->first;
          s.kb.setSpeakerName(name->second, now);
        }
      }
      turn.extraction = s.kb.ingest(turn.analysis, turn.valence, now);
      const auto created = turn.extraction.created.size();
      turn.replyClass = classifyReply(turn.analysis, created, is, config_);
      is.newNodesPerTurn.push_back(created);
      is.history.push_back({Speaker::User, event.text, now, {}});
      is.lastUserInputAt = now;
      is.lastUserValence = turn.valence;
      is.awaitingReply = false;
      if (turn.replyClass == ReplyClass::Exhausted) is.exhaustedTopics.insert(is.currentTopic);
      plan.candidates = shouldClose(is, config_) ? closingCandidates(s) : replyCandidates(s, turn);
      plan.user = std::move(turn);
      break;
    }
  }
  return plan;
}

const IntentMarkup& Engine::commit(SessionState& s, const Plan& plan, std::size_t choice,
                                   Millis at) const {
  const auto& c = plan.candidates.at(choice);
  auto& is = s.is;
  const Millis now = std::max(at, is.sessionClock);
  is.sessionClock = now;
  is.usedResponses.insert(c.intent.responseId);
  is.responseLastUsed[c.intent.responseId] = ++is.agentTurns;
  switch (c.route) {
    case Route::Timeout:
      break;
    case Route::Closing:
      is.closed = true;
      break;
    case Route::Greeting:
      is.followUpsInTopic = 0;
      is.currentTopic = c.targetTopic;
      is.currentState = c.targetState;
      break;
    default:
      is.followUpsInTopic = c.targetTopic == is.currentTopic ? is.followUpsInTopic + 1 : 0;
      is.currentTopic = c.targetTopic;
      is.currentState = c.targetState;
      break;
  }
  is.visitedTopics.insert(is.currentTopic);
  is.history.push_back({Speaker::Agent, c.intent.text, now, c.intent.responseId});
  is.lastAgentOutputAt = now;
  is.awaitingReply = !is.closed;
  return c.intent;
}

Engine::Turn Engine::advance(SessionState& s, const Event& event) const {
  Turn turn{plan(s, event), {}};
  turn.intent = commit(s, turn.plan, 0, turn.plan.event.at);
  return turn;
}

}  // namespace vj::dialogue
