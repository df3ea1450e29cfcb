#pragma once

// Information-state dialogue manager: classifies each user reply, updates the
// knowledge base and picks the next agent intent from the template policy.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vj/affect.hpp"
#include "vj/intent.hpp"
#include "vj/knowledge.hpp"
#include "vj/templates.hpp"
#include "vj/textproc.hpp"

namespace vj::dialogue {

using kb::Millis;

enum class Speaker { User, Agent };

struct Utterance {
  Speaker speaker = Speaker::User;
  std::string text;
  Millis at = 0;
  std::string responseId;  // agent turns only
};

struct InformationState {
  Millis sessionClock = 0;
  std::vector<Utterance> history;
  std::string currentTopic;
  std::string currentState;
  std::uint32_t followUpsInTopic = 0;
  std::set<std::string> usedResponses;
  std::map<std::string, std::uint64_t> responseLastUsed;  // id -> agent turn number
  Millis lastUserInputAt = 0;
  Millis lastAgentOutputAt = 0;
  std::optional<std::string> userName;
  bool awaitingReply = false;
  std::set<std::string> exhaustedTopics;
  std::set<std::string> visitedTopics;
  std::vector<std::size_t> newNodesPerTurn;
  std::optional<affect::ValenceRecord> lastUserValence;
  std::uint64_t agentTurns = 0;
  bool started = false;
  bool closed = false;

  nlohmann::ordered_json toJson() const;
};

struct DialogueConfig {
  std::size_t informativeWords = 8;
  std::size_t complexWords = 40;
  std::size_t complexSentences = 2;
  std::uint32_t maxFollowUps = 3;
  std::size_t barrenTurns = 2;
  double minSalience = 0.0;
  Millis timeoutMs = 10000;
  Millis targetDurationMs = 300000;
  std::size_t candidateCount = 5;
};

/// Class of a user turn given the analysis and how many nodes it created.
/// Reads the state as it was before this turn.
ReplyClass classifyReply(const text::Analysis& analysis, std::size_t newNodes,
                         const InformationState& is, const DialogueConfig& config);

bool shouldClose(const InformationState& is, const DialogueConfig& config);

/// The user's name from a reply to the greeting, as (display form, lemma).
std::optional<std::pair<std::string, std::string>> captureName(const text::Analysis& analysis);

class ResponseChooser {
 public:
  explicit ResponseChooser(std::uint64_t seed) : rng_(seed) {}
  std::size_t pick(std::size_t n) { return static_cast<std::size_t>(rng_() % n); }

 private:
  std::mt19937_64 rng_;
};

struct Event {
  enum class Kind { SessionStart, Utterance, Timeout };
  Kind kind = Kind::Utterance;
  std::string text;
  Millis at = 0;
};

enum class Route { Greeting, Knowledge, Trigger, Transition, TopicSwitch, Timeout, Closing, Fallback };

std::string_view toString(Route route);

struct SlotFill {
  std::string text;
  std::optional<kb::NodeId> node;
  std::optional<double> salience;
};

struct Candidate {
  Route route = Route::Fallback;
  std::string targetTopic;
  std::string targetState;
  std::map<std::string, SlotFill> slots;
  IntentMarkup intent;
  bool knowledgeBacked = false;
  std::optional<double> salience;
};

struct UserTurn {
  text::Analysis analysis;
  affect::ValenceRecord valence;
  kb::IngestResult extraction;
  ReplyClass replyClass = ReplyClass::Sparse;
  std::optional<std::string> capturedName;
};

struct Plan {
  Event event;
  std::optional<UserTurn> user;
  /// Never empty. The first entry is what the engine itself would say.
  std::vector<Candidate> candidates;
};

struct SessionState {
  explicit SessionState(std::uint64_t seed) : chooser(seed) {}

  InformationState is;
  kb::KnowledgeBase kb;
  ResponseChooser chooser;
};

class Engine {
 public:
  Engine(std::shared_ptr<const TemplateSet> templates,
         std::shared_ptr<const text::Analyzer> analyzer,
         std::shared_ptr<const affect::SentimentLexicon> sentiment, DialogueConfig config);

  /// Applies the user side of `event` to the state and lists what the agent
  /// could say next.
  Plan plan(SessionState& session, const Event& event) const;

  /// Applies the agent side: the chosen candidate becomes the next intent.
  const IntentMarkup& commit(SessionState& session, const Plan& plan, std::size_t choice,
                             Millis at) const;

  struct Turn {
    Plan plan;
    IntentMarkup intent;
  };
  Turn advance(SessionState& session, const Event& event) const;

  const TemplateSet& templates() const { return *templates_; }
  const DialogueConfig& config() const { return config_; }

 private:
  struct Pool;

  std::vector<Candidate> greetCandidates(SessionState& s) const;
  std::vector<Candidate> timeoutCandidates(SessionState& s) const;
  std::vector<Candidate> closingCandidates(SessionState& s) const;
  std::vector<Candidate> replyCandidates(SessionState& s, const UserTurn& turn) const;
  std::vector<Candidate> choose(SessionState& s, std::vector<Pool> pools) const;
  std::vector<const Response*> eligible(const SessionState& s, const State& state,
                                        bool knowledgeOnly, bool plainOnly) const;
  Candidate render(const SessionState& s, const Response& r, const Pool& pool) const;

  std::shared_ptr<const TemplateSet> templates_;
  std::shared_ptr<const text::Analyzer> analyzer_;
  std::shared_ptr<const affect::SentimentLexicon> sentiment_;
  DialogueConfig config_;
};

}  // namespace vj::dialogue
