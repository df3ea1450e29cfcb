#pragma once

// Declarative dialogue policy: topics, states with response pools, keyword
// triggers, reply-class transitions and synonyms, read from a line-oriented
// DSL.
//
//   topic <id>
//   state <id>
//   response <id> "<text with {name}/{X}/{Y}>" [emotion=<label>] [mirror]
//            [accent=<slot>] [requires-knowledge] [min-salience=<real>]
//   trigger <lemma>[,<lemma>...]
//   on <replyclass> -> <state-id>
//   synonym <lemma>: <lemma>[,<lemma>...]
//
// States declared before the first `topic` line are global: `timeout` and
// `closing` supply the silence prompts and the closing line.

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "vj/affect.hpp"
#include "vj/error.hpp"

namespace vj::dialogue {

enum class ReplyClass { Informative, Sparse, Complex, Silence, Exhausted };

std::string_view toString(ReplyClass cls);
std::optional<ReplyClass> parseReplyClass(std::string_view name);

inline constexpr std::string_view kTimeoutState = "timeout";
inline constexpr std::string_view kClosingState = "closing";

struct Response {
  std::string id;
  std::string text;
  std::optional<affect::Emotion> fixedEmotion;
  bool mirror = false;
  std::optional<std::string> accentSlot;
  bool requiresKnowledge = false;
  std::optional<double> minSalience;
  std::set<std::string> slots;  // slot names referenced by `text`
  std::size_t line = 0;
};

struct State {
  std::string id;
  std::string topicId;  // empty for global states
  std::vector<Response> responses;
  std::vector<std::vector<std::string>> triggers;
  std::map<ReplyClass, std::string> transitions;
  std::size_t line = 0;

  bool global() const { return topicId.empty(); }
  bool requiresKnowledge() const;
};

struct Topic {
  std::string id;
  std::string openerStateId;
  std::vector<std::string> stateIds;
};

struct Diagnostic {
  std::size_t line = 0;
  std::size_t column = 0;
  std::string message;

  std::string str() const;
};

class TemplateError : public Error {
 public:
  explicit TemplateError(std::vector<Diagnostic> diagnostics);
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

class TemplateSet {
 public:
  const std::vector<Topic>& topics() const { return topics_; }
  const Topic& topic(std::string_view id) const;
  std::size_t topicIndex(std::string_view id) const;

  const State* findState(std::string_view id) const;
  const State& state(std::string_view id) const;
  /// Topic states in file order.
  const std::vector<std::string>& stateOrder() const { return stateOrder_; }

  const Response* findResponse(std::string_view id) const;

  /// The keyword itself plus every synonym related to it in either direction.
  std::set<std::string> expand(std::string_view keyword) const;
  const std::map<std::string, std::set<std::string>>& synonyms() const { return synonyms_; }

  std::size_t stateCount() const { return states_.size(); }
  std::size_t responseCount() const { return responseState_.size(); }

 private:
  friend struct TemplateParser;

  std::vector<Topic> topics_;
  std::map<std::string, State, std::less<>> states_;
  std::vector<std::string> stateOrder_;
  std::map<std::string, std::string, std::less<>> responseState_;
  std::map<std::string, std::set<std::string>> synonyms_;
};

/// Every syntax and validation problem in `source`; empty when it is valid.
std::vector<Diagnostic> checkTemplates(std::string_view source);

/// Throws TemplateError carrying all diagnostics.
TemplateSet parseTemplates(std::string_view source);

/// Throws ConfigError when the file cannot be read.
TemplateSet loadTemplates(const std::filesystem::path& path);

}  // namespace vj::dialogue
