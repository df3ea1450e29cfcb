#pragma once

// Per-session knowledge base mined from user utterances, with recency and
// preference weighted salience ranking.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "vj/affect.hpp"
#include "vj/textproc.hpp"

namespace vj::kb {

using Millis = std::int64_t;
using NodeId = std::string;

inline constexpr double kDefaultPreference = 0.5;
inline constexpr double kPreferenceRate = 0.3;
inline constexpr int kSnapshotVersion = 1;

struct KBNode {
  NodeId id;
  std::string canonicalName;
  std::set<std::string> aliases;
  std::vector<std::string> attributes;  // multiset, insertion order
  std::set<NodeId> possessions;
  std::map<NodeId, std::uint64_t> relatedTo;
  std::uint64_t freq = 1;
  Millis lastMentionedAt = 0;
  double pref = kDefaultPreference;
  text::AnaphoraClass anaphoraClass = text::AnaphoraClass::SingularAny;

  friend bool operator==(const KBNode&, const KBNode&) = default;
};

struct SalienceScore {
  NodeId nodeId;
  double score = 0.0;
  Millis at = 0;
};

/// score = (freq - timeSinceLast / 1000) * pref, timeSinceLast in
/// milliseconds. Negative values are meaningful (stale nodes) and kept.
double salienceScore(std::uint64_t freq, Millis timeSinceLast, double pref);

/// Moves `pref` a fixed fraction toward the valence rescaled to [0, 1].
double nextPreference(double pref, double valence);

struct IngestResult {
  std::vector<NodeId> changed;
  std::vector<NodeId> created;
  std::vector<std::pair<NodeId, std::string>> attributes;
  std::vector<std::pair<NodeId, NodeId>> possessions;  // (owner, owned)
  std::vector<std::pair<NodeId, std::string>> aliases;
  std::size_t cooccurrences = 0;
};

class KnowledgeBase {
 public:
  /// Name the speaker node carries until the user introduces themselves.
  static constexpr std::string_view kDefaultSpeakerName = "user";

  IngestResult ingest(const text::Analysis& analysis, const affect::ValenceRecord& valence,
                      Millis now);

  SalienceScore salience(const NodeId& id, Millis now) const;

  /// Highest scores first; ties go to the earlier-created node. The speaker
  /// node is never ranked.
  std::vector<SalienceScore> topSalient(std::size_t k, Millis now,
                                        const std::set<NodeId>& excluding = {}) const;

  double updatePreference(const NodeId& id, double valence);

  /// Antecedent candidates for pronoun resolution, most salient first.
  std::vector<text::Referent> referents(Millis now) const;

  NodeId addNode(std::string canonicalName, Millis now);
  void recordMention(const NodeId& id, Millis now);
  void setPreference(const NodeId& id, double pref);

  void setSpeakerName(std::string name, Millis now);
  std::optional<NodeId> speaker() const { return speaker_; }

  const KBNode& node(const NodeId& id) const;
  const KBNode* findByName(std::string_view name) const;
  const std::vector<KBNode>& nodes() const { return nodes_; }
  std::size_t minedNodeCount() const;
  Millis latestMention() const;

  /// Mean salience over mined (non-speaker) nodes; 0 for an empty base.
  double meanSalience(Millis now) const;

  nlohmann::ordered_json snapshot() const;
  static KnowledgeBase restore(const nlohmann::json& data);
  static KnowledgeBase restoreText(std::string_view text);
  void save(const std::filesystem::path& path) const;
  static KnowledgeBase load(const std::filesystem::path& path);

  friend bool operator==(const KnowledgeBase& a, const KnowledgeBase& b) {
    return a.nodes_ == b.nodes_ && a.speaker_ == b.speaker_;
  }

 private:
  KBNode& mutableNode(const NodeId& id);
  NodeId ensureSpeaker(Millis now);
  bool addAlias(const NodeId& id, const std::string& alias);
  void index(const KBNode& node);

  std::vector<KBNode> nodes_;
  std::unordered_map<NodeId, std::size_t> byId_;
  std::unordered_map<std::string, NodeId> byName_;
  std::optional<NodeId> speaker_;
  std::uint64_t nextId_ = 1;
};

}  // namespace vj::kb
