#include <algorithm>
#include <array>
#include <cctype>
#include <stdexcept>

#include "vj/error.hpp"
#include "vj/knowledge.hpp"

namespace vj::kb {
namespace {

using text::Pos;

// Nouns that carry no topical content of their own.
constexpr std::array<std::string_view, 11> kStopNouns = {
    "name", "thing", "stuff", "lot", "bit", "kind", "sort", "way", "time", "one", "something"};

bool isStopNoun(std::string_view name) {
  return std::find(kStopNouns.begin(), kStopNouns.end(), name) != kStopNouns.end();
}

std::string joinLemmas(const text::Analysis& a, const text::Span& span, bool nounsOnly) {
  std::string out;
  for (std::size_t i = span.begin; i < span.end; ++i) {
    const auto& t = a.tokens[i];
    if (nounsOnly && t.pos != Pos::Noun) continue;
    if (!out.empty()) out += ' ';
    out += t.lemma;
  }
  return out;
}

bool looksPlural(const text::Token& token) {
  if (token.pos != Pos::Noun || text::isPossessive(token)) return false;
  std::string lowered;
  for (char c : token.surface) lowered.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return lowered != token.lemma && lowered.ends_with('s');
}

struct Chunk {
  text::Span span;
  bool proper = false;
};

}  // namespace

double salienceScore(std::uint64_t freq, Millis timeSinceLast, double pref) {
  return (static_cast<double>(freq) - static_cast<double>(timeSinceLast) / 1000.0) * pref;
}

double nextPreference(double pref, double valence) {
  const double target = (valence + 1.0) / 2.0;
  return std::clamp(pref + kPreferenceRate * (target - pref), 0.0, 1.0);
}

const KBNode& KnowledgeBase::node(const NodeId& id) const {
  const auto it = byId_.find(id);
  if (it == byId_.end()) throw NotFoundError("unknown knowledge node: " + id);
  return nodes_[it->second];
}

KBNode& KnowledgeBase::mutableNode(const NodeId& id) {
  return const_cast<KBNode&>(static_cast<const KnowledgeBase&>(*this).node(id));
}

const KBNode* KnowledgeBase::findByName(std::string_view name) const {
  const auto it = byName_.find(std::string(name));
  return it == byName_.end() ? nullptr : &nodes_[byId_.at(it->second)];
}

void KnowledgeBase::index(const KBNode& node) {
  byId_.emplace(node.id, nodes_.size() - 1);
  byName_.emplace(node.canonicalName, node.id);
  for (const auto& alias : node.aliases) byName_.emplace(alias, node.id);
}

NodeId KnowledgeBase::addNode(std::string canonicalName, Millis now) {
  if (canonicalName.empty()) throw std::invalid_argument("node name must not be empty");
  if (findByName(canonicalName)) throw std::invalid_argument("node name already in use: " + canonicalName);
  KBNode node;
  do {
    node.id = "n" + std::to_string(nextId_++);
  } while (byId_.contains(node.id));
  node.canonicalName = std::move(canonicalName);
  node.lastMentionedAt = now;
  nodes_.push_back(std::move(node));
  index(nodes_.back());
  return nodes_.back().id;
}

void KnowledgeBase::recordMention(const NodeId& id, Millis now) {
  auto& n = mutableNode(id);
  if (now < n.lastMentionedAt) throw std::invalid_argument("mention time runs backwards");
  ++n.freq;
  n.lastMentionedAt = now;
}

void KnowledgeBase::setPreference(const NodeId& id, double pref) {
  if (!(pref >= 0.0 && pref <= 1.0)) throw std::invalid_argument("preference outside [0, 1]");
  mutableNode(id).pref = pref;
}

double KnowledgeBase::updatePreference(const NodeId& id, double valence) {
  auto& n = mutableNode(id);
  n.pref = nextPreference(n.pref, std::clamp(valence, -1.0, 1.0));
  return n.pref;
}

bool KnowledgeBase::addAlias(const NodeId& id, const std::string& alias) {
  if (alias.empty() || findByName(alias)) return false;
  auto& n = mutableNode(id);
  n.aliases.insert(alias);
  byName_.emplace(alias, id);
  return true;
}

NodeId KnowledgeBase::ensureSpeaker(Millis now) {
  if (!speaker_) {
    std::string name(kDefaultSpeakerName);
    if (findByName(name)) name = "speaker";
    speaker_ = addNode(std::move(name), now);
  }
  return *speaker_;
}

void KnowledgeBase::setSpeakerName(std::string name, Millis now) {
  if (name.empty()) return;
  const NodeId id = ensureSpeaker(now);
  auto& n = mutableNode(id);
  if (n.canonicalName == name) return;
  if (const auto* other = findByName(name); other && other->id != id) return;
  byName_.erase(n.canonicalName);
  n.aliases.erase(name);
  n.canonicalName = std::move(name);
  byName_.emplace(n.canonicalName, id);
}

std::size_t KnowledgeBase::minedNodeCount() const {
  return nodes_.size() - (speaker_ ? 1 : 0);
}

Millis KnowledgeBase::latestMention() const {
  Millis latest = 0;
  for (const auto& n : nodes_) latest = std::max(latest, n.lastMentionedAt);
  return latest;
}

SalienceScore KnowledgeBase::salience(const NodeId& id, Millis now) const {
  const auto& n = node(id);
  if (now < n.lastMentionedAt) throw std::invalid_argument("salience queried before last mention");
  return {id, salienceScore(n.freq, now - n.lastMentionedAt, n.pref), now};
}

std::vector<SalienceScore> KnowledgeBase::topSalient(std::size_t k, Millis now,
                                                     const std::set<NodeId>& excluding) const {
  std::vector<SalienceScore> scores;
  if (k == 0) return scores;
  for (const auto& n : nodes_) {
    if (n.id == speaker_ || excluding.contains(n.id)) continue;
    scores.push_back(salience(n.id, now));
  }
  // nodes_ is in creation order, so a stable sort breaks ties by age.
  std::stable_sort(scores.begin(), scores.end(),
                   [](const SalienceScore& a, const SalienceScore& b) { return a.score > b.score; });
  if (scores.size() > k) scores.resize(k);
  return scores;
}

double KnowledgeBase::meanSalience(Millis now) const {
  const auto all = topSalient(nodes_.size(), now);
  if (all.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& s : all) sum += s.score;
  return sum / static_cast<double>(all.size());
}

std::vector<text::Referent> KnowledgeBase::referents(Millis now) const {
  std::vector<text::Referent> out;
  for (const auto& s : topSalient(nodes_.size(), now)) {
    const auto& n = node(s.nodeId);
    out.push_back({n.canonicalName, n.anaphoraClass});
  }
  return out;
}

IngestResult KnowledgeBase::ingest(const text::Analysis& a, const affect::ValenceRecord& valence,
                                   Millis now) {
  IngestResult result;
  if (a.tokens.empty()) return result;
  if (now < latestMention()) throw std::invalid_argument("ingest time runs backwards");

  std::vector<Chunk> chunks;
  for (const auto& s : a.nounPhrases) chunks.push_back({s, false});
  for (const auto& s : a.properNouns) chunks.push_back({s, true});
  std::sort(chunks.begin(), chunks.end(),
            [](const Chunk& x, const Chunk& y) { return x.span.begin < y.span.begin; });

  std::vector<NodeId> touched;
  const auto touch = [&](const NodeId& id) {
    if (std::find(touched.begin(), touched.end(), id) == touched.end()) touched.push_back(id);
  };
  // Mined nodes mentioned per sentence, for co-occurrence.
  std::map<std::size_t, std::vector<NodeId>> bySentence;
  const auto mentioned = [&](std::size_t sentence, const NodeId& id) {
    auto& list = bySentence[sentence];
    if (std::find(list.begin(), list.end(), id) == list.end()) list.push_back(id);
    touch(id);
  };
  const auto mentionOrCreate = [&](const std::string& name) {
    if (const auto* existing = findByName(name)) {
      recordMention(existing->id, now);
      return existing->id;
    }
    const NodeId id = addNode(name, now);
    result.created.push_back(id);
    return id;
  };

  std::optional<Chunk> prev;
  std::optional<NodeId> prevNode;
  for (const auto& chunk : chunks) {
    const auto& span = chunk.span;
    const auto sentence = a.tokens[span.begin].sentence;
    const bool adjacent = prev && prev->span.end == span.begin &&
                          a.tokens[prev->span.begin].sentence == sentence;
    const bool prevPossessive = prev && text::isPossessive(a.tokens[prev->span.end - 1]);

    if (chunk.proper && adjacent && !prev->proper && !prevPossessive && prevNode) {
      // Appositive naming: "my dog Rex".
      const std::string name = joinLemmas(a, span, false);
      const auto* existing = findByName(name);
      if (!existing) {
        if (addAlias(*prevNode, name)) {
          result.aliases.emplace_back(*prevNode, name);
          touch(*prevNode);
        }
      } else if (existing->id != *prevNode && existing->id != speaker_) {
        recordMention(existing->id, now);
        mentioned(sentence, existing->id);
      }
      prev = chunk;
      continue;
    }

    const std::string name = joinLemmas(a, span, !chunk.proper);
    std::optional<NodeId> owner;
    const auto& first = a.tokens[span.begin];
    if (first.pos == Pos::Det && (first.lemma == "my" || first.lemma == "our")) {
      owner = ensureSpeaker(now);
    } else if (first.pos == Pos::Det && a.resolvedReferences.contains(first.index)) {
      if (const auto* n = findByName(a.resolvedReferences.at(first.index))) owner = n->id;
    } else if (adjacent && prevPossessive && prevNode) {
      owner = prevNode;
    }

    if (name.empty() || isStopNoun(name)) {
      prev = chunk;
      prevNode.reset();
      continue;
    }
    if (speaker_ && node(*speaker_).canonicalName == name) {
      prev = chunk;
      prevNode = speaker_;
      continue;
    }

    const NodeId id = mentionOrCreate(name);
    mentioned(sentence, id);
    auto& n = mutableNode(id);
    for (std::size_t i = span.begin; i < span.end; ++i) {
      if (a.tokens[i].pos == Pos::Adj) {
        n.attributes.push_back(a.tokens[i].lemma);
        result.attributes.emplace_back(id, a.tokens[i].lemma);
      }
    }
    const bool pluralDet = first.pos == Pos::Det && (first.lemma == "these" || first.lemma == "those");
    if (n.anaphoraClass == text::AnaphoraClass::SingularAny &&
        (pluralDet || (span.end > span.begin && looksPlural(a.tokens[span.end - 1])))) {
      n.anaphoraClass = text::AnaphoraClass::Plural;
    }
    if (owner && *owner != id) {
      if (mutableNode(*owner).possessions.insert(id).second) {
        result.possessions.emplace_back(*owner, id);
        touch(*owner);
      }
    }
    prev = chunk;
    prevNode = id;
  }

  for (const auto& [index, name] : a.resolvedReferences) {
    const auto* n = findByName(name);
    if (!n || n->id == speaker_) continue;
    const NodeId id = n->id;
    recordMention(id, now);
    mentioned(a.tokens[index].sentence, id);
    auto& target = mutableNode(id);
    if (target.anaphoraClass == text::AnaphoraClass::SingularAny) {
      const auto kind = text::thirdPersonPronoun(a.tokens[index].lemma);
      if (kind == text::PronounKind::Masc) target.anaphoraClass = text::AnaphoraClass::SingularMasc;
      if (kind == text::PronounKind::Fem) target.anaphoraClass = text::AnaphoraClass::SingularFem;
    }
  }

  for (const auto& [sentence, ids] : bySentence) {
    for (std::size_t i = 0; i < ids.size(); ++i) {
      for (std::size_t j = i + 1; j < ids.size(); ++j) {
        ++mutableNode(ids[i]).relatedTo[ids[j]];
        ++mutableNode(ids[j]).relatedTo[ids[i]];
        ++result.cooccurrences;
      }
    }
  }

  for (const auto& id : touched) {
    if (id != speaker_) updatePreference(id, valence.score);
  }
  result.changed = std::move(touched);
  return result;
}

}  // namespace vj::kb
