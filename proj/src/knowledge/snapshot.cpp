#include <fstream>
#include <sstream>

#include "vj/error.hpp"
#include "vj/knowledge.hpp"

namespace vj::kb {
namespace {

using json = nlohmann::json;

[[noreturn]] void bad(std::size_t index, const std::string& id, const std::string& what) {
  std::ostringstream msg;
  msg << "knowledge snapshot: nodes[" << index << "]";
  if (!id.empty()) msg << " (id " << id << ")";
  msg << ": " << what;
  throw FormatError(msg.str());
}

template <typename T>
T field(const json& record, const char* key, std::size_t index, const std::string& id) {
  if (!record.contains(key)) bad(index, id, std::string("missing field '") + key + "'");
  try {
    return record.at(key).get<T>();
  } catch (const json::exception&) {
    bad(index, id, std::string("field '") + key + "' has the wrong type");
  }
}

}  // namespace

nlohmann::ordered_json KnowledgeBase::snapshot() const {
  nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
  for (const auto& n : nodes_) {
    nlohmann::ordered_json related = nlohmann::ordered_json::object();
    for (const auto& [id, count] : n.relatedTo) related[id] = count;
    nodes.push_back({
        {"id", n.id},
        {"canonicalName", n.canonicalName},
        {"aliases", n.aliases},
        {"attributes", n.attributes},
        {"possessions", n.possessions},
        {"relatedTo", related},
        {"freq", n.freq},
        {"lastMentionedAt", n.lastMentionedAt},
        {"pref", n.pref},
        {"anaphoraClass", std::string(text::toString(n.anaphoraClass))},
    });
  }
  nlohmann::ordered_json out;
  out["version"] = kSnapshotVersion;
  out["nodes"] = std::move(nodes);
  out["speaker"] = speaker_ ? nlohmann::ordered_json(*speaker_) : nlohmann::ordered_json(nullptr);
  return out;
}

KnowledgeBase KnowledgeBase::restore(const json& data) {
  if (!data.is_object()) throw FormatError("knowledge snapshot: top level must be an object");
  if (!data.contains("version") || data.at("version") != kSnapshotVersion) {
    throw FormatError("knowledge snapshot: unsupported or missing version");
  }
  if (!data.contains("nodes") || !data.at("nodes").is_array()) {
    throw FormatError("knowledge snapshot: missing 'nodes' array");
  }

  KnowledgeBase kb;
  const auto& records = data.at("nodes");
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (!r.is_object()) bad(i, "", "record is not an object");
    KBNode n;
    n.id = field<std::string>(r, "id", i, "");
    n.canonicalName = field<std::string>(r, "canonicalName", i, n.id);
    n.aliases = field<std::set<std::string>>(r, "aliases", i, n.id);
    n.attributes = field<std::vector<std::string>>(r, "attributes", i, n.id);
    n.possessions = field<std::set<NodeId>>(r, "possessions", i, n.id);
    n.relatedTo = field<std::map<NodeId, std::uint64_t>>(r, "relatedTo", i, n.id);
    n.freq = field<std::uint64_t>(r, "freq", i, n.id);
    n.lastMentionedAt = field<Millis>(r, "lastMentionedAt", i, n.id);
    n.pref = field<double>(r, "pref", i, n.id);
    const auto cls = text::parseAnaphoraClass(field<std::string>(r, "anaphoraClass", i, n.id));
    if (!cls) bad(i, n.id, "unknown anaphoraClass");
    n.anaphoraClass = *cls;

    if (n.id.empty() || n.canonicalName.empty()) bad(i, n.id, "empty id or canonicalName");
    if (n.freq < 1) bad(i, n.id, "freq must be at least 1");
    if (!(n.pref >= 0.0 && n.pref <= 1.0)) bad(i, n.id, "pref outside [0, 1]");
    if (n.aliases.contains(n.canonicalName)) bad(i, n.id, "canonicalName repeated among aliases");
    if (kb.byId_.contains(n.id)) bad(i, n.id, "duplicate id");
    if (kb.findByName(n.canonicalName)) bad(i, n.id, "name already used by another node");
    for (const auto& alias : n.aliases) {
      if (kb.findByName(alias)) bad(i, n.id, "alias '" + alias + "' already used by another node");
    }
    kb.nodes_.push_back(std::move(n));
    kb.index(kb.nodes_.back());
  }
  for (std::size_t i = 0; i < kb.nodes_.size(); ++i) {
    const auto& n = kb.nodes_[i];
    for (const auto& id : n.possessions) {
      if (!kb.byId_.contains(id)) bad(i, n.id, "possession references unknown node " + id);
    }
    for (const auto& [id, count] : n.relatedTo) {
      if (!kb.byId_.contains(id)) bad(i, n.id, "relatedTo references unknown node " + id);
    }
  }
  if (data.contains("speaker") && !data.at("speaker").is_null()) {
    if (!data.at("speaker").is_string() || !kb.byId_.contains(data.at("speaker").get<std::string>())) {
      throw FormatError("knowledge snapshot: speaker references unknown node");
    }
    kb.speaker_ = data.at("speaker").get<std::string>();
  }
  kb.nextId_ = kb.nodes_.size() + 1;
  return kb;
}

KnowledgeBase KnowledgeBase::restoreText(std::string_view text) {
  json data;
  try {
    data = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("knowledge snapshot: ") + e.what());
  }
  return restore(data);
}

void KnowledgeBase::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write knowledge snapshot: " + path.string());
  out << snapshot().dump(2) << '\n';
}

KnowledgeBase KnowledgeBase::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot read knowledge snapshot: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return restoreText(buffer.str());
}

}  // namespace vj::kb
