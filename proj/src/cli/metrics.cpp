#include <fstream>
#include <set>
#include <sstream>

#include "vj/cli.hpp"
#include "vj/error.hpp"

namespace vj::cli {

nlohmann::ordered_json MetricsReport::toJson() const {
  return {{"turns", turns},
          {"agentTurns", agentTurns},
          {"durationMs", durationMs},
          {"nodesCreated", nodesCreated},
          {"attributesRecorded", attributesRecorded},
          {"possessionsRecorded", possessionsRecorded},
          {"aliasesRecorded", aliasesRecorded},
          {"meanSalienceAtClose", meanSalienceAtClose},
          {"distinctResponsesUsed", distinctResponsesUsed},
          {"exactRepetitions", exactRepetitions},
          {"timeoutsFired", timeoutsFired}};
}

MetricsReport computeMetrics(std::span<const service::SessionEvent> events) {
  namespace k = service::kind;
  MetricsReport m;
  std::set<std::string> texts;
  std::set<std::string> responses;
  const auto count = [](const nlohmann::ordered_json& x, const char* key) -> std::uint64_t {
    return x.contains(key) && x.at(key).is_array() ? x.at(key).size() : 0;
  };
  for (const auto& e : events) {
    m.durationMs = std::max(m.durationMs, e.at);
    if (e.kind == k::kUserUtterance) {
      ++m.turns;
      if (e.payload.contains("extraction")) {
        const auto& x = e.payload.at("extraction");
        m.nodesCreated += count(x, "created");
        m.attributesRecorded += count(x, "attributes");
        m.possessionsRecorded += count(x, "possessions");
        m.aliasesRecorded += count(x, "aliases");
      }
    } else if (e.kind == k::kAgentIntent) {
      ++m.agentTurns;
      const auto text = e.payload.value("text", std::string());
      if (!texts.insert(text).second) ++m.exactRepetitions;
      responses.insert(e.payload.value("responseId", std::string()));
    } else if (e.kind == k::kTimeout) {
      ++m.timeoutsFired;
    } else if (e.kind == k::kSessionEnd && e.payload.contains("kb")) {
      m.meanSalienceAtClose = e.payload.at("kb").value("meanSalience", 0.0);
    }
  }
  m.distinctResponsesUsed = responses.size();
  return m;
}

std::vector<service::SessionEvent> readTranscript(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot read transcript: " + path.string());
  std::vector<service::SessionEvent> events;
  std::string line;
  std::size_t lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (line.empty()) continue;
    try {
      events.push_back(service::SessionEvent::fromJson(nlohmann::ordered_json::parse(line)));
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg << path.string() << ": line " << lineNo << ": " << e.what();
      throw FormatError(msg.str());
    }
  }
  return events;
}

MetricsReport metricsFromFile(const std::filesystem::path& path) {
  const auto events = readTranscript(path);
  return computeMetrics(events);
}

std::string renderTranscriptText(std::span<const service::SessionEvent> events) {
  std::string out;
  for (const auto& e : events) {
    if (e.kind == service::kind::kUserUtterance) {
      out += "user: " + e.payload.value("text", std::string()) + "\n";
    } else if (e.kind == service::kind::kAgentIntent) {
      out += "agent: " + e.payload.value("text", std::string()) + " [" +
             e.payload.value("emotion", std::string()) + "]\n";
    }
  }
  return out;
}

}  // namespace vj::cli
