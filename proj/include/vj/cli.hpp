#pragma once

// Operator commands: scripted replay on a virtual clock, transcript metrics,
// and the interactive terminal chat.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "vj/service.hpp"

namespace vj::cli {

using service::Millis;

struct ReplayStep {
  enum class Kind { Say, Silence };
  Kind kind = Kind::Say;
  std::string text;
  Millis delayMs = 0;  // afterMs for Say, the silence length otherwise
  std::size_t line = 0;
};

/// A JSON array of {"say": text, "afterMs": n} and {"silence": n} records.
/// Throws FormatError naming the offending line.
std::vector<ReplayStep> parseScript(std::string_view json, std::string_view origin = "<script>");
std::vector<ReplayStep> loadScript(const std::filesystem::path& path);

struct MetricsReport {
  std::uint64_t turns = 0;
  std::uint64_t agentTurns = 0;
  Millis durationMs = 0;
  std::uint64_t nodesCreated = 0;
  std::uint64_t attributesRecorded = 0;
  std::uint64_t possessionsRecorded = 0;
  std::uint64_t aliasesRecorded = 0;
  double meanSalienceAtClose = 0.0;
  std::uint64_t distinctResponsesUsed = 0;
  std::uint64_t exactRepetitions = 0;
  std::uint64_t timeoutsFired = 0;

  nlohmann::ordered_json toJson() const;
};

MetricsReport computeMetrics(std::span<const service::SessionEvent> events);
/// Throws FormatError naming the first malformed line.
std::vector<service::SessionEvent> readTranscript(const std::filesystem::path& path);
MetricsReport metricsFromFile(const std::filesystem::path& path);

/// "user: ..." and "agent: ... [emotion]" lines.
std::string renderTranscriptText(std::span<const service::SessionEvent> events);

struct ReplayResult {
  std::vector<service::SessionEvent> events;
  std::string transcriptText;
  MetricsReport metrics;
  nlohmann::ordered_json knowledge;
};

/// Runs the script against a fresh session on a virtual clock. With
/// `sessionDir`, writes transcript.jsonl, transcript.txt and kb.json there.
ReplayResult replay(std::span<const ReplayStep> script, const service::SessionConfig& config,
                    const std::optional<std::filesystem::path>& sessionDir = std::nullopt);

/// Interactive chat over `inputFd` with wall-clock timeouts. Returns the
/// process exit code.
int chat(const service::SessionConfig& config, const std::optional<std::filesystem::path>& sessionDir,
         int inputFd, std::ostream& out);

}  // namespace vj::cli
