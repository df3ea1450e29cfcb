#include <fstream>
#include <sstream>

#include "vj/cli.hpp"
#include "vj/error.hpp"

namespace vj::cli {
namespace {

// Line on which each top-level array element starts, so that errors found
// after parsing can still point into the file.
std::vector<std::size_t> elementLines(std::string_view text) {
  std::vector<std::size_t> lines;
  std::size_t line = 1;
  int depth = 0;
  bool inString = false;
  bool escaped = false;
  bool expectElement = false;
  for (char c : text) {
    if (c == '\n') ++line;
    if (inString) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        inString = false;
      }
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') continue;
    if (depth == 1 && expectElement && c != ']') {
      lines.push_back(line);
      expectElement = false;
    }
    if (c == '"') inString = true;
    if (c == '[' || c == '{') {
      ++depth;
      if (depth == 1) expectElement = true;
    } else if (c == ']' || c == '}') {
      --depth;
    } else if (c == ',' && depth == 1) {
      expectElement = true;
    }
  }
  return lines;
}

std::size_t lineOfOffset(std::string_view text, std::size_t offset) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

[[noreturn]] void bad(std::string_view origin, std::size_t line, const std::string& what) {
  std::ostringstream msg;
  msg << origin << ":" << line << ": " << what;
  throw FormatError(msg.str());
}

Millis delay(const nlohmann::json& v, std::string_view origin, std::size_t line, const char* key) {
  if (!v.is_number_integer() && !v.is_number_unsigned()) bad(origin, line, std::string("'") + key + "' must be an integer");
  const auto ms = v.get<Millis>();
  if (ms < 0) bad(origin, line, std::string("'") + key + "' must not be negative");
  return ms;
}

}  // namespace

std::vector<ReplayStep> parseScript(std::string_view text, std::string_view origin) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    bad(origin, lineOfOffset(text, e.byte == 0 ? 0 : e.byte - 1), e.what());
  }
  if (!doc.is_array()) bad(origin, 1, "script must be a JSON array of steps");
  if (doc.empty()) bad(origin, 1, "script has no steps");
  const auto lines = elementLines(text);
  std::vector<ReplayStep> steps;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& s = doc[i];
    const std::size_t line = i < lines.size() ? lines[i] : 1;
    if (!s.is_object()) bad(origin, line, "step is not an object");
    ReplayStep step;
    step.line = line;
    if (s.contains("say") && !s.contains("silence")) {
      if (!s.at("say").is_string()) bad(origin, line, "'say' must be a string");
      step.kind = ReplayStep::Kind::Say;
      step.text = s.at("say").get<std::string>();
      step.delayMs = s.contains("afterMs") ? delay(s.at("afterMs"), origin, line, "afterMs") : 0;
    } else if (s.contains("silence") && !s.contains("say")) {
      step.kind = ReplayStep::Kind::Silence;
      step.delayMs = delay(s.at("silence"), origin, line, "silence");
    } else {
      bad(origin, line, "step needs exactly one of 'say' or 'silence'");
    }
    steps.push_back(std::move(step));
  }
  return steps;
}

std::vector<ReplayStep> loadScript(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot read script: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parseScript(buffer.str(), path.string());
}

ReplayResult replay(std::span<const ReplayStep> script, const service::SessionConfig& config,
                    const std::optional<std::filesystem::path>& sessionDir) {
  auto engine = service::loadEngine(config);
  service::Session session("replay", config, std::move(engine), sessionDir);
  Millis now = 0;
  session.start(now);
  for (const auto& step : script) {
    const Millis target = now + step.delayMs;
    while (!session.ended()) {
      const auto deadline = session.timeoutDeadline();
      if (!deadline || *deadline > target) break;
      session.fireTimeoutIfDue(*deadline);
    }
    now = target;
    if (session.ended()) break;
    if (step.kind == ReplayStep::Kind::Say) session.postUtterance(step.text, now);
  }
  if (!session.ended()) session.close(now, "script-end");

  ReplayResult result;
  result.events = session.eventsAfter(0);
  result.transcriptText = renderTranscriptText(result.events);
  result.metrics = computeMetrics(result.events);
  result.knowledge = session.knowledgeSnapshot();
  if (sessionDir) {
    std::ofstream txt(*sessionDir / "transcript.txt", std::ios::binary | std::ios::trunc);
    txt << result.transcriptText;
    if (!txt) throw Error("cannot write " + (*sessionDir / "transcript.txt").string());
  }
  return result;
}

}  // namespace vj::cli
