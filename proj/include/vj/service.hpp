#pragma once

// Session hosting: event log, persistence, server-side timeouts, wizard
// selection, and the HTTP/NDJSON front end.

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "vj/dialogue.hpp"

namespace vj::service {

using dialogue::Millis;

namespace kind {
inline constexpr std::string_view kSessionStart = "session-start";
inline constexpr std::string_view kUserUtterance = "user-utterance";
inline constexpr std::string_view kAgentIntent = "agent-intent";
inline constexpr std::string_view kWizardCandidates = "wizard-candidates";
inline constexpr std::string_view kWizardSelection = "wizard-selection";
inline constexpr std::string_view kTimeout = "timeout";
inline constexpr std::string_view kSessionEnd = "session-end";
}  // namespace kind

struct SessionEvent {
  std::uint64_t seq = 0;
  Millis at = 0;
  std::string kind;
  nlohmann::ordered_json payload;

  nlohmann::ordered_json toJson() const;
  /// One NDJSON line without the newline.
  std::string wire() const { return toJson().dump(); }
  /// Throws FormatError.
  static SessionEvent fromJson(const nlohmann::ordered_json& j);
};

nlohmann::ordered_json utterancePayload(const std::string& text, const dialogue::UserTurn& turn);
nlohmann::ordered_json intentPayload(const dialogue::Candidate& c);
nlohmann::ordered_json candidatesPayload(const std::vector<dialogue::Candidate>& candidates);

enum class Mode { Auto, Wizard };
std::string_view toString(Mode mode);

struct SessionConfig {
  Mode mode = Mode::Auto;
  std::filesystem::path templatePath;
  std::filesystem::path lexiconPath;
  std::filesystem::path sentimentPath;
  Millis timeoutMs = 10000;
  Millis targetDurationMs = 300000;
  std::uint64_t seed = 0;

  nlohmann::ordered_json toJson() const;
  /// Fields missing from `j` keep the values of `defaults`. Throws ConfigError.
  static SessionConfig fromJson(const nlohmann::json& j, const SessionConfig& defaults);
  dialogue::DialogueConfig dialogueConfig() const;
};

/// Loads templates and lexicons; unreadable or invalid files raise ConfigError.
std::shared_ptr<const dialogue::Engine> loadEngine(const SessionConfig& config);

/// One conversation. All times are session milliseconds supplied by the
/// caller, so the same code runs under a wall clock or a virtual one.
/// Thread-safe; every mutation goes through one lock.
class Session {
 public:
  /// `dir`, when set, receives config.json, transcript.jsonl and kb.json.
  Session(std::string id, SessionConfig config, std::shared_ptr<const dialogue::Engine> engine,
          std::optional<std::filesystem::path> dir = std::nullopt);

  /// Rebuilds a session by replaying its persisted transcript.
  static std::unique_ptr<Session> recover(std::string id, const std::filesystem::path& dir);

  void start(Millis at);
  /// Returns the seq of the user-utterance event. Throws GoneError once ended.
  std::uint64_t postUtterance(const std::string& text, Millis at);
  /// Wizard mode only. Returns the seq of the wizard-selection event.
  std::uint64_t select(const std::string& responseId, Millis at);
  /// When the pending timeout fires, if one is armed.
  std::optional<Millis> timeoutDeadline() const;
  /// Fires the armed timeout when `now` has reached it.
  bool fireTimeoutIfDue(Millis now);
  void close(Millis at, const std::string& reason);

  std::vector<SessionEvent> eventsAfter(std::uint64_t seq) const;
  /// Blocks until events past `seq` exist, the session ends, or `maxWait`
  /// passes.
  std::vector<SessionEvent> waitEventsAfter(std::uint64_t seq, std::chrono::milliseconds maxWait) const;

  const std::string& id() const { return id_; }
  const SessionConfig& config() const { return config_; }
  bool ended() const;
  Millis lastEventAt() const;
  nlohmann::ordered_json informationState() const;
  nlohmann::ordered_json knowledgeSnapshot() const;

 private:
  struct Replaying {};
  Session(Replaying, std::string id, SessionConfig config,
          std::shared_ptr<const dialogue::Engine> engine, std::filesystem::path dir);

  std::uint64_t append(std::string_view kind, nlohmann::ordered_json payload, Millis at);
  void handle(const dialogue::Event& event);
  void emit(std::size_t choice, Millis at);
  void finish(Millis at, const std::string& reason);
  void openTranscript(std::ios::openmode mode);

  std::string id_;
  SessionConfig config_;
  std::shared_ptr<const dialogue::Engine> engine_;
  std::optional<std::filesystem::path> dir_;

  mutable std::mutex mu_;
  mutable std::condition_variable changed_;
  dialogue::SessionState state_;
  std::optional<dialogue::Plan> pending_;
  std::vector<SessionEvent> events_;
  std::ofstream transcript_;
  bool started_ = false;
  bool ended_ = false;
};

/// Millisecond time source for the session manager.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual Millis nowMs() const = 0;
};

class SystemClock : public Clock {
 public:
  Millis nowMs() const override;
};

class ManualClock : public Clock {
 public:
  Millis nowMs() const override { return now_.load(); }
  void set(Millis t) { now_.store(t); }
  void advance(Millis dt) { now_.fetch_add(dt); }

 private:
  std::atomic<Millis> now_{0};
};

struct ServerConfig {
  std::filesystem::path sessionsRoot = "sessions";
  SessionConfig defaults;
};

class SessionManager {
 public:
  SessionManager(ServerConfig config, std::shared_ptr<Clock> clock);

  /// Throws ConfigError for a bad config; no directory is created then.
  std::string create(const nlohmann::json& config);
  std::uint64_t postUtterance(const std::string& id, const std::string& text);
  std::uint64_t select(const std::string& id, const std::string& responseId);
  void close(const std::string& id);
  std::vector<SessionEvent> eventsAfter(const std::string& id, std::uint64_t seq) const;
  std::shared_ptr<Session> find(const std::string& id) const;  // throws NotFoundError

  /// Fires every timeout whose deadline has passed; returns how many fired.
  std::size_t fireDueTimeouts();
  /// Reloads sessions persisted under the sessions root; returns how many.
  std::size_t recover();

 private:
  struct Entry {
    std::shared_ptr<Session> session;
    Millis origin = 0;  // clock reading at session ms 0
  };
  Millis sessionTime(const Entry& e) const { return clock_->nowMs() - e.origin; }
  Entry entry(const std::string& id) const;

  ServerConfig config_;
  std::shared_ptr<Clock> clock_;
  mutable std::mutex mu_;
  std::map<std::string, Entry> sessions_;
};

/// HTTP front end over a SessionManager, with a background timeout sweeper.
class HttpServer {
 public:
  explicit HttpServer(SessionManager& manager);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds; port 0 picks a free port. Returns the bound port or -1.
  int bind(const std::string& host, int port);
  /// Serves until stop(); call after bind().
  void run();
  /// Blocks until run() is accepting connections.
  void waitUntilReady() const;
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace vj::service
