#include <sstream>

#include "vj/error.hpp"
#include "vj/service.hpp"

namespace vj::service {
namespace {

using ojson = nlohmann::ordered_json;

const char* kConfigFile = "config.json";
const char* kTranscriptFile = "transcript.jsonl";
const char* kKnowledgeFile = "kb.json";

std::string readFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

Session::Session(std::string id, SessionConfig config, std::shared_ptr<const dialogue::Engine> engine,
                 std::optional<std::filesystem::path> dir)
    : id_(std::move(id)),
      config_(std::move(config)),
      engine_(std::move(engine)),
      dir_(std::move(dir)),
      state_(config_.seed) {
  if (dir_) {
    std::filesystem::create_directories(*dir_);
    std::ofstream cfg(*dir_ / kConfigFile, std::ios::binary | std::ios::trunc);
    cfg << config_.toJson().dump(2) << '\n';
    if (!cfg) throw Error("cannot write " + (*dir_ / kConfigFile).string());
    openTranscript(std::ios::trunc);
  }
}

Session::Session(Replaying, std::string id, SessionConfig config,
                 std::shared_ptr<const dialogue::Engine> engine, std::filesystem::path dir)
    : id_(std::move(id)),
      config_(std::move(config)),
      engine_(std::move(engine)),
      dir_(std::move(dir)),
      state_(config_.seed) {}

void Session::openTranscript(std::ios::openmode mode) {
  transcript_.open(*dir_ / kTranscriptFile, std::ios::binary | std::ios::out | mode);
  if (!transcript_) throw Error("cannot write " + (*dir_ / kTranscriptFile).string());
}

std::uint64_t Session::append(std::string_view kind, ojson payload, Millis at) {
  SessionEvent e{events_.size() + 1, at, std::string(kind), std::move(payload)};
  if (transcript_.is_open()) {
    transcript_ << e.wire() << '\n';
    transcript_.flush();
  }
  events_.push_back(std::move(e));
  changed_.notify_all();
  return events_.back().seq;
}

void Session::handle(const dialogue::Event& event) {
  pending_ = engine_->plan(state_, event);
  const auto at = pending_->event.at;
  if (event.kind == dialogue::Event::Kind::Utterance && pending_->user) {
    append(kind::kUserUtterance, utterancePayload(event.text, *pending_->user), at);
  } else if (event.kind == dialogue::Event::Kind::Utterance) {
    append(kind::kUserUtterance, ojson{{"text", event.text}}, at);
  }
  if (config_.mode == Mode::Auto) {
    emit(0, at);
  } else {
    append(kind::kWizardCandidates, candidatesPayload(pending_->candidates), at);
  }
}

void Session::emit(std::size_t choice, Millis at) {
  const auto& candidate = pending_->candidates.at(choice);
  const auto& intent = engine_->commit(state_, *pending_, choice, at);
  append(kind::kAgentIntent, intentPayload(candidate), at);
  const bool closing = intent.function == dialogue::IntentFunction::Closing;
  pending_.reset();
  if (closing) finish(at, "closing");
}

void Session::finish(Millis at, const std::string& reason) {
  if (ended_) return;
  ended_ = true;
  pending_.reset();
  append(kind::kSessionEnd,
         ojson{{"reason", reason},
               {"kb",
                {{"nodes", state_.kb.minedNodeCount()}, {"meanSalience", state_.kb.meanSalience(at)}}}},
         at);
  if (dir_) state_.kb.save(*dir_ / kKnowledgeFile);
}

void Session::start(Millis at) {
  std::lock_guard lock(mu_);
  if (started_) throw ConflictError("session already started");
  started_ = true;
  append(kind::kSessionStart,
         ojson{{"mode", toString(config_.mode)},
               {"seed", config_.seed},
               {"timeoutMs", config_.timeoutMs},
               {"targetDurationMs", config_.targetDurationMs}},
         at);
  handle({dialogue::Event::Kind::SessionStart, "", at});
}

std::uint64_t Session::postUtterance(const std::string& text, Millis at) {
  std::lock_guard lock(mu_);
  if (ended_) throw GoneError("session " + id_ + " has ended");
  if (!started_) throw ConflictError("session not started");
  at = std::max(at, events_.back().at);
  // A newer utterance supersedes candidates the wizard has not picked from.
  handle({dialogue::Event::Kind::Utterance, text, at});
  for (auto it = events_.rbegin(); it != events_.rend(); ++it) {
    if (it->kind == kind::kUserUtterance) return it->seq;
  }
  return events_.back().seq;
}

std::uint64_t Session::select(const std::string& responseId, Millis at) {
  std::lock_guard lock(mu_);
  if (config_.mode != Mode::Wizard) throw UnsupportedModeError("session " + id_ + " is not in wizard mode");
  if (ended_) throw GoneError("session " + id_ + " has ended");
  if (!pending_) throw ConflictError("no candidates are awaiting a selection");
  const auto& candidates = pending_->candidates;
  std::size_t choice = candidates.size();
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    if (candidates[k].intent.responseId == responseId) choice = k;
  }
  if (choice == candidates.size()) {
    throw ConflictError("response '" + responseId + "' is not among the latest candidates");
  }
  at = std::max(at, events_.back().at);
  const auto seq = append(kind::kWizardSelection, ojson{{"responseId", responseId}, {"rank", choice + 1}}, at);
  emit(choice, at);
  return seq;
}

std::optional<Millis> Session::timeoutDeadline() const {
  std::lock_guard lock(mu_);
  if (ended_ || pending_ || !state_.is.awaitingReply) return std::nullopt;
  return state_.is.lastAgentOutputAt + config_.timeoutMs;
}

bool Session::fireTimeoutIfDue(Millis now) {
  std::lock_guard lock(mu_);
  if (ended_ || pending_ || !state_.is.awaitingReply) return false;
  const Millis deadline = state_.is.lastAgentOutputAt + config_.timeoutMs;
  if (now < deadline) return false;
  append(kind::kTimeout, ojson{{"afterMs", config_.timeoutMs}}, deadline);
  handle({dialogue::Event::Kind::Timeout, "", deadline});
  return true;
}

void Session::close(Millis at, const std::string& reason) {
  std::lock_guard lock(mu_);
  if (ended_) return;
  finish(std::max(at, events_.empty() ? at : events_.back().at), reason);
}

std::vector<SessionEvent> Session::eventsAfter(std::uint64_t seq) const {
  std::lock_guard lock(mu_);
  if (seq >= events_.size()) return {};
  return {events_.begin() + static_cast<std::ptrdiff_t>(seq), events_.end()};
}

std::vector<SessionEvent> Session::waitEventsAfter(std::uint64_t seq,
                                                   std::chrono::milliseconds maxWait) const {
  std::unique_lock lock(mu_);
  changed_.wait_for(lock, maxWait, [&] { return events_.size() > seq || ended_; });
  if (seq >= events_.size()) return {};
  return {events_.begin() + static_cast<std::ptrdiff_t>(seq), events_.end()};
}

bool Session::ended() const {
  std::lock_guard lock(mu_);
  return ended_;
}

Millis Session::lastEventAt() const {
  std::lock_guard lock(mu_);
  return events_.empty() ? 0 : events_.back().at;
}

ojson Session::informationState() const {
  std::lock_guard lock(mu_);
  return state_.is.toJson();
}

ojson Session::knowledgeSnapshot() const {
  std::lock_guard lock(mu_);
  return state_.kb.snapshot();
}

std::unique_ptr<Session> Session::recover(std::string id, const std::filesystem::path& dir) {
  nlohmann::json cfgJson;
  try {
    cfgJson = nlohmann::json::parse(readFile(dir / kConfigFile));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError((dir / kConfigFile).string() + ": " + e.what());
  }
  auto config = SessionConfig::fromJson(cfgJson, SessionConfig{});
  auto engine = loadEngine(config);
  std::unique_ptr<Session> s(new Session(Replaying{}, std::move(id), std::move(config), std::move(engine), dir));

  // A crash can leave a partial final line; everything before it is intact.
  const auto text = readFile(dir / kTranscriptFile);
  std::vector<SessionEvent> records;
  std::size_t pos = 0;
  std::size_t lineNo = 0;
  while (pos < text.size()) {
    const auto eol = text.find('\n', pos);
    if (eol == std::string::npos) break;
    ++lineNo;
    const auto line = text.substr(pos, eol - pos);
    pos = eol + 1;
    try {
      records.push_back(SessionEvent::fromJson(nlohmann::ordered_json::parse(line)));
    } catch (const std::exception& e) {
      throw FormatError((dir / kTranscriptFile).string() + ":" + std::to_string(lineNo) + ": " + e.what());
    }
  }

  using K = dialogue::Event::Kind;
  for (auto& r : records) {
    if (r.seq != s->events_.size() + 1) {
      throw FormatError((dir / kTranscriptFile).string() + ": seq " + std::to_string(r.seq) + " out of order");
    }
    const auto& e = s->engine_;
    if (r.kind == kind::kSessionStart) {
      s->started_ = true;
      s->events_.push_back(std::move(r));
      s->pending_ = e->plan(s->state_, {K::SessionStart, "", s->events_.back().at});
      continue;
    }
    if (r.kind == kind::kUserUtterance) {
      s->pending_ = e->plan(s->state_, {K::Utterance, r.payload.at("text").get<std::string>(), r.at});
    } else if (r.kind == kind::kTimeout) {
      s->pending_ = e->plan(s->state_, {K::Timeout, "", r.at});
    } else if (r.kind == kind::kAgentIntent) {
      if (!s->pending_) throw FormatError("agent-intent without a preceding event at seq " + std::to_string(r.seq));
      const auto rid = r.payload.at("responseId").get<std::string>();
      const auto& cs = s->pending_->candidates;
      std::size_t choice = cs.size();
      for (std::size_t k = 0; k < cs.size(); ++k) {
        if (cs[k].intent.responseId == rid) choice = k;
      }
      if (choice == cs.size()) {
        throw FormatError("transcript diverges from the engine at seq " + std::to_string(r.seq));
      }
      e->commit(s->state_, *s->pending_, choice, r.at);
      s->pending_.reset();
    } else if (r.kind == kind::kSessionEnd) {
      s->ended_ = true;
      s->pending_.reset();
    }
    s->events_.push_back(std::move(r));
  }

  // Rewrite the intact prefix, then carry on appending to it.
  s->openTranscript(std::ios::trunc);
  for (const auto& ev : s->events_) s->transcript_ << ev.wire() << '\n';
  s->transcript_.flush();

  if (!s->ended_ && !s->events_.empty()) {
    const Millis at = s->events_.back().at;
    if (s->pending_ && s->config_.mode == Mode::Auto) {
      s->emit(0, at);
    } else if (s->pending_ && s->events_.back().kind != kind::kWizardCandidates) {
      s->append(kind::kWizardCandidates, candidatesPayload(s->pending_->candidates), at);
    } else if (s->state_.is.closed) {
      s->finish(at, "closing");
    }
  }
  return s;
}

}  // namespace vj::service
