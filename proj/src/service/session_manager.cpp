#include <random>

#include "vj/error.hpp"
#include "vj/service.hpp"

namespace vj::service {
namespace {

std::string randomId() {
  static std::mutex mu;
  static std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard lock(mu);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string id;
  auto bits = rng();
  for (int i = 0; i < 16; ++i, bits >>= 4) id.push_back(kHex[bits & 0xf]);
  return id;
}

}  // namespace

Millis SystemClock::nowMs() const {
  using namespace std::chrono;
  return duration_cast<milliseconds>(steady_clock::now().time_since_epoch()).count();
}

SessionManager::SessionManager(ServerConfig config, std::shared_ptr<Clock> clock)
    : config_(std::move(config)), clock_(std::move(clock)) {}

std::string SessionManager::create(const nlohmann::json& configJson) {
  auto config = SessionConfig::fromJson(configJson, config_.defaults);
  auto engine = loadEngine(config);
  std::string id;
  {
    std::lock_guard lock(mu_);
    do {
      id = randomId();
    } while (sessions_.contains(id) || std::filesystem::exists(config_.sessionsRoot / id));
  }
  auto session = std::make_shared<Session>(id, std::move(config), std::move(engine),
                                           config_.sessionsRoot / id);
  Entry e{session, clock_->nowMs()};
  {
    std::lock_guard lock(mu_);
    sessions_.emplace(id, e);
  }
  session->start(0);
  return id;
}

SessionManager::Entry SessionManager::entry(const std::string& id) const {
  std::lock_guard lock(mu_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw NotFoundError("unknown session: " + id);
  return it->second;
}

std::shared_ptr<Session> SessionManager::find(const std::string& id) const {
  return entry(id).session;
}

std::uint64_t SessionManager::postUtterance(const std::string& id, const std::string& text) {
  const auto e = entry(id);
  // A timeout that came due before the user spoke still happened first.
  e.session->fireTimeoutIfDue(sessionTime(e));
  return e.session->postUtterance(text, sessionTime(e));
}

std::uint64_t SessionManager::select(const std::string& id, const std::string& responseId) {
  const auto e = entry(id);
  return e.session->select(responseId, sessionTime(e));
}

void SessionManager::close(const std::string& id) {
  const auto e = entry(id);
  e.session->close(sessionTime(e), "closed");
}

std::vector<SessionEvent> SessionManager::eventsAfter(const std::string& id, std::uint64_t seq) const {
  return find(id)->eventsAfter(seq);
}

std::size_t SessionManager::fireDueTimeouts() {
  std::vector<Entry> all;
  {
    std::lock_guard lock(mu_);
    for (const auto& [id, e] : sessions_) all.push_back(e);
  }
  std::size_t fired = 0;
  for (const auto& e : all) {
    while (e.session->fireTimeoutIfDue(sessionTime(e))) ++fired;
  }
  return fired;
}

std::size_t SessionManager::recover() {
  std::error_code ec;
  if (!std::filesystem::is_directory(config_.sessionsRoot, ec)) return 0;
  std::size_t count = 0;
  for (const auto& dirent : std::filesystem::directory_iterator(config_.sessionsRoot)) {
    if (!dirent.is_directory()) continue;
    const auto id = dirent.path().filename().string();
    {
      std::lock_guard lock(mu_);
      if (sessions_.contains(id)) continue;
    }
    if (!std::filesystem::exists(dirent.path() / "transcript.jsonl")) continue;
    std::shared_ptr<Session> session = Session::recover(id, dirent.path());
    // The session clock resumes where the transcript stopped.
    Entry e{session, clock_->nowMs() - session->lastEventAt()};
    std::lock_guard lock(mu_);
    sessions_.emplace(id, e);
    ++count;
  }
  return count;
}

}  // namespace vj::service
