#include <poll.h>
#include <unistd.h>

#include <chrono>

#include "vj/cli.hpp"
#include "vj/error.hpp"

namespace vj::cli {
namespace {

class LineReader {
 public:
  explicit LineReader(int fd) : fd_(fd) {}

  // Waits up to `timeoutMs` (-1 forever). Returns a full line, nullopt on
  // timeout; sets eof() at end of input.
  std::optional<std::string> next(int timeoutMs) {
    if (auto line = take()) return line;
    if (eof_) return std::nullopt;
    pollfd p{fd_, POLLIN, 0};
    const int ready = ::poll(&p, 1, timeoutMs);
    if (ready <= 0) return std::nullopt;
    char buf[4096];
    const auto n = ::read(fd_, buf, sizeof buf);
    if (n <= 0) {
      eof_ = true;
      if (!buffer_.empty()) {
        std::string rest;
        rest.swap(buffer_);
        return rest;
      }
      return std::nullopt;
    }
    buffer_.append(buf, static_cast<std::size_t>(n));
    return take();
  }

  bool eof() const { return eof_ && buffer_.empty(); }

 private:
  std::optional<std::string> take() {
    const auto nl = buffer_.find('\n');
    if (nl == std::string::npos) return std::nullopt;
    std::string line = buffer_.substr(0, nl);
    buffer_.erase(0, nl + 1);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  }

  int fd_;
  std::string buffer_;
  bool eof_ = false;
};

}  // namespace

int chat(const service::SessionConfig& config, const std::optional<std::filesystem::path>& sessionDir,
         int inputFd, std::ostream& out) {
  auto engine = service::loadEngine(config);
  service::Session session("chat", config, std::move(engine), sessionDir);
  const auto origin = std::chrono::steady_clock::now();
  const auto now = [&] {
    return static_cast<Millis>(std::chrono::duration_cast<std::chrono::milliseconds>(
                                   std::chrono::steady_clock::now() - origin)
                                   .count());
  };

  std::uint64_t shown = 0;
  const auto show = [&] {
    for (const auto& e : session.eventsAfter(shown)) {
      shown = e.seq;
      if (e.kind == service::kind::kAgentIntent) {
        out << "agent: " << e.payload.value("text", std::string()) << " ["
            << e.payload.value("emotion", std::string()) << "]" << std::endl;
      }
    }
  };

  session.start(0);
  show();
  LineReader reader(inputFd);
  while (!session.ended()) {
    int wait = -1;
    if (const auto deadline = session.timeoutDeadline()) {
      wait = static_cast<int>(std::max<Millis>(0, *deadline - now()));
    }
    auto line = reader.next(wait);
    if (line) {
      session.postUtterance(*line, now());
    } else if (reader.eof()) {
      break;
    } else {
      session.fireTimeoutIfDue(now());
    }
    show();
  }
  session.close(now(), "user-exit");
  if (sessionDir) {
    const auto events = session.eventsAfter(0);
    std::ofstream txt(*sessionDir / "transcript.txt", std::ios::binary | std::ios::trunc);
    txt << renderTranscriptText(events);
  }
  return 0;
}

}  // namespace vj::cli
