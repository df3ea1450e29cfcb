#include <httplib.h>

#include "vj/error.hpp"
#include "vj/service.hpp"

namespace vj::service {
namespace {

void sendJson(httplib::Response& res, int status, const nlohmann::ordered_json& body) {
  res.status = status;
  res.set_content(body.dump() + "\n", "application/json");
}

void sendError(httplib::Response& res, int status, const std::string& code, const std::string& message) {
  sendJson(res, status, {{"error", code}, {"message", message}});
}

nlohmann::json body(const httplib::Request& req) {
  try {
    return nlohmann::json::parse(req.body.empty() ? std::string("{}") : req.body);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("request body is not JSON: ") + e.what());
  }
}

std::string stringField(const nlohmann::json& j, const char* key) {
  if (!j.is_object() || !j.contains(key) || !j.at(key).is_string()) {
    throw FormatError(std::string("request body needs a string '") + key + "'");
  }
  return j.at(key).get<std::string>();
}

// Maps library errors onto HTTP statuses.
template <typename F>
void guarded(httplib::Response& res, F&& f) {
  try {
    f();
  } catch (const NotFoundError& e) {
    sendError(res, 404, "not-found", e.what());
  } catch (const GoneError& e) {
    sendError(res, 410, "gone", e.what());
  } catch (const ConflictError& e) {
    sendError(res, 409, "conflict", e.what());
  } catch (const UnsupportedModeError& e) {
    sendError(res, 400, "unsupported-mode", e.what());
  } catch (const ConfigError& e) {
    sendError(res, 400, "config", e.what());
  } catch (const FormatError& e) {
    sendError(res, 400, "bad-request", e.what());
  } catch (const std::exception& e) {
    sendError(res, 500, "internal", e.what());
  }
}

}  // namespace

struct HttpServer::Impl {
  explicit Impl(SessionManager& m) : manager(m) {}

  SessionManager& manager;
  httplib::Server server;
  std::atomic<bool> stopping{false};
  std::thread sweeper;
  std::mutex sweepMu;
  std::condition_variable sweepCv;

  void routes() {
    server.set_post_routing_handler([](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Origin", "*");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    });
    server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    server.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { sendJson(res, 201, {{"id", manager.create(body(req))}}); });
    });
    server.Post(R"(/sessions/([^/]+)/utterance)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const auto seq = manager.postUtterance(req.matches[1], stringField(body(req), "text"));
        sendJson(res, 200, {{"seq", seq}});
      });
    });
    server.Post(R"(/sessions/([^/]+)/select)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const auto seq = manager.select(req.matches[1], stringField(body(req), "responseId"));
        sendJson(res, 200, {{"seq", seq}});
      });
    });
    server.Post(R"(/sessions/([^/]+)/close)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        manager.close(req.matches[1]);
        sendJson(res, 200, {{"closed", true}});
      });
    });
    server.Get(R"(/sessions/([^/]+)/events)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { stream(req, res); });
    });
  }

  void stream(const httplib::Request& req, httplib::Response& res) {
    auto session = manager.find(req.matches[1]);
    std::uint64_t from = 0;
    if (req.has_param("from")) {
      try {
        from = std::stoull(req.get_param_value("from"));
      } catch (const std::exception&) {
        throw FormatError("'from' must be a non-negative integer");
      }
    }
    // follow=0 returns what exists now instead of holding the connection.
    const bool follow = !(req.has_param("follow") && req.get_param_value("follow") == "0");
    if (!follow) {
      std::string out;
      for (const auto& e : session->eventsAfter(from)) out += e.wire() + "\n";
      res.set_content(out, "application/x-ndjson");
      return;
    }
    auto cursor = std::make_shared<std::uint64_t>(from);
    res.set_chunked_content_provider(
        "application/x-ndjson", [this, session, cursor](std::size_t, httplib::DataSink& sink) {
          while (!stopping) {
            const auto events = session->waitEventsAfter(*cursor, std::chrono::milliseconds(200));
            if (!events.empty()) {
              for (const auto& e : events) {
                const auto line = e.wire() + "\n";
                if (!sink.write(line.data(), line.size())) return false;
                *cursor = e.seq;
              }
              return true;
            }
            if (session->ended() && session->eventsAfter(*cursor).empty()) break;
            if (!sink.is_writable()) return false;
          }
          sink.done();
          return true;
        });
  }

  void sweep() {
    std::unique_lock lock(sweepMu);
    while (!stopping) {
      sweepCv.wait_for(lock, std::chrono::milliseconds(100));
      if (stopping) break;
      lock.unlock();
      try {
        manager.fireDueTimeouts();
      } catch (const std::exception&) {
        // One bad session must not stop timeouts for the rest.
      }
      lock.lock();
    }
  }
};

HttpServer::HttpServer(SessionManager& manager) : impl_(std::make_unique<Impl>(manager)) {
  impl_->routes();
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

void HttpServer::run() {
  impl_->stopping = false;
  impl_->sweeper = std::thread([this] { impl_->sweep(); });
  impl_->server.listen_after_bind();
}

void HttpServer::waitUntilReady() const { impl_->server.wait_until_ready(); }

void HttpServer::stop() {
  impl_->stopping = true;
  impl_->sweepCv.notify_all();
  impl_->server.stop();
  if (impl_->sweeper.joinable()) impl_->sweeper.join();
}

}  // namespace vj::service
