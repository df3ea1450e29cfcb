#include <csignal>
#include <fstream>
#include <sstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "vj/cli.hpp"
#include "vj/error.hpp"
#include "vj/templates.hpp"

namespace {

namespace fs = std::filesystem;
using vj::service::SessionConfig;

struct Options {
  std::string templates = std::string(VJ_DATA_DIR) + "/alice.vjt";
  std::string lexicon = std::string(VJ_DATA_DIR) + "/lexicon.tsv";
  std::string sentiment = std::string(VJ_DATA_DIR) + "/sentiment.tsv";
  vj::service::Millis timeoutMs = 10000;
  vj::service::Millis targetDurationMs = 300000;
  std::uint64_t seed = 0;
  std::string sessionDir;
  std::string listen = "127.0.0.1:8080";
  std::string script;
  std::string transcript;
  std::string templateFile;

  SessionConfig config() const {
    SessionConfig c;
    c.templatePath = templates;
    c.lexiconPath = lexicon;
    c.sentimentPath = sentiment;
    c.timeoutMs = timeoutMs;
    c.targetDurationMs = targetDurationMs;
    c.seed = seed;
    if (c.timeoutMs <= 0) throw vj::ConfigError("--timeout-ms must be positive");
    return c;
  }

  std::optional<fs::path> dir() const {
    if (sessionDir.empty()) return std::nullopt;
    return fs::path(sessionDir);
  }
};

int checkTemplates(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot read templates: " << path << "\n";
    return 2;
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const auto diagnostics = vj::dialogue::checkTemplates(buffer.str());
  if (!diagnostics.empty()) {
    for (const auto& d : diagnostics) std::cerr << path << ":" << d.str() << "\n";
    return 1;
  }
  const auto set = vj::dialogue::parseTemplates(buffer.str());
  std::cout << "ok: " << set.topics().size() << " topics, " << set.stateCount() << " states, "
            << set.responseCount() << " responses\n";
  return 0;
}

int serve(const Options& o) {
  const auto colon = o.listen.rfind(':');
  if (colon == std::string::npos) throw vj::ConfigError("--listen must be host:port");
  const auto host = o.listen.substr(0, colon);
  const int port = std::stoi(o.listen.substr(colon + 1));

  vj::service::ServerConfig sc;
  sc.sessionsRoot = o.sessionDir.empty() ? fs::path("sessions") : fs::path(o.sessionDir);
  sc.defaults = o.config();
  vj::service::loadEngine(sc.defaults);  // fail fast on bad default paths

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  vj::service::SessionManager manager(sc, std::make_shared<vj::service::SystemClock>());
  const auto recovered = manager.recover();
  vj::service::HttpServer server(manager);
  const int bound = server.bind(host, port);
  if (bound < 0) {
    std::cerr << "error: cannot listen on " << o.listen << "\n";
    return 1;
  }
  std::cerr << "listening on http://" << host << ":" << bound << " (" << recovered
            << " sessions recovered)" << std::endl;
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  });
  server.run();
  // run() may also return on its own; wake the waiter so it can exit.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Virtual journalist: an interviewing dialogue agent"};
  app.require_subcommand(1);

  const auto shared = [&](CLI::App* cmd) {
    cmd->add_option("--templates", o.templates, "Dialogue template file")->envname("VJ_TEMPLATES");
    cmd->add_option("--lexicon", o.lexicon, "Part-of-speech lexicon")->envname("VJ_LEXICON");
    cmd->add_option("--sentiment", o.sentiment, "Sentiment lexicon")->envname("VJ_SENTIMENT");
    cmd->add_option("--timeout-ms", o.timeoutMs, "Silence before a timeout prompt")->envname("VJ_TIMEOUT_MS");
    cmd->add_option("--target-duration-ms", o.targetDurationMs, "Interview length before closing")
        ->envname("VJ_TARGET_DURATION_MS");
    cmd->add_option("--seed", o.seed, "Response chooser seed")->envname("VJ_SEED");
    cmd->add_option("--session-dir", o.sessionDir, "Where transcripts and snapshots go")
        ->envname("VJ_SESSION_DIR");
  };

  auto* chatCmd = app.add_subcommand("chat", "Interactive terminal interview");
  shared(chatCmd);
  auto* serveCmd = app.add_subcommand("serve", "HTTP session server");
  shared(serveCmd);
  serveCmd->add_option("--listen", o.listen, "host:port")->envname("VJ_LISTEN");
  auto* replayCmd = app.add_subcommand("replay", "Run a scripted interview on a virtual clock");
  shared(replayCmd);
  replayCmd->add_option("script", o.script, "Replay script (JSON)")->required();
  auto* metricsCmd = app.add_subcommand("metrics", "Summarize a transcript.jsonl");
  metricsCmd->add_option("transcript", o.transcript, "Transcript file")->required();
  auto* checkCmd = app.add_subcommand("check-templates", "Validate a template file");
  checkCmd->add_option("file", o.templateFile, "Template file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*checkCmd) return checkTemplates(o.templateFile);
    if (*metricsCmd) {
      std::cout << vj::cli::metricsFromFile(o.transcript).toJson().dump(2) << "\n";
      return 0;
    }
    if (*replayCmd) {
      const auto script = vj::cli::loadScript(o.script);
      const auto result = vj::cli::replay(script, o.config(), o.dir());
      std::cout << result.metrics.toJson().dump(2) << "\n";
      return 0;
    }
    if (*chatCmd) return vj::cli::chat(o.config(), o.dir(), 0, std::cout);
    if (*serveCmd) return serve(o);
  } catch (const vj::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
