#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <sstream>
#include <thread>

#include "support.hpp"
#include "vj/error.hpp"

using namespace vj;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"(topic intro
state greet
  response hello "Hi there, who are you?" emotion=happy
  on informative -> ask
state ask
  response ask_plain "Go on."
)";

std::string script(const std::string& name) { return test::dataPath("scripts/" + name).string(); }

std::string quoted(const fs::path& p) { return "'" + p.string() + "'"; }

std::vector<std::string> agentLines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("agent: ", 0) == 0) out.push_back(line);
  }
  return out;
}

std::size_t countKind(const std::vector<service::SessionEvent>& events, std::string_view kind) {
  std::size_t n = 0;
  for (const auto& e : events) n += e.kind == kind;
  return n;
}

}  // namespace

TEST_CASE("check-templates") {
  test::TempDir tmp;
  auto r = test::runJournalist("check-templates " + test::dataPath("alice.vjt").string());
  CHECK(r.exitCode == 0);
  CHECK(r.out.rfind("ok: ", 0) == 0);

  test::writeFile(tmp / "dangling.vjt", std::string(kMinimal) + "  on sparse -> nowhere\n");
  r = test::runJournalist("check-templates " + quoted(tmp / "dangling.vjt"));
  CHECK(r.exitCode == 1);
  CHECK(r.err.find("state 'ask'") != std::string::npos);
  CHECK(r.err.find("nowhere") != std::string::npos);

  test::writeFile(tmp / "dup.vjt", std::string(kMinimal) + "  response hello \"Again\"\n");
  r = test::runJournalist("check-templates " + quoted(tmp / "dup.vjt"));
  CHECK(r.exitCode == 1);
  CHECK(r.err.find("duplicate response id 'hello'") != std::string::npos);

  r = test::runJournalist("check-templates " + quoted(tmp / "missing.vjt"));
  CHECK(r.exitCode == 2);
}

TEST_CASE("replay of the demo script is byte-identical across runs") {
  test::TempDir a, b;
  const auto ra = test::runJournalist("replay --seed 7 --session-dir " + quoted(a.path()) + " " + script("demo.json"));
  const auto rb = test::runJournalist("replay --seed 7 --session-dir " + quoted(b.path()) + " " + script("demo.json"));
  REQUIRE(ra.exitCode == 0);
  REQUIRE(rb.exitCode == 0);
  const auto ta = test::readFile(a / "transcript.jsonl");
  CHECK_FALSE(ta.empty());
  CHECK(ta == test::readFile(b / "transcript.jsonl"));
  CHECK(test::readFile(a / "transcript.txt") == test::readFile(b / "transcript.txt"));
  CHECK(ra.out == rb.out);
  CHECK(nlohmann::json::parse(ra.out).at("exactRepetitions") == 0);

  // The metrics command recomputes the same report from the file alone.
  const auto m = test::runJournalist("metrics " + quoted(a / "transcript.jsonl"));
  CHECK(m.exitCode == 0);
  CHECK(m.out == ra.out);
}

TEST_CASE("one ten second silence fires exactly one timeout") {
  const auto steps = cli::parseScript(R"([{"silence": 10000}])");
  const auto result = cli::replay(steps, test::bundledConfig(7));
  CHECK(countKind(result.events, service::kind::kTimeout) == 1);
  CHECK(result.metrics.timeoutsFired == 1);

  // Just short of the threshold nothing fires.
  const auto shorter = cli::replay(cli::parseScript(R"([{"silence": 9999}])"), test::bundledConfig(7));
  CHECK(shorter.metrics.timeoutsFired == 0);
}

TEST_CASE("hiking script creates knowledge and the agent asks about hiking") {
  const auto result = cli::replay(cli::loadScript(script("hiking.json")), test::bundledConfig(3));
  CHECK(result.metrics.nodesCreated >= 1);
  bool mentioned = false;
  for (const auto& line : agentLines(result.transcriptText)) {
    mentioned = mentioned || line.find("hiking") != std::string::npos;
  }
  CHECK(mentioned);
}

TEST_CASE("metrics of a just-opened session") {
  test::TempDir tmp;
  service::Session session("s", test::bundledConfig(7), test::bundledEngine(), tmp.path());
  session.start(0);
  const auto r = test::runJournalist("metrics " + quoted(tmp / "transcript.jsonl"));
  REQUIRE(r.exitCode == 0);
  const auto report = nlohmann::json::parse(r.out);
  CHECK(report.at("turns") == 0);
  CHECK(report.at("exactRepetitions") == 0);
  CHECK(report.at("agentTurns") == 1);
}

TEST_CASE("metrics rejects a truncated transcript with its line number") {
  test::TempDir tmp;
  cli::replay(cli::loadScript(script("demo.json")), test::bundledConfig(7), tmp.path());
  auto text = test::readFile(tmp / "transcript.jsonl");
  const auto lines = static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
  REQUIRE(lines > 3);
  text.resize(text.size() - 20);  // cuts into the last record
  test::writeFile(tmp / "cut.jsonl", text);

  const auto r = test::runJournalist("metrics " + quoted(tmp / "cut.jsonl"));
  CHECK(r.exitCode == 1);
  CHECK(r.err.find("line " + std::to_string(lines)) != std::string::npos);
  CHECK_THROWS_AS(cli::readTranscript(tmp / "cut.jsonl"), FormatError);
}

TEST_CASE("script parsing") {
  const auto steps = cli::parseScript(R"([
  {"say": "Hello", "afterMs": 2000},
  {"silence": 500},
  {"say": "Bye"}
])");
  REQUIRE(steps.size() == 3);
  CHECK(steps[0].kind == cli::ReplayStep::Kind::Say);
  CHECK(steps[0].delayMs == 2000);
  CHECK(steps[0].line == 2);
  CHECK(steps[1].kind == cli::ReplayStep::Kind::Silence);
  CHECK(steps[1].delayMs == 500);
  CHECK(steps[2].delayMs == 0);
  CHECK(steps[2].line == 4);

  using doctest::Contains;
  CHECK_THROWS_WITH_AS(cli::parseScript("[\n{\"say\": \"a\"},\n{\"say\": }\n]", "s.json"), Contains("s.json:3:"),
                       FormatError);
  CHECK_THROWS_WITH_AS(cli::parseScript("[\n{\"say\": \"a\"},\n{\"silence\": -1}\n]", "s.json"),
                       Contains("s.json:3: 'silence' must not be negative"), FormatError);
  CHECK_THROWS_WITH_AS(cli::parseScript("[\n{\"say\": \"a\", \"silence\": 5}\n]", "s.json"),
                       Contains("s.json:2: step needs exactly one"), FormatError);
  CHECK_THROWS_WITH_AS(cli::parseScript("[]", "s.json"), Contains("no steps"), FormatError);
  CHECK_THROWS_AS(cli::parseScript(R"({"say": "a"})"), FormatError);
  CHECK_THROWS_AS(cli::parseScript(R"([{"say": 5}])"), FormatError);
  CHECK_THROWS_AS(cli::parseScript(R"([{"say": "a", "afterMs": 1.5}])"), FormatError);
}

TEST_CASE("replay of a malformed script reports the line") {
  test::TempDir tmp;
  test::writeFile(tmp / "bad.json", "[\n  {\"say\": \"Hi\", \"afterMs\": 1000},\n  {\"say\": \"oops\",,}\n]\n");
  const auto r = test::runJournalist("replay " + quoted(tmp / "bad.json"));
  CHECK(r.exitCode != 0);
  CHECK(r.err.find("bad.json:3:") != std::string::npos);
}

TEST_CASE("chat greets first") {
  const auto r = test::runJournalist("chat --seed 1", "");
  CHECK(r.exitCode == 0);
  const auto lines = agentLines(r.out);
  REQUIRE_FALSE(lines.empty());
  CHECK(r.out.find("my name is Alice") < r.out.find('\n'));
  CHECK(lines[0].find('[') != std::string::npos);
}

TEST_CASE("chat prompts after the user stays idle") {
  int fds[2];
  REQUIRE(::pipe(fds) == 0);
  test::TempDir tmp;
  auto config = test::bundledConfig(1);
  config.timeoutMs = 200;
  std::ostringstream out;
  std::thread runner([&] { cli::chat(config, tmp.path(), fds[0], out); });
  std::this_thread::sleep_for(std::chrono::milliseconds(600));
  ::close(fds[1]);
  runner.join();
  ::close(fds[0]);

  // Nobody typed, so every agent line after the greeting is a timeout prompt.
  CHECK(agentLines(out.str()).size() >= 2);
  const auto events = cli::readTranscript(tmp / "transcript.jsonl");
  CHECK(countKind(events, service::kind::kTimeout) >= 1);
  CHECK(countKind(events, service::kind::kUserUtterance) == 0);
  CHECK(fs::exists(tmp / "transcript.txt"));
}

TEST_CASE("missing lexicon is a config error naming the path") {
  const auto r = test::runJournalist("chat --lexicon /nonexistent/lex.tsv");
  CHECK(r.exitCode == 2);
  CHECK(r.err.find("/nonexistent/lex.tsv") != std::string::npos);
  const auto replay = test::runJournalist("replay --sentiment /nonexistent/s.tsv " + script("demo.json"));
  CHECK(replay.exitCode == 2);
  CHECK(replay.err.find("/nonexistent/s.tsv") != std::string::npos);
}
