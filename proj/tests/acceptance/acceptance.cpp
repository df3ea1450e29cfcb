// Acceptance run: one PASS/FAIL line per primary criterion, exit status 1 if
// any fails.

#include <chrono>
#include <cmath>
#include <cstring>
#include <iostream>
#include <random>
#include <sstream>

#include "support.hpp"

using namespace vj;
using service::Millis;
using service::SessionEvent;
namespace fs = std::filesystem;
namespace k = service::kind;

namespace {

using Clock = std::chrono::steady_clock;

double seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

// Distance in representable doubles; both inputs finite.
std::uint64_t ulps(double a, double b) {
  if (a == b) return 0;
  const auto key = [](double x) {
    std::int64_t i;
    std::memcpy(&i, &x, sizeof i);
    return i < 0 ? std::numeric_limits<std::int64_t>::min() - i : i;
  };
  const auto ka = key(a), kb = key(b);
  return ka > kb ? static_cast<std::uint64_t>(ka - kb) : static_cast<std::uint64_t>(kb - ka);
}

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

std::string script(const std::string& name) { return test::dataPath("scripts/" + name).string(); }

Outcome salienceOracle() {
  Outcome o;
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<std::uint64_t> freq(1, 50);
  std::uniform_int_distribution<kb::Millis> since(0, 600000);
  std::uniform_real_distribution<double> pref(0.0, 1.0);
  const auto t0 = Clock::now();
  for (int i = 0; i < 1000; ++i) {
    const auto f = freq(rng);
    const auto t = since(rng);
    const auto p = pref(rng);
    const double expected = (static_cast<double>(f) - static_cast<double>(t) / 1000.0) * p;
    const double got = kb::salienceScore(f, t, p);
    if (ulps(got, expected) > 1) {
      std::ostringstream msg;
      msg << "(" << f << ", " << t << ", " << p << ") gave " << got << ", expected " << expected;
      o.require(false, msg.str());
    }
  }
  const double elapsed = seconds(t0);
  o.require(kb::salienceScore(3, 2000, 0.5) == 0.5, "(3, 2000, 0.5) is not 0.5");
  o.require(kb::salienceScore(17, 4321, 0.0) == 0.0, "pref 0 does not give 0");
  o.require(elapsed < 1.0, "took " + std::to_string(elapsed) + " s");
  return o;
}

Outcome defaultPreference() {
  Outcome o;
  kb::KnowledgeBase base;
  const auto id = base.addNode("kite", 0);
  o.require(base.node(id).pref == 0.5, "addNode pref is not 0.5");

  // Every node mined from neutral input keeps the neutral preference.
  const auto steps = cli::loadScript(script("extraction.json"));
  kb::Millis at = 0;
  std::size_t created = 0;
  for (const auto& step : steps) {
    const auto result = base.ingest(test::analyze(step.text), affect::ValenceRecord{}, at += 1000);
    for (const auto& n : result.created) {
      ++created;
      o.require(base.node(n).pref == 0.5, "node '" + n + "' created with pref " + std::to_string(base.node(n).pref));
    }
  }
  o.require(created > 0, "extraction script created no nodes");
  for (const auto& n : base.snapshot().at("nodes")) {
    o.require(n.at("pref").get<double>() == 0.5, "snapshot pref differs from 0.5");
  }
  return o;
}

Outcome sustainedInteraction() {
  Outcome o;
  const auto t0 = Clock::now();
  const auto result = cli::replay(cli::loadScript(script("five_minutes.json")), test::bundledConfig(7));
  const double elapsed = seconds(t0);
  const auto& events = result.events;

  // Every user turn and every timeout is answered before anything else happens.
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (events[i].kind != k::kUserUtterance && events[i].kind != k::kTimeout) continue;
    const bool answered = i + 1 < events.size() && events[i + 1].kind == k::kAgentIntent;
    o.require(answered, "dead end after seq " + std::to_string(events[i].seq));
  }
  std::optional<Millis> closedAt;
  for (const auto& e : events) {
    if (e.kind == k::kAgentIntent && e.payload.at("function") == "closing") {
      closedAt = e.at;
      break;
    }
  }
  o.require(result.metrics.agentTurns >= 20, "only " + std::to_string(result.metrics.agentTurns) + " agent turns");
  o.require(result.metrics.exactRepetitions == 0,
            std::to_string(result.metrics.exactRepetitions) + " exact repetitions");
  o.require(closedAt.has_value(), "the interview never closed");
  if (closedAt) o.require(*closedAt >= 300000, "closed at " + std::to_string(*closedAt) + " ms");
  o.require(elapsed < 5.0, "took " + std::to_string(elapsed) + " s");
  return o;
}

Outcome knowledgeSubstitution() {
  Outcome o;
  const auto steps = cli::loadScript(script("hiking.json"));
  std::size_t mentions = 0;
  for (const auto& s : steps) {
    std::string lower = s.text;
    for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    for (auto p = lower.find("hiking"); p != std::string::npos; p = lower.find("hiking", p + 1)) ++mentions;
  }
  o.require(mentions == 3, "script mentions hiking " + std::to_string(mentions) + " times");

  const auto result = cli::replay(steps, test::bundledConfig(3));
  const SessionEvent* first = nullptr;
  for (const auto& e : result.events) {
    if (e.kind == k::kAgentIntent && e.payload.at("text").get<std::string>().find("hiking") != std::string::npos) {
      first = &e;
      break;
    }
  }
  o.require(first != nullptr, "no agent turn mentions hiking");
  if (!first) return o;
  const auto& slot = first->payload.at("slots").at("X");
  o.require(slot.at("text") == "hiking", "X slot is not hiking");
  o.require(first->at == 8000, "first hiking turn at " + std::to_string(first->at) + " ms");

  // By hand: "I love hiking." at 8000 ms creates hiking (freq 1, mentioned
  // just now) and moves pref from 0.5 toward the rescaled valence of "love"
  // (+0.8 in the sentiment lexicon).
  const double valence = 0.8;
  const double pref = 0.5 + 0.3 * ((valence + 1.0) / 2.0 - 0.5);
  const double expected = (1 - 0 / 1000.0) * pref;
  const double got = slot.at("salience").get<double>();
  o.require(ulps(got, expected) <= 1,
            "recorded salience " + std::to_string(got) + ", hand value " + std::to_string(expected));
  return o;
}

Outcome determinism() {
  Outcome o;
  test::TempDir a, b;
  const auto steps = cli::loadScript(script("demo.json"));
  cli::replay(steps, test::bundledConfig(7), a.path());
  cli::replay(steps, test::bundledConfig(7), b.path());
  const auto ta = test::readFile(a / "transcript.jsonl");
  o.require(!ta.empty(), "empty transcript");
  o.require(ta == test::readFile(b / "transcript.jsonl"), "transcript.jsonl differs between runs");
  return o;
}

Outcome extractionFidelity() {
  Outcome o;
  const auto expected = nlohmann::json::parse(test::readFile(test::dataPath("scripts/extraction.expected.json")));
  const auto result = cli::replay(cli::loadScript(script("extraction.json")), test::bundledConfig(1));
  const auto report = result.metrics.toJson();
  for (const auto& [key, value] : expected.at("counts").items()) {
    o.require(report.at(key).get<std::int64_t>() == value.get<std::int64_t>(),
              key + " is " + report.at(key).dump() + ", expected " + value.dump());
  }
  return o;
}

Outcome fuzzTotality() {
  Outcome o;
  const auto engine = test::bundledEngine();
  const auto& t = engine->templates();
  static const std::vector<std::string> words = {
      "I", "love", "my", "dog", "Rex", "hiking", "is", "great", "the", "weather", "not", "hate", "yes",
      "no", "work", "cat", "music", "and", "a", "red", "car", "she", "it", "Lisbon", "sister", "'s",
      "travel", "book", ".", "?", "!", ",", "My name is", "Ana", "🙂", "don't", "really", "42"};
  const auto t0 = Clock::now();
  for (std::uint64_t seed = 0; seed < 100 && o.ok; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> kind(0, 4);
    std::uniform_int_distribution<std::size_t> len(0, 20);
    std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1);
    std::uniform_int_distribution<Millis> gap(0, 20000);
    dialogue::SessionState s(seed);
    Millis at = 0;
    const auto where = [&](int i) { return "seed " + std::to_string(seed) + " event " + std::to_string(i); };
    const auto commit = [&](const dialogue::Event& ev, int i) {
      const auto clockBefore = s.is.sessionClock;
      const auto usedBefore = s.is.usedResponses;
      try {
        const auto turn = engine->advance(s, ev);
        o.require(!turn.plan.candidates.empty() && !turn.intent.text.empty(), where(i) + ": no intent");
        o.require(t.findState(turn.intent.stateId) != nullptr, where(i) + ": unknown state emitted");
      } catch (const std::exception& e) {
        o.require(false, where(i) + ": threw " + e.what());
        return;
      }
      o.require(s.is.sessionClock >= clockBefore, where(i) + ": clock went back");
      o.require(std::includes(s.is.usedResponses.begin(), s.is.usedResponses.end(), usedBefore.begin(),
                              usedBefore.end()),
                where(i) + ": usedResponses shrank");
      const auto* st = t.findState(s.is.currentState);
      o.require(st && st->topicId == s.is.currentTopic, where(i) + ": state outside its topic");
    };
    commit({dialogue::Event::Kind::SessionStart, "", 0}, 0);
    for (int i = 1; i <= 200 && o.ok; ++i) {
      at += gap(rng);
      if (kind(rng) == 0) {
        commit({dialogue::Event::Kind::Timeout, "", at}, i);
      } else {
        std::string text;
        for (auto n = len(rng); n > 0; --n) text += words[pick(rng)] + " ";
        commit({dialogue::Event::Kind::Utterance, text, at}, i);
      }
    }
  }
  const double elapsed = seconds(t0);
  o.require(elapsed < 30.0, "took " + std::to_string(elapsed) + " s");
  return o;
}

// Drives one session through the service API on a manual clock. In wizard
// mode the operator picks rank 1 as soon as candidates appear.
std::vector<SessionEvent> drive(const std::string& mode, const std::vector<cli::ReplayStep>& steps,
                                const fs::path& root) {
  auto clock = std::make_shared<service::ManualClock>();
  service::SessionManager manager(service::ServerConfig{root, test::bundledConfig(7)}, clock);
  const auto id = manager.create({{"mode", mode}});
  const auto session = manager.find(id);
  const auto pick = [&] {
    const auto last = manager.eventsAfter(id, 0).back();
    if (last.kind == k::kWizardCandidates) {
      manager.select(id, last.payload.at("candidates")[0].at("responseId").get<std::string>());
    }
  };
  pick();
  for (const auto& step : steps) {
    const Millis target = clock->nowMs() + step.delayMs;
    for (auto d = session->timeoutDeadline(); d && *d <= target && !session->ended(); d = session->timeoutDeadline()) {
      clock->set(*d);
      manager.fireDueTimeouts();
      pick();
    }
    clock->set(target);
    if (session->ended()) break;
    if (step.kind == cli::ReplayStep::Kind::Say) {
      manager.postUtterance(id, step.text);
      pick();
    }
  }
  if (!session->ended()) manager.close(id);
  return manager.eventsAfter(id, 0);
}

Outcome wizardEquivalence() {
  Outcome o;
  test::TempDir a, b;
  const auto steps = cli::loadScript(script("five_minutes.json"));
  const auto autoEvents = drive("auto", steps, a.path());
  const auto wizardEvents = drive("wizard", steps, b.path());

  // The wizard log also carries the candidate lists and selections; what the
  // user saw and said must match exactly.
  const auto visible = [](const std::vector<SessionEvent>& events) {
    std::vector<std::string> out;
    for (const auto& e : events) {
      if (e.kind == k::kUserUtterance || e.kind == k::kAgentIntent || e.kind == k::kTimeout) {
        out.push_back(std::to_string(e.at) + " " + e.kind + " " + e.payload.dump());
      }
    }
    return out;
  };
  const auto va = visible(autoEvents);
  const auto vw = visible(wizardEvents);
  o.require(va.size() > 20, "auto session is too short to compare");
  for (std::size_t i = 0; i < std::min(va.size(), vw.size()); ++i) {
    o.require(va[i] == vw[i], "first difference: " + va[i] + " vs " + vw[i]);
  }
  o.require(va.size() == vw.size(), "event counts differ");
  o.require(cli::renderTranscriptText(autoEvents) == cli::renderTranscriptText(wizardEvents),
            "rendered transcripts differ");
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, Outcome (*)()>> criteria = {
      {"salience oracle equivalence (1000 triples, 1 ulp, < 1 s)", salienceOracle},
      {"fresh nodes start at preference 0.5", defaultPreference},
      {"five-minute scripted interview sustained without dead ends", sustainedInteraction},
      {"knowledge-driven substitution of hiking with hand-checked salience", knowledgeSubstitution},
      {"replay determinism (byte-identical transcript.jsonl)", determinism},
      {"extraction counts match the hand-derived oracle", extractionFidelity},
      {"fuzz totality (100 seeds x 200 events, < 30 s)", fuzzTotality},
      {"wizard rank-1 selection reproduces auto mode", wizardEquivalence},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail = std::string("threw: ") + e.what();
    }
    std::cout << (o.ok ? "PASS " : "FAIL ") << name;
    if (!o.ok) std::cout << ": " << o.detail;
    std::cout << std::endl;
    failed += !o.ok;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
