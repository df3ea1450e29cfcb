#include "support.hpp"

#include <sys/wait.h>

#include <atomic>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "vj/error.hpp"

namespace vj::test {
namespace fs = std::filesystem;

fs::path dataPath(const std::string& name) { return fs::path(VJ_DATA_DIR) / name; }

std::shared_ptr<const text::Lexicon> lexicon() {
  static const auto lex = std::make_shared<const text::Lexicon>(text::Lexicon::load(dataPath("lexicon.tsv")));
  return lex;
}

std::shared_ptr<const text::Analyzer> analyzer() {
  static const auto a = std::make_shared<const text::Analyzer>(lexicon());
  return a;
}

std::shared_ptr<const affect::SentimentLexicon> sentiment() {
  static const auto s = std::make_shared<const affect::SentimentLexicon>(
      affect::SentimentLexicon::load(dataPath("sentiment.tsv")));
  return s;
}

service::SessionConfig bundledConfig(std::uint64_t seed) {
  service::SessionConfig c;
  c.templatePath = dataPath("alice.vjt");
  c.lexiconPath = dataPath("lexicon.tsv");
  c.sentimentPath = dataPath("sentiment.tsv");
  c.seed = seed;
  return c;
}

std::shared_ptr<const dialogue::Engine> bundledEngine(dialogue::DialogueConfig config) {
  static const auto templates =
      std::make_shared<const dialogue::TemplateSet>(dialogue::loadTemplates(dataPath("alice.vjt")));
  return std::make_shared<const dialogue::Engine>(templates, analyzer(), sentiment(), config);
}

std::shared_ptr<const dialogue::Engine> engineFor(const std::string& templateSource,
                                                 dialogue::DialogueConfig config) {
  auto templates = std::make_shared<const dialogue::TemplateSet>(dialogue::parseTemplates(templateSource));
  return std::make_shared<const dialogue::Engine>(std::move(templates), analyzer(), sentiment(), config);
}

text::Analysis analyze(const std::string& text) { return analyzer()->analyze(text, {}); }

std::string readFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void writeFile(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
}

TempDir::TempDir() {
  static std::atomic<unsigned> counter{0};
  std::random_device rd;
  path_ = fs::temp_directory_path() /
          ("vj-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

RunResult runJournalist(const std::string& args, const std::string& input) {
  TempDir tmp;
  writeFile(tmp / "stdin", input);
  const auto cmd = std::string("'") + VJ_JOURNALIST + "' " + args + " <'" + (tmp / "stdin").string() +
                   "' >'" + (tmp / "stdout").string() + "' 2>'" + (tmp / "stderr").string() + "'";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exitCode = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = readFile(tmp / "stdout");
  r.err = readFile(tmp / "stderr");
  return r;
}

}  // namespace vj::test
