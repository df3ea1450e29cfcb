#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "vj/cli.hpp"
#include "vj/service.hpp"

namespace vj::test {

std::filesystem::path dataPath(const std::string& name);

// Shared, loaded once per process.
std::shared_ptr<const text::Lexicon> lexicon();
std::shared_ptr<const text::Analyzer> analyzer();
std::shared_ptr<const affect::SentimentLexicon> sentiment();

service::SessionConfig bundledConfig(std::uint64_t seed = 0);
std::shared_ptr<const dialogue::Engine> bundledEngine(dialogue::DialogueConfig config = {});
std::shared_ptr<const dialogue::Engine> engineFor(const std::string& templateSource,
                                                 dialogue::DialogueConfig config = {});

text::Analysis analyze(const std::string& text);

std::string readFile(const std::filesystem::path& path);
void writeFile(const std::filesystem::path& path, const std::string& content);

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

struct RunResult {
  int exitCode = -1;
  std::string out;
  std::string err;
};

// Runs the journalist binary with `args`, feeding `input` on stdin.
RunResult runJournalist(const std::string& args, const std::string& input = "");

}  // namespace vj::test
