#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "vj/templates.hpp"

namespace vj::dialogue {
namespace {

constexpr std::string_view kSlots[] = {"name", "X", "Y"};

bool isIdChar(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
}

bool validId(std::string_view id) {
  return !id.empty() && std::all_of(id.begin(), id.end(), isIdChar);
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// A lexical word on a line, with its 1-based column.
struct Word {
  std::string text;
  std::size_t column = 0;
  bool quoted = false;
};

}  // namespace

std::string_view toString(ReplyClass cls) {
  switch (cls) {
    case ReplyClass::Informative: return "informative";
    case ReplyClass::Sparse: return "sparse";
    case ReplyClass::Complex: return "complex";
    case ReplyClass::Silence: return "silence";
    case ReplyClass::Exhausted: return "exhausted";
  }
  return "informative";
}

std::optional<ReplyClass> parseReplyClass(std::string_view name) {
  for (auto c : {ReplyClass::Informative, ReplyClass::Sparse, ReplyClass::Complex,
                 ReplyClass::Silence, ReplyClass::Exhausted}) {
    if (toString(c) == name) return c;
  }
  return std::nullopt;
}

bool State::requiresKnowledge() const {
  return std::any_of(responses.begin(), responses.end(),
                     [](const Response& r) { return r.requiresKnowledge; });
}

std::string Diagnostic::str() const {
  std::ostringstream out;
  out << line << ":" << column << ": " << message;
  return out.str();
}

namespace {

std::string joinDiagnostics(const std::vector<Diagnostic>& diagnostics) {
  std::string out = "invalid templates";
  for (const auto& d : diagnostics) out += "\n  " + d.str();
  return out;
}

}  // namespace

TemplateError::TemplateError(std::vector<Diagnostic> diagnostics)
    : Error(joinDiagnostics(diagnostics)), diagnostics_(std::move(diagnostics)) {}

const Topic& TemplateSet::topic(std::string_view id) const {
  return topics_.at(topicIndex(id));
}

std::size_t TemplateSet::topicIndex(std::string_view id) const {
  for (std::size_t i = 0; i < topics_.size(); ++i) {
    if (topics_[i].id == id) return i;
  }
  throw NotFoundError("unknown topic: " + std::string(id));
}

const State* TemplateSet::findState(std::string_view id) const {
  const auto it = states_.find(id);
  return it == states_.end() ? nullptr : &it->second;
}

const State& TemplateSet::state(std::string_view id) const {
  if (const auto* s = findState(id)) return *s;
  throw NotFoundError("unknown state: " + std::string(id));
}

const Response* TemplateSet::findResponse(std::string_view id) const {
  const auto it = responseState_.find(id);
  if (it == responseState_.end()) return nullptr;
  for (const auto& r : state(it->second).responses) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

std::set<std::string> TemplateSet::expand(std::string_view keyword) const {
  std::set<std::string> out{std::string(keyword)};
  if (const auto it = synonyms_.find(std::string(keyword)); it != synonyms_.end()) {
    out.insert(it->second.begin(), it->second.end());
  }
  return out;
}

struct TemplateParser {
  TemplateSet set;
  std::vector<Diagnostic> diagnostics;
  Topic* topic = nullptr;
  State* state = nullptr;
  State discard;
  std::size_t lineNo = 0;
  std::map<std::string, std::size_t> responseLines;
  // (state id, class, target, line, column) for deferred checks.
  struct PendingTransition {
    std::string from;
    ReplyClass cls;
    std::string target;
    std::size_t line;
    std::size_t column;
  };
  std::vector<PendingTransition> transitions;

  void error(std::size_t column, std::string message) {
    diagnostics.push_back({lineNo, column, std::move(message)});
  }

  // Splits a line into words, keeping quoted strings intact. Returns false on
  // an unterminated quote.
  bool split(std::string_view line, std::vector<Word>& words) {
    std::size_t i = 0;
    while (i < line.size()) {
      if (line[i] == ' ' || line[i] == '\t' || line[i] == '\r') {
        ++i;
        continue;
      }
      if (line[i] == '#') break;
      Word w;
      w.column = i + 1;
      if (line[i] == '"') {
        w.quoted = true;
        ++i;
        bool closed = false;
        while (i < line.size()) {
          if (line[i] == '\\' && i + 1 < line.size()) {
            w.text.push_back(line[i + 1]);
            i += 2;
            continue;
          }
          if (line[i] == '"') {
            closed = true;
            ++i;
            break;
          }
          w.text.push_back(line[i++]);
        }
        if (!closed) {
          error(w.column, "unterminated string");
          return false;
        }
      } else {
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') {
          w.text.push_back(line[i++]);
        }
      }
      words.push_back(std::move(w));
    }
    return true;
  }

  void parseLine(std::string_view line) {
    std::vector<Word> words;
    if (!split(line, words) || words.empty()) return;
    const auto& keyword = words[0].text;
    if (keyword == "topic") return parseTopic(words);
    if (keyword == "state") return parseState(words);
    if (keyword == "response") return parseResponse(words);
    if (keyword == "trigger") return parseTrigger(line, words);
    if (keyword == "on") return parseTransition(words);
    if (keyword == "synonym") return parseSynonym(line, words);
    error(words[0].column, "unknown statement '" + keyword + "'");
  }

  void parseTopic(const std::vector<Word>& w) {
    if (w.size() != 2 || !validId(w[1].text)) {
      error(w.size() > 1 ? w[1].column : w[0].column, "expected 'topic <id>'");
      return;
    }
    for (const auto& t : set.topics_) {
      if (t.id == w[1].text) {
        error(w[1].column, "duplicate topic id '" + w[1].text + "'");
        return;
      }
    }
    set.topics_.push_back({w[1].text, "", {}});
    topic = &set.topics_.back();
    state = nullptr;
  }

  void parseState(const std::vector<Word>& w) {
    if (w.size() != 2 || !validId(w[1].text)) {
      error(w.size() > 1 ? w[1].column : w[0].column, "expected 'state <id>'");
      state = nullptr;
      return;
    }
    const auto& id = w[1].text;
    if (set.states_.contains(id)) {
      error(w[1].column, "duplicate state id '" + id + "'");
      // Keep parsing its body so later lines do not cascade into errors.
      discard = State{id, topic ? topic->id : "", {}, {}, {}, lineNo};
      state = &discard;
      return;
    }
    State s;
    s.id = id;
    s.line = lineNo;
    if (topic) {
      s.topicId = topic->id;
      if (topic->stateIds.empty()) topic->openerStateId = id;
      topic->stateIds.push_back(id);
      set.stateOrder_.push_back(id);
    } else if (id != kTimeoutState && id != kClosingState) {
      error(w[1].column, "global state '" + id + "' must be 'timeout' or 'closing'");
    }
    state = &set.states_.emplace(id, std::move(s)).first->second;
  }

  bool requireState(const Word& at) {
    if (state) return true;
    error(at.column, "'" + at.text + "' outside a state");
    return false;
  }

  void parseResponse(const std::vector<Word>& w) {
    if (!requireState(w[0])) return;
    if (w.size() < 3 || !validId(w[1].text) || !w[2].quoted) {
      error(w.size() > 1 ? w[1].column : w[0].column, "expected 'response <id> \"<text>\" [options]'");
      return;
    }
    Response r;
    r.id = w[1].text;
    r.text = w[2].text;
    r.line = lineNo;
    if (r.text.empty()) error(w[2].column, "response '" + r.id + "' has empty text");
    if (responseLines.contains(r.id)) {
      error(w[1].column, "duplicate response id '" + r.id + "' (first defined on line " +
                             std::to_string(responseLines[r.id]) + ")");
      return;
    }
    scanSlots(r, w[2].column);
    for (std::size_t i = 3; i < w.size(); ++i) {
      const auto& opt = w[i].text;
      const auto eq = opt.find('=');
      const std::string key = opt.substr(0, eq);
      const std::string value = eq == std::string::npos ? "" : opt.substr(eq + 1);
      if (key == "mirror" && eq == std::string::npos) {
        r.mirror = true;
      } else if (key == "requires-knowledge" && eq == std::string::npos) {
        r.requiresKnowledge = true;
      } else if (key == "emotion" && eq != std::string::npos) {
        r.fixedEmotion = affect::parseEmotion(value);
        if (!r.fixedEmotion) error(w[i].column, "unknown emotion '" + value + "'");
      } else if (key == "accent" && eq != std::string::npos) {
        r.accentSlot = value;
      } else if (key == "min-salience" && eq != std::string::npos) {
        double v = 0.0;
        const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
        if (ec != std::errc() || end != value.data() + value.size()) {
          error(w[i].column, "bad min-salience '" + value + "'");
        } else {
          r.minSalience = v;
        }
      } else {
        error(w[i].column, "unknown response option '" + opt + "'");
      }
    }
    if (r.accentSlot && !r.slots.contains(*r.accentSlot)) {
      error(w[2].column, "response '" + r.id + "' accents slot '" + *r.accentSlot +
                             "' that its text does not use");
    }
    if ((r.slots.contains("X") || r.slots.contains("Y")) && !r.requiresKnowledge) {
      error(w[2].column, "response '" + r.id + "' uses a knowledge slot without requires-knowledge");
    }
    if (r.minSalience && !r.requiresKnowledge) {
      error(w[2].column, "response '" + r.id + "' sets min-salience without requires-knowledge");
    }
    if (state->global() && r.requiresKnowledge) {
      error(w[2].column, "global state response '" + r.id + "' cannot require knowledge");
    }
    responseLines[r.id] = lineNo;
    set.responseState_.emplace(r.id, state->id);
    state->responses.push_back(std::move(r));
  }

  void scanSlots(Response& r, std::size_t column) {
    const auto& text = r.text;
    for (std::size_t i = 0; i < text.size(); ++i) {
      if (text[i] == '}') {
        error(column, "response '" + r.id + "' has an unmatched '}'");
        return;
      }
      if (text[i] != '{') continue;
      const auto close = text.find('}', i);
      if (close == std::string::npos) {
        error(column, "response '" + r.id + "' has an unterminated slot");
        return;
      }
      const auto slot = text.substr(i + 1, close - i - 1);
      if (std::find(std::begin(kSlots), std::end(kSlots), slot) == std::end(kSlots)) {
        error(column, "response '" + r.id + "' uses unknown slot '{" + slot + "}'");
      } else {
        r.slots.insert(slot);
      }
      i = close;
    }
  }

  static std::vector<std::string> commaList(std::string_view s) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
      const auto comma = s.find(',', pos);
      const auto item = trim(s.substr(pos, comma == std::string_view::npos ? s.npos : comma - pos));
      out.push_back(lower(item));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    return out;
  }

  static std::string_view rest(std::string_view line, const Word& first) {
    auto tail = line.substr(first.column - 1 + first.text.size());
    if (const auto hash = tail.find('#'); hash != std::string_view::npos) tail = tail.substr(0, hash);
    return trim(tail);
  }

  void parseTrigger(std::string_view line, const std::vector<Word>& w) {
    if (!requireState(w[0])) return;
    if (state->global()) {
      error(w[0].column, "global state '" + state->id + "' cannot have triggers");
      return;
    }
    const auto items = commaList(rest(line, w[0]));
    for (const auto& item : items) {
      if (item.empty() || item.find_first_of(" \t") != std::string::npos) {
        error(w.size() > 1 ? w[1].column : w[0].column, "expected 'trigger <lemma>[,<lemma>...]'");
        return;
      }
    }
    state->triggers.push_back(items);
  }

  void parseTransition(const std::vector<Word>& w) {
    if (!requireState(w[0])) return;
    if (w.size() != 4 || w[2].text != "->" || !validId(w[3].text)) {
      error(w.size() > 1 ? w[1].column : w[0].column, "expected 'on <class> -> <state>'");
      return;
    }
    const auto cls = parseReplyClass(w[1].text);
    if (!cls) {
      error(w[1].column, "unknown reply class '" + w[1].text + "'");
      return;
    }
    if (state->global()) {
      error(w[0].column, "global state '" + state->id + "' cannot have transitions");
      return;
    }
    if (state->transitions.contains(*cls)) {
      error(w[1].column, "state '" + state->id + "' already has a transition on " + w[1].text);
      return;
    }
    state->transitions.emplace(*cls, w[3].text);
    transitions.push_back({state->id, *cls, w[3].text, lineNo, w[3].column});
  }

  void parseSynonym(std::string_view line, const std::vector<Word>& w) {
    const auto body = rest(line, w[0]);
    const auto colon = body.find(':');
    if (colon == std::string_view::npos) {
      error(w[0].column, "expected 'synonym <lemma>: <lemma>[,<lemma>...]'");
      return;
    }
    const auto head = lower(trim(body.substr(0, colon)));
    const auto items = commaList(body.substr(colon + 1));
    if (head.empty() || std::any_of(items.begin(), items.end(), [](const auto& s) { return s.empty(); })) {
      error(w[0].column, "expected 'synonym <lemma>: <lemma>[,<lemma>...]'");
      return;
    }
    for (const auto& item : items) {
      if (item == head) continue;
      set.synonyms_[head].insert(item);
      set.synonyms_[item].insert(head);
    }
  }

  void validate() {
    lineNo = 0;
    if (set.topics_.empty()) {
      diagnostics.push_back({1, 1, "no topics defined"});
    }
    for (const auto& t : set.topics_) {
      if (t.stateIds.empty()) diagnostics.push_back({0, 0, "topic '" + t.id + "' has no states"});
    }
    for (const auto& [id, s] : set.states_) {
      if (s.responses.empty()) diagnostics.push_back({s.line, 1, "state '" + id + "' has no responses"});
    }
    for (const auto& t : transitions) {
      const auto* target = set.findState(t.target);
      if (!target) {
        diagnostics.push_back({t.line, t.column,
                               "dangling transition: state '" + t.from + "' on " +
                                   std::string(toString(t.cls)) + " -> '" + t.target +
                                   "' (no such state)"});
      } else if (target->global() && t.cls != ReplyClass::Silence) {
        diagnostics.push_back({t.line, t.column,
                               "state '" + t.from + "' on " + std::string(toString(t.cls)) +
                                   " targets global state '" + t.target +
                                   "'; only silence may do that"});
      }
    }
    if (!set.topics_.empty() && !set.topics_.front().stateIds.empty()) {
      const auto& opener = set.state(set.topics_.front().openerStateId);
      const bool greetable = std::any_of(opener.responses.begin(), opener.responses.end(),
                                         [](const Response& r) { return !r.requiresKnowledge; });
      if (!opener.responses.empty() && !greetable) {
        diagnostics.push_back({opener.line, 1,
                               "opening state '" + opener.id +
                                   "' needs a response that does not require knowledge"});
      }
    }
    std::stable_sort(diagnostics.begin(), diagnostics.end(),
                     [](const Diagnostic& a, const Diagnostic& b) { return a.line < b.line; });
  }
};

namespace {

TemplateParser run(std::string_view source) {
  TemplateParser p;
  std::size_t pos = 0;
  while (pos < source.size()) {
    const auto eol = source.find('\n', pos);
    const auto line = source.substr(pos, eol == std::string_view::npos ? source.npos : eol - pos);
    pos = eol == std::string_view::npos ? source.size() : eol + 1;
    ++p.lineNo;
    p.parseLine(line);
  }
  p.validate();
  return p;
}

}  // namespace

std::vector<Diagnostic> checkTemplates(std::string_view source) {
  return run(source).diagnostics;
}

TemplateSet parseTemplates(std::string_view source) {
  auto p = run(source);
  if (!p.diagnostics.empty()) throw TemplateError(std::move(p.diagnostics));
  return std::move(p.set);
}

TemplateSet loadTemplates(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read templates: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parseTemplates(buffer.str());
}

}  // namespace vj::dialogue
