#include "xsearch/nexi.h"

#include <expat.h>

#include <cctype>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

#include "xsearch/error.h"

namespace xsearch {

std::optional<Strategy> parse_strategy(std::string_view name) {
  std::string lower;
  for (char c : name) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "co") return Strategy::kCO;
  if (lower == "vv") return Strategy::kVV;
  if (lower == "vs") return Strategy::kVS;
  if (lower == "sv") return Strategy::kSV;
  if (lower == "ss") return Strategy::kSS;
  return std::nullopt;
}

std::string_view strategy_name(Strategy strategy) {
  switch (strategy) {
    case Strategy::kCO:
      return "co";
    case Strategy::kVV:
      return "vv";
    case Strategy::kVS:
      return "vs";
    case Strategy::kSV:
      return "sv";
    case Strategy::kSS:
      return "ss";
  }
  return "?";
}

std::optional<ContentMode> parse_content_mode(std::string_view name) {
  std::string lower;
  for (char c : name) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "sameplus" || lower == "same+") return ContentMode::kSamePlus;
  if (lower == "seq") return ContentMode::kSeq;
  return std::nullopt;
}

std::string_view content_mode_name(ContentMode mode) {
  return mode == ContentMode::kSeq ? "seq" : "sameplus";
}

namespace {

std::string collapse_space(std::string_view text) {
  std::string out;
  bool pending = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending = !out.empty();
      continue;
    }
    if (pending) out += ' ';
    pending = false;
    out += c;
  }
  return out;
}

QueryPath concat(const QueryPath& a, const QueryPath& b) {
  QueryPath out = a;
  out.steps.insert(out.steps.end(), b.steps.begin(), b.steps.end());
  return out;
}

struct RawClause {
  QueryPath rel;  // empty for "."
  std::string text;
};

struct RawStep {
  QueryPath path;
  std::vector<RawClause> clauses;
};

class NexiParser {
 public:
  explicit NexiParser(std::string_view text) : text_(text) {}

  std::vector<RawStep> parse() {
    std::vector<RawStep> steps;
    skip_space();
    if (pos_ >= text_.size()) fail("empty topic");
    while (!at_end()) {
      if (steps.size() == 2) fail("more than two predicated steps");
      RawStep step;
      step.path = path(false);
      skip_space();
      if (peek() != '[') fail("expected '[' after path");
      ++pos_;
      step.clauses.push_back(clause());
      while (true) {
        skip_space();
        if (peek() == ']') {
          ++pos_;
          break;
        }
        const std::size_t at = pos_;
        const std::string word = identifier();
        if (word == "or" || word == "OR") fail("unsupported NEXI construct 'or'", at);
        if (word != "and" && word != "AND") fail("expected 'and' or ']'", at);
        step.clauses.push_back(clause());
      }
      steps.push_back(std::move(step));
    }
    return steps;
  }

 private:
  [[noreturn]] void fail(const std::string& what) { fail(what, pos_); }
  [[noreturn]] void fail(const std::string& what, std::size_t at) { throw ParseError("NEXI: " + what, at); }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool at_end() {
    skip_space();
    return pos_ >= text_.size();
  }
  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  static bool name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' || c == ':';
  }

  std::string identifier() {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  // Steps separated by '/' or '//'. With `relative`, a leading '.' is allowed
  // and may stand alone.
  QueryPath path(bool relative) {
    skip_space();
    QueryPath out;
    if (relative && peek() == '.') {
      ++pos_;
      if (peek() != '/') return out;
    }
    if (peek() != '/') fail("expected a path starting with '/'");
    while (peek() == '/') {
      ++pos_;
      if (peek() == '/') ++pos_;
      if (peek() == '*') fail("unsupported NEXI construct: wildcard step '*'");
      if (peek() == '@') fail("unsupported NEXI construct: attribute step");
      if (peek() == '(') fail("unsupported NEXI construct: step alternation");
      const std::size_t start = pos_;
      while (pos_ < text_.size() && name_char(text_[pos_]) && text_[pos_] != '.') ++pos_;
      if (pos_ == start) fail("expected an element name");
      out.steps.push_back({std::string(text_.substr(start, pos_ - start)), std::nullopt});
    }
    if (peek() == '|') fail("unsupported NEXI construct '|'");
    return out;
  }

  RawClause clause() {
    skip_space();
    const std::size_t at = pos_;
    if (peek() == '(') fail("unsupported NEXI construct: parenthesized clauses");
    if (peek() == '@' || peek() == '.' || peek() == '/')
      fail("unsupported NEXI construct: comparison or attribute predicate");
    const std::string word = identifier();
    if (word == "not" || word == "NOT") fail("unsupported NEXI construct 'not'", at);
    if (word != "about") fail(word.empty() ? "expected about(...)" : "unsupported NEXI construct '" + word + "'", at);
    skip_space();
    if (peek() != '(') fail("expected '(' after about");
    ++pos_;
    RawClause out;
    out.rel = path(true);
    skip_space();
    if (peek() != ',') fail("expected ',' in about()");
    ++pos_;
    const std::size_t start = pos_;
    bool quoted = false;
    while (pos_ < text_.size() && (quoted || text_[pos_] != ')')) {
      if (text_[pos_] == '"') quoted = !quoted;
      ++pos_;
    }
    if (pos_ >= text_.size()) fail("unterminated about()", at);
    out.text = collapse_space(text_.substr(start, pos_ - start));
    ++pos_;
    if (out.text.empty()) fail("about() without terms", at);
    return out;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

std::string join_texts(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : " ") + p;
  return out;
}

std::string path_text(const QueryPath& path) {
  std::string out;
  for (const auto& step : path.steps) out += "//" + step.tag;
  return out;
}

std::string relative_text(const QueryPath& anchor, const QueryPath& path) {
  std::string out = ".";
  for (std::size_t i = anchor.size(); i < path.size(); ++i) out += "/" + path.steps[i].tag;
  return out;
}

}  // namespace

CasTopic parse_nexi(std::string_view text) {
  const auto steps = NexiParser(text).parse();
  CasTopic topic;
  topic.anchor_path = steps[0].path;
  if (steps.size() == 2) {
    topic.form = TopicForm::kComplex;
    for (const auto& c : steps[0].clauses)
      topic.supports.push_back({concat(topic.anchor_path, c.rel), c.text});
    std::vector<std::string> texts;
    for (const auto& c : steps[1].clauses) {
      if (!c.rel.empty()) throw ParseError("NEXI: relative path inside the target predicate");
      texts.push_back(c.text);
    }
    topic.target_path = concat(topic.anchor_path, steps[1].path);
    topic.target_about = join_texts(texts);
    return topic;
  }

  topic.form = TopicForm::kSimple;
  std::vector<std::string> texts;
  for (const auto& c : steps[0].clauses)
    if (c.rel.empty()) texts.push_back(c.text);
  if (!texts.empty()) {
    topic.target_path = topic.anchor_path;
    topic.target_about = join_texts(texts);
    for (const auto& c : steps[0].clauses)
      if (!c.rel.empty()) topic.supports.push_back({concat(topic.anchor_path, c.rel), c.text});
    return topic;
  }
  // No about(.): the last clause names what is returned.
  const auto& clauses = steps[0].clauses;
  for (std::size_t i = 0; i + 1 < clauses.size(); ++i)
    topic.supports.push_back({concat(topic.anchor_path, clauses[i].rel), clauses[i].text});
  topic.target_path = concat(topic.anchor_path, clauses.back().rel);
  topic.target_about = clauses.back().text;
  return topic;
}

std::string to_nexi(const CasTopic& topic) {
  std::string out = path_text(topic.anchor_path) + "[";
  bool first = true;
  const auto add = [&](const std::string& rel, const std::string& text) {
    out += (first ? "" : " and ") + ("about(" + rel + ", " + text + ")");
    first = false;
  };
  if (topic.form == TopicForm::kComplex) {
    for (const auto& s : topic.supports) add(relative_text(topic.anchor_path, s.path), s.text);
    QueryPath tail;
    tail.steps.assign(topic.target_path.steps.begin() + static_cast<std::ptrdiff_t>(topic.anchor_path.size()),
                      topic.target_path.steps.end());
    return out + "]" + path_text(tail) + "[about(., " + topic.target_about + ")]";
  }
  if (topic.target_path == topic.anchor_path) {
    add(".", topic.target_about);
    for (const auto& s : topic.supports) add(relative_text(topic.anchor_path, s.path), s.text);
  } else {
    for (const auto& s : topic.supports) add(relative_text(topic.anchor_path, s.path), s.text);
    add(relative_text(topic.anchor_path, topic.target_path), topic.target_about);
  }
  return out + "]";
}

namespace {

struct TopicState {
  TopicFile file;
  int depth = 0;
  bool in_castitle = false;
  bool seen_castitle = false;
};

void topic_start(void* user, const XML_Char* name, const XML_Char** attrs) {
  auto* s = static_cast<TopicState*>(user);
  if (s->depth++ == 0)
    for (int i = 0; attrs[i] != nullptr; i += 2)
      if (std::strcmp(attrs[i], "topic_id") == 0) s->file.id = attrs[i + 1];
  if (std::strcmp(name, "castitle") == 0 && !s->seen_castitle) s->in_castitle = true;
}

void topic_end(void* user, const XML_Char* name) {
  auto* s = static_cast<TopicState*>(user);
  --s->depth;
  if (std::strcmp(name, "castitle") == 0 && s->in_castitle) {
    s->in_castitle = false;
    s->seen_castitle = true;
  }
}

void topic_text(void* user, const XML_Char* text, int len) {
  auto* s = static_cast<TopicState*>(user);
  if (s->in_castitle) s->file.castitle.append(text, static_cast<std::size_t>(len));
}

struct ParserDeleter {
  void operator()(XML_Parser p) const { XML_ParserFree(p); }
};

}  // namespace

TopicFile read_topic_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read topic file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string bytes = buf.str();

  TopicState state;
  std::unique_ptr<XML_ParserStruct, ParserDeleter> parser(XML_ParserCreate(nullptr));
  XML_SetUserData(parser.get(), &state);
  XML_SetElementHandler(parser.get(), topic_start, topic_end);
  XML_SetCharacterDataHandler(parser.get(), topic_text);
  if (XML_Parse(parser.get(), bytes.data(), static_cast<int>(bytes.size()), 1) == XML_STATUS_ERROR)
    throw ParseError(path.string() + ": " + XML_ErrorString(XML_GetErrorCode(parser.get())),
                     static_cast<std::size_t>(XML_GetCurrentByteIndex(parser.get())));
  if (!state.seen_castitle) throw ParseError(path.string() + ": no <castitle> element");
  state.file.castitle = collapse_space(state.file.castitle);
  return state.file;
}

std::vector<AboutItem> split_about(std::string_view text) {
  std::vector<AboutItem> items;
  std::size_t i = 0;
  while (i < text.size()) {
    if (std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    AboutItem item;
    if (text[i] == '-' || text[i] == '+') {
      item.negated = text[i] == '-';
      ++i;
    }
    if (i < text.size() && text[i] == '"') {
      const auto close = text.find('"', i + 1);
      const auto end = close == std::string_view::npos ? text.size() : close;
      item.words = split_words(text.substr(i + 1, end - i - 1));
      item.phrase = true;
      i = close == std::string_view::npos ? text.size() : close + 1;
    } else {
      const std::size_t start = i;
      while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i])) && text[i] != '"') ++i;
      item.words = split_words(text.substr(start, i - start));
      item.phrase = item.words.size() > 1;
    }
    if (!item.words.empty()) items.push_back(std::move(item));
  }
  return items;
}

std::vector<std::string> phrase_to_terms(std::string_view phrase, const IngestConfig& config) {
  return tokenize(phrase, config);
}

namespace {

std::vector<QueryNode> content_nodes(const std::vector<AboutItem>& items, bool negated,
                                     ContentMode mode, const IngestConfig& config) {
  std::vector<QueryNode> out;
  for (const auto& item : items) {
    if (item.negated != negated) continue;
    std::vector<std::string> words;
    for (const auto& w : item.words)
      if (normalize_word(w, config)) words.push_back(w);
    if (mode == ContentMode::kSeq && item.phrase && words.size() > 1) {
      out.push_back(QueryNode::make_seq(std::move(words)));
      continue;
    }
    for (auto& w : words) out.push_back(QueryNode::make_term(std::move(w)));
  }
  return out;
}

std::optional<QueryNode> clause_tree(const QueryPath& path, std::string_view text, bool vague,
                                     const StrategyOptions& options, const IngestConfig& config) {
  const auto items = split_about(text);
  auto positive = content_nodes(items, false, options.mode, config);
  if (positive.empty()) return std::nullopt;
  QueryNode content = QueryNode::make(OpKind::kSamePlus, std::move(positive));
  auto negative = content_nodes(items, true, options.mode, config);
  if (!negative.empty())
    content = QueryNode::make(OpKind::kWithout,
                              {std::move(content), QueryNode::make(OpKind::kOr, std::move(negative))});
  if (options.strategy == Strategy::kCO) return content;
  if (vague) return QueryNode::make_inplus(path, options.beta, {std::move(content)});
  return QueryNode::make_in(path, {std::move(content)});
}

}  // namespace

QueryNode translate(const CasTopic& topic, const StrategyOptions& options, const IngestConfig& config) {
  if (!(options.beta >= 0.0 && options.beta <= 1.0)) throw QueryError("beta must lie in [0, 1]");
  const bool vague_target = options.strategy == Strategy::kVV || options.strategy == Strategy::kVS;
  const bool vague_support = options.strategy == Strategy::kVV || options.strategy == Strategy::kSV;

  auto target = clause_tree(topic.target_path, topic.target_about, vague_target, options, config);
  if (!target) throw QueryError("target clause has no indexable terms: " + topic.target_about);

  std::vector<QueryNode> supports;
  for (const auto& s : topic.supports)
    if (auto tree = clause_tree(s.path, s.text, vague_support, options, config))
      supports.push_back(std::move(*tree));
  if (supports.empty()) return std::move(*target);
  return QueryNode::make(OpKind::kFilter,
                         {QueryNode::make(OpKind::kAnd, std::move(supports)), std::move(*target)});
}

}  // namespace xsearch
