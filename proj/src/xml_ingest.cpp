#include "xsearch/xml_ingest.h"

#include <expat.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <memory>
#include <sstream>

#include "xsearch/error.h"
#include "xsearch/porter_stemmer.h"

namespace xsearch {

namespace {

constexpr const char* kDefaultStopwords[] = {
#include "default_stopwords.inc"
};

bool is_ascii_alnum(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u < 0x80 && std::isalnum(u);
}

bool all_digits(std::string_view word) {
  for (char c : word)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return !word.empty();
}

// Expat callback state. Text is buffered until the next tag boundary so a
// word split across character-data callbacks stays whole.
struct ParseState {
  const IngestConfig* config = nullptr;
  DocumentTree tree;
  std::vector<NodeId> stack;
  std::string pending_text;
  std::uint32_t next_position = 0;

  void flush_text() {
    if (pending_text.empty()) return;
    if (!stack.empty()) {
      auto& owner = tree.nodes[stack.back()];
      for (auto& stem : tokenize(pending_text, *config))
        owner.tokens.push_back({std::move(stem), next_position++});
    }
    pending_text.clear();
  }
};

void on_start(void* user, const XML_Char* name, const XML_Char** /*attrs*/) {
  auto& state = *static_cast<ParseState*>(user);
  state.flush_text();
  const auto id = static_cast<NodeId>(state.tree.nodes.size());
  ElementNode node;
  node.tag = state.config->map_tag(name);
  node.node_id = id;
  node.interval = {id, id};
  if (!state.stack.empty()) {
    node.parent = state.stack.back();
    state.tree.nodes[state.stack.back()].children.push_back(id);
  }
  state.tree.nodes.push_back(std::move(node));
  state.stack.push_back(id);
}

void on_end(void* user, const XML_Char* /*name*/) {
  auto& state = *static_cast<ParseState*>(user);
  state.flush_text();
  const NodeId id = state.stack.back();
  state.stack.pop_back();
  state.tree.nodes[id].interval.high =
      static_cast<NodeId>(state.tree.nodes.size() - 1);
}

void on_text(void* user, const XML_Char* text, int len) {
  auto& state = *static_cast<ParseState*>(user);
  state.pending_text.append(text, static_cast<std::size_t>(len));
}

struct ParserDeleter {
  void operator()(XML_Parser p) const { XML_ParserFree(p); }
};

}  // namespace

std::string ContextPath::to_string() const {
  std::string out;
  for (const auto& tag : tags) {
    out += '/';
    out += tag;
  }
  return out.empty() ? "/" : out;
}

ContextPath ContextPath::from_string(std::string_view text) {
  ContextPath path;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto start = text.find_first_not_of('/', pos);
    if (start == std::string_view::npos) break;
    auto end = text.find('/', start);
    if (end == std::string_view::npos) end = text.size();
    path.tags.emplace_back(text.substr(start, end - start));
    pos = end;
  }
  return path;
}

std::vector<std::string> default_stopwords() {
  return {std::begin(kDefaultStopwords), std::end(kDefaultStopwords)};
}

std::set<std::string, std::less<>> load_stopword_file(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read stopword file " + path.string());
  std::set<std::string, std::less<>> words;
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    std::string word;
    for (char c : line)
      if (!std::isspace(static_cast<unsigned char>(c)))
        word += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (!word.empty()) words.insert(std::move(word));
  }
  return words;
}

const IngestConfig& IngestConfig::defaults() {
  static const IngestConfig config = [] {
    IngestConfig c;
    for (const char* w : kDefaultStopwords) c.stopwords.insert(w);
    return c;
  }();
  return config;
}

IngestConfig IngestConfig::from_config(const ConfigFile& config,
                                       const std::filesystem::path& base_dir) {
  IngestConfig out = defaults();
  if (const auto file = config.get("", "stopwords")) {
    std::filesystem::path path(*file);
    if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
    out.stopwords = load_stopword_file(path);
  }
  if (const auto numbers = config.get_bool("", "index_numbers"))
    out.index_numbers = *numbers;
  for (const auto& [tag, cls] : config.entries("tags")) out.tag_classes[tag] = cls;
  return out;
}

std::string IngestConfig::map_tag(std::string_view tag) const {
  const auto it = tag_classes.find(tag);
  return it == tag_classes.end() ? std::string(tag) : it->second;
}

bool IngestConfig::is_stopword(std::string_view word) const {
  return stopwords.find(word) != stopwords.end();
}

std::size_t DocumentTree::token_count() const {
  std::size_t n = 0;
  for (const auto& node : nodes) n += node.tokens.size();
  return n;
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && !is_ascii_alnum(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && is_ascii_alnum(text[i])) ++i;
    if (i > start) words.emplace_back(text.substr(start, i - start));
  }
  return words;
}

std::optional<std::string> normalize_word(std::string_view word,
                                          const IngestConfig& config) {
  std::string lower;
  lower.reserve(word.size());
  for (char c : word) {
    if (!is_ascii_alnum(c)) return std::nullopt;
    lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  if (lower.empty()) return std::nullopt;
  if (!config.index_numbers && all_digits(lower)) return std::nullopt;
  if (config.is_stopword(lower)) return std::nullopt;
  std::string stem = porter_stem(lower);
  if (stem.empty() || config.is_stopword(stem)) return std::nullopt;
  return stem;
}

std::vector<std::string> tokenize(std::string_view text,
                                  const IngestConfig& config) {
  std::vector<std::string> stems;
  for (const auto& word : split_words(text))
    if (auto stem = normalize_word(word, config)) stems.push_back(std::move(*stem));
  return stems;
}

DocumentTree parse_document(std::string_view bytes, const IngestConfig& config,
                            std::string locator) {
  if (bytes.find_first_not_of(" \t\r\n") == std::string_view::npos)
    throw ParseError("empty XML document", 0);

  std::unique_ptr<XML_ParserStruct, ParserDeleter> parser(
      XML_ParserCreate(nullptr));
  if (!parser) throw Error("cannot allocate XML parser");

  ParseState state;
  state.config = &config;
  state.tree.locator = std::move(locator);
  XML_SetUserData(parser.get(), &state);
  XML_SetElementHandler(parser.get(), on_start, on_end);
  XML_SetCharacterDataHandler(parser.get(), on_text);

  if (XML_Parse(parser.get(), bytes.data(), static_cast<int>(bytes.size()),
                XML_TRUE) == XML_STATUS_ERROR) {
    const auto offset = XML_GetCurrentByteIndex(parser.get());
    throw ParseError(
        std::string("malformed XML: ") +
            XML_ErrorString(XML_GetErrorCode(parser.get())),
        offset < 0 ? ParseError::kNoOffset : static_cast<std::size_t>(offset));
  }
  if (state.tree.nodes.empty()) throw ParseError("XML document has no root element", 0);
  return std::move(state.tree);
}

DocumentTree load_document(const std::filesystem::path& file,
                           const IngestConfig& config, std::string locator) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot read " + file.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (!in.good() && !in.eof()) throw IoError("read failure on " + file.string());
  return parse_document(buffer.str(), config, std::move(locator));
}

ContextPath context_of(const ElementNode& node, const DocumentTree& tree) {
  ContextPath path;
  std::optional<NodeId> current = node.node_id;
  while (current) {
    const auto& n = tree.node(*current);
    path.tags.push_back(n.tag);
    current = n.parent;
  }
  std::reverse(path.tags.begin(), path.tags.end());
  return path;
}

}  // namespace xsearch
