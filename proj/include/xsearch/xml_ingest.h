#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "xsearch/config.h"

namespace xsearch {

using NodeId = std::uint32_t;

// Preorder label of a node plus the largest preorder id in its subtree.
struct NodeInterval {
  NodeId low = 0;
  NodeId high = 0;

  // Strict descendant test: low < node <= high.
  bool contains(NodeId node) const { return low < node && node <= high; }
  // Descendant-or-self test.
  bool covers(NodeId node) const { return low <= node && node <= high; }

  friend bool operator==(const NodeInterval&, const NodeInterval&) = default;
};

struct Token {
  std::string stem;
  std::uint32_t position = 0;

  friend bool operator==(const Token&, const Token&) = default;
};

// Root-to-node sequence of element tags.
struct ContextPath {
  std::vector<std::string> tags;

  // "/article/sec/p"
  std::string to_string() const;
  static ContextPath from_string(std::string_view text);

  friend auto operator<=>(const ContextPath&, const ContextPath&) = default;
};

struct ElementNode {
  std::string tag;
  NodeId node_id = 0;
  NodeInterval interval;
  std::optional<NodeId> parent;
  std::vector<NodeId> children;
  // Tokens directly owned by this element, in document order.
  std::vector<Token> tokens;
};

struct IngestConfig {
  std::set<std::string, std::less<>> stopwords;
  // Tag-equivalence classes applied to element names at ingest.
  std::map<std::string, std::string, std::less<>> tag_classes;
  bool index_numbers = false;

  // Built-in English stopword list, empty tag mapping, numbers off.
  static const IngestConfig& defaults();
  // Reads `stopwords`, `index_numbers` and the `[tags]` section. Relative
  // stopword paths resolve against `base_dir`.
  static IngestConfig from_config(const ConfigFile& config,
                                  const std::filesystem::path& base_dir = {});

  std::string map_tag(std::string_view tag) const;
  bool is_stopword(std::string_view word) const;

  friend bool operator==(const IngestConfig&, const IngestConfig&) = default;
};

std::vector<std::string> default_stopwords();
// One word per line; blank lines and `#` comments are skipped.
std::set<std::string, std::less<>> load_stopword_file(
    const std::filesystem::path& path);

// A parsed document. Nodes are stored in preorder so nodes[i].node_id == i.
struct DocumentTree {
  std::string locator;
  std::vector<ElementNode> nodes;

  const ElementNode& root() const { return nodes.front(); }
  const ElementNode& node(NodeId id) const { return nodes.at(id); }
  std::size_t token_count() const;
};

// Alphanumeric runs of `text`, case preserved.
std::vector<std::string> split_words(std::string_view text);

// Lowercases and stems one alphanumeric word; nullopt when the word is a
// stopword or a number (unless numbers are indexed).
std::optional<std::string> normalize_word(std::string_view word,
                                          const IngestConfig& config);

std::vector<std::string> tokenize(std::string_view text,
                                  const IngestConfig& config);

DocumentTree parse_document(std::string_view bytes, const IngestConfig& config,
                            std::string locator = {});
DocumentTree load_document(const std::filesystem::path& file,
                           const IngestConfig& config, std::string locator);

ContextPath context_of(const ElementNode& node, const DocumentTree& tree);

}  // namespace xsearch
