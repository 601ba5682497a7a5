#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "xsearch/xml_ingest.h"

namespace xsearch {

using DocId = std::uint32_t;
using ContextId = std::uint32_t;

inline constexpr ContextId kNoContext = std::numeric_limits<ContextId>::max();

// Format version written to VERSION; bump on any layout change.
inline constexpr int kIndexFormatVersion = 1;

struct PostingEntry {
  DocId doc_id = 0;
  ContextId context_id = 0;
  std::uint32_t position = 0;
  NodeInterval interval;

  NodeId node_id() const { return interval.low; }

  friend bool operator==(const PostingEntry&, const PostingEntry&) = default;
};

// Dense bijection between context ids and context paths.
class ContextDictionary {
 public:
  ContextId intern(const ContextPath& path);
  std::optional<ContextId> find(const ContextPath& path) const;
  const ContextPath& path(ContextId id) const { return paths_.at(id); }
  std::size_t size() const { return paths_.size(); }

  friend bool operator==(const ContextDictionary& a,
                         const ContextDictionary& b) {
    return a.paths_ == b.paths_;
  }

 private:
  std::vector<ContextPath> paths_;
  std::map<ContextPath, ContextId> ids_;
};

struct CorpusStats {
  std::uint64_t total_docs = 0;
  std::map<std::string, std::uint32_t, std::less<>> doc_freq;

  // Zero for unknown terms.
  std::uint32_t doc_freq_of(std::string_view term) const;

  friend bool operator==(const CorpusStats&, const CorpusStats&) = default;
};

struct StructureNode {
  std::string tag;
  std::optional<NodeId> parent;
  NodeInterval interval;
  // 1-based position among siblings with the same tag.
  std::uint32_t ordinal = 1;

  friend bool operator==(const StructureNode&, const StructureNode&) = default;
};

// Element skeleton of one document: what focused post-processing and result
// rendering need once the source file is gone.
class DocStructure {
 public:
  DocStructure() = default;
  static DocStructure from_tree(const DocumentTree& tree);
  // Builds from (tag, parent) pairs in preorder; derives intervals and
  // ordinals. Throws IndexError if the parents do not describe a preorder.
  static DocStructure from_parents(
      std::vector<std::pair<std::string, std::optional<NodeId>>> nodes);

  const std::vector<StructureNode>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  const StructureNode& node(NodeId id) const { return nodes_.at(id); }

  ContextPath context(NodeId id) const;
  // "/article[1]/sec[2]"
  std::string element_path(NodeId id) const;
  std::optional<NodeId> resolve_path(std::string_view element_path) const;

  friend bool operator==(const DocStructure&, const DocStructure&) = default;

 private:
  std::vector<StructureNode> nodes_;
};

struct DocumentRecord {
  std::string locator;
  std::uint32_t token_count = 0;
  DocStructure structure;

  friend bool operator==(const DocumentRecord&, const DocumentRecord&) = default;
};

// Contextual inverted index. Built in memory by a single writer, written with
// commit(), and reopened read-only with open(). A handle that is no longer
// modified is safe to share between threads.
class IndexHandle {
 public:
  using TermLists = std::map<std::string, std::vector<PostingEntry>, std::less<>>;

  IndexHandle() : IndexHandle(IngestConfig::defaults()) {}
  explicit IndexHandle(IngestConfig config) : config_(std::move(config)) {}

  // Adds one posting per token. Throws IndexError on a duplicate locator.
  DocId index_document(const DocumentTree& tree);

  // Postings sorted by (doc_id, position); empty for unknown stems.
  std::span<const PostingEntry> lookup(std::string_view stem) const;

  std::vector<ContextId> contexts_matching(
      const std::function<bool(const ContextPath&)>& predicate) const;

  // Writes the index under `dir` through a temporary sibling directory and a
  // rename, so readers never see a partial index. Throws IndexError when the
  // handle is empty and IoError when `dir` exists and `overwrite` is false.
  void commit(const std::filesystem::path& dir, bool overwrite = false) const;
  static IndexHandle open(const std::filesystem::path& dir);

  const ContextDictionary& dictionary() const { return dictionary_; }
  const CorpusStats& stats() const { return stats_; }
  const TermLists& term_lists() const { return terms_; }
  const IngestConfig& ingest_config() const { return config_; }

  std::size_t document_count() const { return documents_.size(); }
  const DocumentRecord& document(DocId id) const { return documents_.at(id); }
  std::optional<DocId> find_document(std::string_view locator) const;

  // Brute-force recount of document frequencies from the posting lists.
  CorpusStats recompute_stats() const;

  friend bool operator==(const IndexHandle& a, const IndexHandle& b) {
    return a.terms_ == b.terms_ && a.dictionary_ == b.dictionary_ &&
           a.stats_ == b.stats_ && a.documents_ == b.documents_ &&
           a.config_ == b.config_;
  }

 private:
  IngestConfig config_;
  TermLists terms_;
  ContextDictionary dictionary_;
  CorpusStats stats_;
  std::vector<DocumentRecord> documents_;
  std::unordered_map<std::string, DocId> locators_;
};

}  // namespace xsearch
