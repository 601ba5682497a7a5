#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "xsearch/context_index.h"
#include "xsearch/path_similarity.h"
#include "xsearch/query_tree.h"

namespace xsearch {

struct ElementKey {
  DocId doc_id = 0;
  NodeId node_id = 0;

  friend auto operator<=>(const ElementKey&, const ElementKey&) = default;
};

struct ScoredElement {
  DocId doc_id = 0;
  NodeId node_id = 0;
  NodeInterval interval;
  // kNoContext for elements that own no tokens (propagated ancestors,
  // document roots lifted for support evaluation).
  ContextId context_id = kNoContext;
  double value = 0.0;

  ElementKey key() const { return {doc_id, node_id}; }

  friend bool operator==(const ScoredElement&, const ScoredElement&) = default;
};

// At most one entry per element, ordered by (doc_id, node_id). Entries with
// a value <= 0 are never stored.
class ResultSet {
 public:
  using Map = std::map<ElementKey, ScoredElement>;

  // Replaces any existing entry; a non-positive value erases it instead.
  void put(const ScoredElement& element);
  // Keeps the larger of the existing and the new value.
  void put_max(const ScoredElement& element);
  void erase(ElementKey key) { entries_.erase(key); }

  const ScoredElement* find(ElementKey key) const;
  bool contains(ElementKey key) const { return entries_.count(key) != 0; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  Map::const_iterator begin() const { return entries_.begin(); }
  Map::const_iterator end() const { return entries_.end(); }
  const Map& entries() const { return entries_; }

  // Distinct documents with at least one entry.
  std::size_t document_count() const;

  friend bool operator==(const ResultSet&, const ResultSet&) = default;

 private:
  Map entries_;
};

// Leaves. Values are presence (1).
ResultSet eval_term(const IndexHandle& handle, std::string_view stem);
// nullopt slots are wildcards matching exactly one token. Each match scores
// the lowest element covering all non-wildcard tokens. Throws QueryError
// when every slot is a wildcard.
ResultSet eval_seq(const IndexHandle& handle, std::span<const std::optional<std::string>> pattern);

ResultSet eval_or(std::span<const ResultSet> children);
// Intersection; value is the minimum over children.
ResultSet eval_and(std::span<const ResultSet> children);
ResultSet eval_without(const ResultSet& r0, const ResultSet& r1);

// min(min_k v_k, delta(e)) over the intersection of the children.
ResultSet eval_in(std::span<const ResultSet> children,
                  const std::function<bool(const ScoredElement&)>& delta);
// beta * sigma(e) + (1 - beta) * min_k v_k over the intersection of the children.
ResultSet eval_inplus(std::span<const ResultSet> children, double beta,
                      const std::function<double(const ScoredElement&)>& sigma);

// 1 - ln((1 + doc_freq) / (1 + total_docs))
double discrimination_weight(std::uint64_t doc_freq, std::uint64_t total_docs);
// tau * sum_k lambda_k v_k over children containing e, tau = 1 / sum_k lambda_k.
ResultSet eval_sameplus(std::span<const ResultSet> children, std::span<const double> weights);
// (v_target + max support value in the same document) / 2; targets in
// documents without support are dropped.
ResultSet eval_filter(const ResultSet& support, const ResultSet& target);

// Per-node record of one evaluation, parallel to the query tree.
struct EvalTrace {
  const QueryNode* query = nullptr;
  ResultSet result;
  // True when `result` holds per-document values on root elements (the
  // support side of FILTER).
  bool document_scope = false;
  // SAME+: lambda_k and the document counts they were computed from, one per
  // child (children that normalize to no stem get weight 0).
  std::vector<double> weights;
  std::vector<std::uint64_t> doc_counts;
  std::vector<EvalTrace> children;
};

struct StructuralMatch {
  double similarity = 0.0;
  ContextPath witness;
  std::vector<EditStep> script;
};

// Evaluates query trees against one index. Normalizes query words with the
// index's ingest settings and memoizes structural scores per (path, context).
// Not thread-safe; use one evaluator per thread.
class Evaluator {
 public:
  explicit Evaluator(const IndexHandle& handle, CostMatrix costs = CostMatrix::defaults());

  // Validates, then evaluates. Throws QueryError on a malformed tree.
  ResultSet eval(const QueryNode& query);
  EvalTrace trace(const QueryNode& query);

  // Stems a TERM word expands to; empty when it is a stopword or a number.
  std::vector<std::string> stems_of(std::string_view word) const;
  // Normalized SEQ pattern; wildcards become nullopt.
  std::vector<std::optional<std::string>> normalize_pattern(const std::vector<std::string>& words) const;

  // Strict structural test: the path is a tag subsequence of the element's context.
  bool delta(const QueryPath& path, const ScoredElement& element);
  // Best similarity over the element's ancestor-or-self contexts ending in
  // the path's last tag (all of them when none do).
  double sigma(const QueryPath& path, const ScoredElement& element);
  StructuralMatch structural_match(const QueryPath& path, const ScoredElement& element) const;

  ContextPath context_of(const ScoredElement& element) const;
  const IndexHandle& handle() const { return handle_; }
  const CostMatrix& costs() const { return costs_; }

 private:
  ResultSet run(const QueryNode& node, EvalTrace* trace);
  ResultSet run_support(const QueryNode& node, EvalTrace* trace);
  ResultSet lift_to_documents(const ResultSet& results) const;
  QueryPath mapped(const QueryPath& path) const;
  std::vector<ContextPath> candidates(const QueryPath& path, const ContextPath& context) const;

  const IndexHandle& handle_;
  CostMatrix costs_;
  std::map<std::pair<std::string, ContextId>, double> sigma_memo_;
  std::map<std::pair<std::string, ContextId>, bool> delta_memo_;
};

ResultSet eval(const IndexHandle& handle, const QueryNode& query,
               const CostMatrix& costs = CostMatrix::defaults());

}  // namespace xsearch
