#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "xsearch/config.h"
#include "xsearch/xml_ingest.h"

namespace xsearch {

// One descendant-axis step of a query path. The attribute condition is
// carried through parsing and printing but never evaluated.
struct QueryStep {
  std::string tag;
  std::optional<std::string> condition;

  friend bool operator==(const QueryStep&, const QueryStep&) = default;
};

struct QueryPath {
  std::vector<QueryStep> steps;

  static QueryPath from_tags(const std::vector<std::string>& tags);
  // Accepts "/a/b", "//a//b", "[/a/b/]"; empty steps are ignored.
  static QueryPath parse(std::string_view text);

  std::vector<std::string> tags() const;
  bool empty() const { return steps.empty(); }
  std::size_t size() const { return steps.size(); }
  // "[/article/sec/]"
  std::string to_string() const;

  friend bool operator==(const QueryPath&, const QueryPath&) = default;
};

// Costs of the elementary edit operations, each in [0, 1]. The substitution
// hook, when set, replaces the exact-match 0 / mismatch_cost rule.
struct CostMatrix {
  using SubstitutionFn =
      std::function<double(std::string_view query_tag, std::string_view context_tag)>;

  double delete_cost = 0.0;    // c(n, eps): drop a context node
  double insert_cost = 1.0;    // c(eps, n): add a query node
  double mismatch_cost = 1.0;  // c(nR, n) for differing tags
  SubstitutionFn substitute;

  static CostMatrix defaults() { return {}; }
  // Reads `delete`, `insert` and `substitute` from the `[costs]` section or
  // the unnamed section. Throws ConfigError on values outside [0, 1].
  static CostMatrix from_config(const ConfigFile& config);

  double substitution(std::string_view query_tag, std::string_view context_tag) const;
  void validate() const;
};

enum class EditOp { kMatch, kSubstitute, kDelete, kInsert };

struct EditStep {
  EditOp op;
  std::string query_tag;    // empty for kDelete
  std::string context_tag;  // empty for kInsert
  double cost = 0.0;
};

struct AlignmentResult {
  double distance = 0.0;
  double similarity = 1.0;
  // Minimal-cost script transforming the context into the query.
  std::vector<EditStep> script;
};

// Wagner-Fischer minimal transformation cost of `context` into `query`.
double edit_distance(const QueryPath& query, const ContextPath& context,
                     const CostMatrix& costs = CostMatrix::defaults());
AlignmentResult align(const QueryPath& query, const ContextPath& context,
                      const CostMatrix& costs = CostMatrix::defaults());

inline double similarity_from_distance(double distance) { return 1.0 / (1.0 + distance); }

double similarity(const QueryPath& query, const ContextPath& context,
                  const CostMatrix& costs = CostMatrix::defaults());

struct BestMatch {
  double similarity = 0.0;
  // Index into the candidate span; nullopt for an empty candidate set.
  std::optional<std::size_t> witness;
};

// Highest similarity over the candidates; ties go to the earliest one.
BestMatch best_similarity(const QueryPath& query, std::span<const ContextPath> candidates,
                          const CostMatrix& costs = CostMatrix::defaults());

// True when the query tags occur in order (not necessarily contiguously)
// in the context.
bool is_tag_subsequence(const QueryPath& query, const ContextPath& context);

std::string_view edit_op_name(EditOp op);

}  // namespace xsearch
