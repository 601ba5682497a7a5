#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "xsearch/path_similarity.h"

namespace xsearch {

enum class OpKind { kTerm, kSeq, kOr, kAnd, kWithout, kIn, kInPlus, kSamePlus, kFilter };

inline constexpr std::string_view kWildcard = "*";
inline constexpr double kDefaultBeta = 0.5;

// A node of a recursive query. Leaves are TERM (one word) and SEQ (a word
// pattern where "*" stands for exactly one arbitrary token). Words are kept
// as written and normalized by the evaluator with the index's tokenizer.
struct QueryNode {
  OpKind kind = OpKind::kTerm;
  std::string term;                  // kTerm
  std::vector<std::string> pattern;  // kSeq
  QueryPath path;                    // kIn, kInPlus
  double beta = kDefaultBeta;        // kInPlus
  std::vector<QueryNode> children;

  static QueryNode make_term(std::string word);
  static QueryNode make_seq(std::vector<std::string> pattern);
  static QueryNode make(OpKind kind, std::vector<QueryNode> children);
  static QueryNode make_in(QueryPath path, std::vector<QueryNode> children);
  static QueryNode make_inplus(QueryPath path, double beta, std::vector<QueryNode> children);

  friend bool operator==(const QueryNode&, const QueryNode&) = default;
};

std::string_view op_name(OpKind kind);

// Throws QueryError on arity violations, empty leaves, all-wildcard
// patterns, empty paths or beta outside [0, 1].
void validate(const QueryNode& node);

// Canonical s-expression, e.g.
//   (FILTER (AND (IN+ [/article/bb/] (SAME+ Baeza Yates))) (IN [/article/sec/] (SAME+ x)))
// IN+ prints `beta=<v>` after the path only when beta differs from 0.5.
std::string to_sexpr(const QueryNode& node);

// Parses the syntax above. Operator names are case-insensitive; bare atoms
// become TERM leaves; `"quoted text"` atoms are kept verbatim as one TERM.
QueryNode parse_sexpr(std::string_view text);

}  // namespace xsearch
