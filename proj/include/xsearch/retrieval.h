#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "xsearch/context_index.h"
#include "xsearch/nexi.h"
#include "xsearch/query_algebra.h"

namespace xsearch {

inline constexpr std::size_t kDefaultCutoff = 1500;

struct SearchRequest {
  // NEXI castitle, or an s-expression when the first non-blank is '('.
  std::string query;
  StrategyOptions strategy;
  std::size_t cutoff = kDefaultCutoff;
  bool focused = false;
};

struct RankedHit {
  std::size_t rank = 0;
  DocId doc_id = 0;
  NodeId node_id = 0;
  std::string locator;
  std::string path;  // "/article[1]/sec[2]"
  double score = 0.0;

  friend bool operator==(const RankedHit&, const RankedHit&) = default;
};

using RankedList = std::vector<RankedHit>;

bool is_sexpr(std::string_view query);
// Parses or translates the request's query, normalizing NEXI words with
// `config`; validated.
QueryNode compile_query(const SearchRequest& request, const IngestConfig& config);

// Sorts by score desc, doc_id asc, node_id asc and keeps the first `cutoff`.
RankedList rank_results(const IndexHandle& handle, const ResultSet& results, std::size_t cutoff);

RankedList search(const IndexHandle& handle, const SearchRequest& request,
                  const CostMatrix& costs = CostMatrix::defaults());

using StructureLookup = std::function<const DocStructure&(DocId)>;

// Every ancestor of a scored element gets the max of its own value and the
// values of its scored descendants.
ResultSet propagate_max(const ResultSet& results, const StructureLookup& structure);
// Keeps only scored elements with no scored ancestor.
ResultSet highest_ancestor(const ResultSet& results);

struct Explanation {
  std::string label;
  std::optional<double> value;  // nullopt: element absent at this node
  std::map<std::string, double> numbers;
  std::vector<std::string> notes;
  std::vector<Explanation> children;
};

// "locator:/article[1]/sec[2]". Throws NotFoundError.
ElementKey resolve_element(const IndexHandle& handle, std::string_view spec);

// Per-operator breakdown of the score of one element. Throws NotFoundError
// when no operator of the query produced the element.
Explanation explain(const IndexHandle& handle, const SearchRequest& request, ElementKey element,
                    const CostMatrix& costs = CostMatrix::defaults());

std::string format_explanation(const Explanation& explanation);
std::string format_table(const RankedList& hits);
// rank TAB doc TAB path TAB score
std::string format_tsv(const RankedList& hits);
std::string format_inex(const RankedList& hits, std::string_view topic_id, std::string_view run_id);

}  // namespace xsearch
