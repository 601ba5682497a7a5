#include "xsearch/path_similarity.h"

#include <algorithm>

#include "xsearch/error.h"

namespace xsearch {

QueryPath QueryPath::from_tags(const std::vector<std::string>& tags) {
  QueryPath path;
  for (const auto& tag : tags) path.steps.push_back({tag, std::nullopt});
  return path;
}

QueryPath QueryPath::parse(std::string_view text) {
  if (!text.empty() && text.front() == '[') text.remove_prefix(1);
  if (!text.empty() && text.back() == ']') text.remove_suffix(1);
  return from_tags(ContextPath::from_string(text).tags);
}

std::vector<std::string> QueryPath::tags() const {
  std::vector<std::string> out;
  out.reserve(steps.size());
  for (const auto& step : steps) out.push_back(step.tag);
  return out;
}

std::string QueryPath::to_string() const {
  std::string out = "[/";
  for (const auto& step : steps) out += step.tag + "/";
  return out + "]";
}

CostMatrix CostMatrix::from_config(const ConfigFile& config) {
  CostMatrix costs;
  for (const std::string_view section : {std::string_view(""), std::string_view("costs")}) {
    if (auto v = config.get_double(section, "delete")) costs.delete_cost = *v;
    if (auto v = config.get_double(section, "insert")) costs.insert_cost = *v;
    if (auto v = config.get_double(section, "substitute")) costs.mismatch_cost = *v;
  }
  costs.validate();
  return costs;
}

double CostMatrix::substitution(std::string_view query_tag, std::string_view context_tag) const {
  if (substitute) return substitute(query_tag, context_tag);
  return query_tag == context_tag ? 0.0 : mismatch_cost;
}

void CostMatrix::validate() const {
  const auto in_range = [](double c) { return c >= 0.0 && c <= 1.0; };
  if (!in_range(delete_cost) || !in_range(insert_cost) || !in_range(mismatch_cost))
    throw ConfigError("edit costs must lie in [0, 1]");
}

namespace {

// Full DP table: table[i][j] = cost of turning context[0..i) into query[0..j).
std::vector<std::vector<double>> cost_table(const QueryPath& query, const ContextPath& context,
                                            const CostMatrix& costs) {
  const std::size_t n = context.tags.size();
  const std::size_t m = query.steps.size();
  std::vector<std::vector<double>> table(n + 1, std::vector<double>(m + 1, 0.0));
  for (std::size_t i = 1; i <= n; ++i) table[i][0] = table[i - 1][0] + costs.delete_cost;
  for (std::size_t j = 1; j <= m; ++j) table[0][j] = table[0][j - 1] + costs.insert_cost;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      table[i][j] = std::min({table[i - 1][j] + costs.delete_cost,
                              table[i][j - 1] + costs.insert_cost,
                              table[i - 1][j - 1] +
                                  costs.substitution(query.steps[j - 1].tag, context.tags[i - 1])});
    }
  }
  return table;
}

}  // namespace

double edit_distance(const QueryPath& query, const ContextPath& context, const CostMatrix& costs) {
  // Two-row variant of cost_table.
  const std::size_t m = query.steps.size();
  std::vector<double> prev(m + 1), cur(m + 1);
  for (std::size_t j = 1; j <= m; ++j) prev[j] = prev[j - 1] + costs.insert_cost;
  for (const auto& ctag : context.tags) {
    cur[0] = prev[0] + costs.delete_cost;
    for (std::size_t j = 1; j <= m; ++j) {
      cur[j] = std::min({prev[j] + costs.delete_cost, cur[j - 1] + costs.insert_cost,
                         prev[j - 1] + costs.substitution(query.steps[j - 1].tag, ctag)});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

AlignmentResult align(const QueryPath& query, const ContextPath& context, const CostMatrix& costs) {
  const auto table = cost_table(query, context, costs);
  AlignmentResult result;
  std::size_t i = context.tags.size();
  std::size_t j = query.steps.size();
  result.distance = table[i][j];
  result.similarity = similarity_from_distance(result.distance);
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      const auto& qtag = query.steps[j - 1].tag;
      const auto& ctag = context.tags[i - 1];
      const double sub = costs.substitution(qtag, ctag);
      if (table[i][j] == table[i - 1][j - 1] + sub) {
        result.script.push_back({sub == 0.0 ? EditOp::kMatch : EditOp::kSubstitute, qtag, ctag, sub});
        --i;
        --j;
        continue;
      }
    }
    if (i > 0 && table[i][j] == table[i - 1][j] + costs.delete_cost) {
      result.script.push_back({EditOp::kDelete, "", context.tags[i - 1], costs.delete_cost});
      --i;
      continue;
    }
    result.script.push_back({EditOp::kInsert, query.steps[j - 1].tag, "", costs.insert_cost});
    --j;
  }
  std::reverse(result.script.begin(), result.script.end());
  return result;
}

double similarity(const QueryPath& query, const ContextPath& context, const CostMatrix& costs) {
  return similarity_from_distance(edit_distance(query, context, costs));
}

BestMatch best_similarity(const QueryPath& query, std::span<const ContextPath> candidates,
                          const CostMatrix& costs) {
  BestMatch best;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double s = similarity(query, candidates[i], costs);
    if (!best.witness || s > best.similarity) {
      best.similarity = s;
      best.witness = i;
    }
  }
  return best;
}

bool is_tag_subsequence(const QueryPath& query, const ContextPath& context) {
  std::size_t j = 0;
  for (const auto& tag : context.tags)
    if (j < query.steps.size() && query.steps[j].tag == tag) ++j;
  return j == query.steps.size();
}

std::string_view edit_op_name(EditOp op) {
  switch (op) {
    case EditOp::kMatch:
      return "match";
    case EditOp::kSubstitute:
      return "substitute";
    case EditOp::kDelete:
      return "delete";
    case EditOp::kInsert:
      return "insert";
  }
  return "?";
}

}  // namespace xsearch
