#include "xsearch/query_algebra.h"

#include <algorithm>
#include <cmath>

#include "xsearch/error.h"

namespace xsearch {

void ResultSet::put(const ScoredElement& element) {
  if (element.value <= 0.0) {
    entries_.erase(element.key());
    return;
  }
  entries_[element.key()] = element;
}

void ResultSet::put_max(const ScoredElement& element) {
  if (element.value <= 0.0) return;
  auto [it, inserted] = entries_.try_emplace(element.key(), element);
  if (!inserted && element.value > it->second.value) it->second = element;
}

const ScoredElement* ResultSet::find(ElementKey key) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

std::size_t ResultSet::document_count() const {
  std::size_t count = 0;
  std::optional<DocId> last;
  for (const auto& [key, element] : entries_) {
    if (last != key.doc_id) ++count;
    last = key.doc_id;
  }
  return count;
}

ResultSet eval_term(const IndexHandle& handle, std::string_view stem) {
  ResultSet out;
  for (const auto& p : handle.lookup(stem))
    out.put({p.doc_id, p.node_id(), p.interval, p.context_id, 1.0});
  return out;
}

namespace {

const PostingEntry* posting_at(std::span<const PostingEntry> list, DocId doc, std::uint32_t position) {
  const auto it = std::lower_bound(list.begin(), list.end(), std::pair{doc, position},
                                   [](const PostingEntry& p, const std::pair<DocId, std::uint32_t>& k) {
                                     return std::pair{p.doc_id, p.position} < k;
                                   });
  if (it == list.end() || it->doc_id != doc || it->position != position) return nullptr;
  return &*it;
}

}  // namespace

ResultSet eval_seq(const IndexHandle& handle, std::span<const std::optional<std::string>> pattern) {
  const auto anchor_it = std::find_if(pattern.begin(), pattern.end(), [](const auto& s) { return s.has_value(); });
  if (anchor_it == pattern.end()) throw QueryError("SEQ: pattern needs at least one non-wildcard word");
  const auto anchor = static_cast<std::uint32_t>(anchor_it - pattern.begin());
  const auto length = static_cast<std::uint32_t>(pattern.size());

  std::vector<std::span<const PostingEntry>> lists(pattern.size());
  for (std::size_t i = 0; i < pattern.size(); ++i)
    if (pattern[i]) lists[i] = handle.lookup(*pattern[i]);

  ResultSet out;
  std::vector<NodeId> owners;
  for (const auto& p : lists[anchor]) {
    if (p.position < anchor) continue;
    const std::uint32_t start = p.position - anchor;
    if (start + length > handle.document(p.doc_id).token_count) continue;
    owners.clear();
    bool matched = true;
    for (std::uint32_t i = 0; i < length && matched; ++i) {
      if (i == anchor || !pattern[i]) continue;
      const PostingEntry* q = posting_at(lists[i], p.doc_id, start + i);
      if (q == nullptr) matched = false;
      else owners.push_back(q->node_id());
    }
    if (!matched) continue;

    const DocStructure& structure = handle.document(p.doc_id).structure;
    NodeId lowest = p.node_id();
    const auto covers_all = [&](NodeId n) {
      const auto& iv = structure.node(n).interval;
      return std::all_of(owners.begin(), owners.end(), [&](NodeId o) { return iv.covers(o); });
    };
    while (!covers_all(lowest)) lowest = *structure.node(lowest).parent;

    ScoredElement e{p.doc_id, lowest, structure.node(lowest).interval, p.context_id, 1.0};
    if (lowest != p.node_id())
      e.context_id = handle.dictionary().find(structure.context(lowest)).value_or(kNoContext);
    out.put(e);
  }
  return out;
}

ResultSet eval_or(std::span<const ResultSet> children) {
  ResultSet out;
  for (const auto& child : children)
    for (const auto& [key, element] : child) out.put_max(element);
  return out;
}

ResultSet eval_and(std::span<const ResultSet> children) {
  ResultSet out;
  if (children.empty()) return out;
  for (const auto& [key, element] : children.front()) {
    ScoredElement e = element;
    bool everywhere = true;
    for (const auto& other : children.subspan(1)) {
      const ScoredElement* o = other.find(key);
      if (o == nullptr) {
        everywhere = false;
        break;
      }
      e.value = std::min(e.value, o->value);
    }
    if (everywhere) out.put(e);
  }
  return out;
}

ResultSet eval_without(const ResultSet& r0, const ResultSet& r1) {
  ResultSet out;
  for (const auto& [key, element] : r0) {
    ScoredElement e = element;
    if (const ScoredElement* o = r1.find(key)) e.value = std::max(0.0, e.value - o->value);
    out.put(e);
  }
  return out;
}

ResultSet eval_in(std::span<const ResultSet> children,
                  const std::function<bool(const ScoredElement&)>& delta) {
  ResultSet out;
  for (const auto& [key, element] : eval_and(children))
    if (delta(element)) out.put(element);
  return out;
}

ResultSet eval_inplus(std::span<const ResultSet> children, double beta,
                      const std::function<double(const ScoredElement&)>& sigma) {
  ResultSet out;
  for (const auto& [key, element] : eval_and(children)) {
    ScoredElement e = element;
    e.value = beta * sigma(element) + (1.0 - beta) * element.value;
    out.put(e);
  }
  return out;
}

double discrimination_weight(std::uint64_t doc_freq, std::uint64_t total_docs) {
  return 1.0 - std::log((1.0 + static_cast<double>(doc_freq)) / (1.0 + static_cast<double>(total_docs)));
}

ResultSet eval_sameplus(std::span<const ResultSet> children, std::span<const double> weights) {
  if (children.size() != weights.size()) throw QueryError("SAME+: one weight per operand required");
  double total = 0.0;
  for (double w : weights) total += w;
  ResultSet out;
  if (total <= 0.0) return out;

  std::map<ElementKey, ScoredElement> acc;
  for (std::size_t k = 0; k < children.size(); ++k) {
    if (weights[k] == 0.0) continue;
    for (const auto& [key, element] : children[k]) {
      auto [it, inserted] = acc.try_emplace(key, element);
      if (inserted) it->second.value = 0.0;
      it->second.value += weights[k] * element.value;
    }
  }
  for (auto& [key, element] : acc) {
    element.value /= total;
    out.put(element);
  }
  return out;
}

ResultSet eval_filter(const ResultSet& support, const ResultSet& target) {
  std::map<DocId, double> best;
  for (const auto& [key, element] : support) {
    double& b = best[key.doc_id];
    b = std::max(b, element.value);
  }
  ResultSet out;
  for (const auto& [key, element] : target) {
    const auto it = best.find(key.doc_id);
    if (it == best.end()) continue;
    ScoredElement e = element;
    e.value = (element.value + it->second) / 2.0;
    out.put(e);
  }
  return out;
}

Evaluator::Evaluator(const IndexHandle& handle, CostMatrix costs)
    : handle_(handle), costs_(std::move(costs)) {
  costs_.validate();
}

ResultSet Evaluator::eval(const QueryNode& query) {
  validate(query);
  return run(query, nullptr);
}

EvalTrace Evaluator::trace(const QueryNode& query) {
  validate(query);
  EvalTrace t;
  run(query, &t);
  return t;
}

std::vector<std::string> Evaluator::stems_of(std::string_view word) const {
  std::vector<std::string> out;
  for (const auto& w : split_words(word))
    if (auto stem = normalize_word(w, handle_.ingest_config())) out.push_back(std::move(*stem));
  return out;
}

std::vector<std::optional<std::string>> Evaluator::normalize_pattern(
    const std::vector<std::string>& words) const {
  std::vector<std::optional<std::string>> out;
  for (const auto& w : words) {
    if (w == kWildcard) {
      out.emplace_back(std::nullopt);
      continue;
    }
    for (auto& stem : stems_of(w)) out.emplace_back(std::move(stem));
  }
  return out;
}

ContextPath Evaluator::context_of(const ScoredElement& element) const {
  if (element.context_id != kNoContext) return handle_.dictionary().path(element.context_id);
  return handle_.document(element.doc_id).structure.context(element.node_id);
}

QueryPath Evaluator::mapped(const QueryPath& path) const {
  QueryPath out = path;
  for (auto& step : out.steps) step.tag = handle_.ingest_config().map_tag(step.tag);
  return out;
}

std::vector<ContextPath> Evaluator::candidates(const QueryPath& path, const ContextPath& context) const {
  std::vector<ContextPath> all, ending;
  for (std::size_t n = 1; n <= context.tags.size(); ++n) {
    ContextPath prefix{{context.tags.begin(), context.tags.begin() + static_cast<std::ptrdiff_t>(n)}};
    if (!path.empty() && prefix.tags.back() == path.steps.back().tag) ending.push_back(prefix);
    all.push_back(std::move(prefix));
  }
  return ending.empty() ? all : ending;
}

bool Evaluator::delta(const QueryPath& path, const ScoredElement& element) {
  const auto compute = [&] {
    return edit_distance(mapped(path), context_of(element), CostMatrix::defaults()) == 0.0;
  };
  if (element.context_id == kNoContext) return compute();
  const auto key = std::pair{path.to_string(), element.context_id};
  if (const auto it = delta_memo_.find(key); it != delta_memo_.end()) return it->second;
  return delta_memo_[key] = compute();
}

double Evaluator::sigma(const QueryPath& path, const ScoredElement& element) {
  const auto compute = [&] {
    const QueryPath q = mapped(path);
    const auto cands = candidates(q, context_of(element));
    return best_similarity(q, cands, costs_).similarity;
  };
  if (element.context_id == kNoContext) return compute();
  const auto key = std::pair{path.to_string(), element.context_id};
  if (const auto it = sigma_memo_.find(key); it != sigma_memo_.end()) return it->second;
  return sigma_memo_[key] = compute();
}

StructuralMatch Evaluator::structural_match(const QueryPath& path, const ScoredElement& element) const {
  const QueryPath q = mapped(path);
  const auto cands = candidates(q, context_of(element));
  const BestMatch best = best_similarity(q, cands, costs_);
  StructuralMatch out;
  out.similarity = best.similarity;
  if (best.witness) {
    out.witness = cands[*best.witness];
    out.script = align(q, out.witness, costs_).script;
  }
  return out;
}

ResultSet Evaluator::lift_to_documents(const ResultSet& results) const {
  std::map<DocId, double> best;
  for (const auto& [key, element] : results) {
    double& b = best[key.doc_id];
    b = std::max(b, element.value);
  }
  ResultSet out;
  for (const auto& [doc, value] : best) {
    const DocStructure& structure = handle_.document(doc).structure;
    const ContextId ctx = handle_.dictionary().find(structure.context(0)).value_or(kNoContext);
    out.put({doc, 0, structure.node(0).interval, ctx, value});
  }
  return out;
}

ResultSet Evaluator::run(const QueryNode& node, EvalTrace* trace) {
  std::vector<ResultSet> results;
  const auto eval_children = [&] {
    if (trace != nullptr) trace->children.resize(node.children.size());
    for (std::size_t i = 0; i < node.children.size(); ++i)
      results.push_back(run(node.children[i], trace ? &trace->children[i] : nullptr));
  };

  ResultSet out;
  switch (node.kind) {
    case OpKind::kTerm: {
      const auto stems = stems_of(node.term);
      if (stems.size() == 1) {
        out = eval_term(handle_, stems.front());
      } else if (!stems.empty()) {
        const std::vector<std::optional<std::string>> pattern(stems.begin(), stems.end());
        out = eval_seq(handle_, pattern);
      }
      break;
    }
    case OpKind::kSeq: {
      const auto pattern = normalize_pattern(node.pattern);
      if (std::any_of(pattern.begin(), pattern.end(), [](const auto& s) { return s.has_value(); }))
        out = eval_seq(handle_, pattern);
      break;
    }
    case OpKind::kOr:
      eval_children();
      out = eval_or(results);
      break;
    case OpKind::kAnd:
      eval_children();
      out = eval_and(results);
      break;
    case OpKind::kWithout:
      eval_children();
      out = eval_without(results[0], results[1]);
      break;
    case OpKind::kIn:
      eval_children();
      out = eval_in(results, [&](const ScoredElement& e) { return delta(node.path, e); });
      break;
    case OpKind::kInPlus:
      eval_children();
      out = eval_inplus(results, node.beta, [&](const ScoredElement& e) { return sigma(node.path, e); });
      break;
    case OpKind::kSamePlus: {
      eval_children();
      std::vector<double> weights;
      std::vector<std::uint64_t> counts;
      const std::uint64_t total = handle_.stats().total_docs;
      for (std::size_t k = 0; k < node.children.size(); ++k) {
        const QueryNode& child = node.children[k];
        std::uint64_t n = 0;
        bool void_child = false;
        if (child.kind == OpKind::kTerm) {
          const auto stems = stems_of(child.term);
          void_child = stems.empty();
          n = stems.size() == 1 ? handle_.stats().doc_freq_of(stems.front()) : results[k].document_count();
        } else if (child.kind == OpKind::kSeq) {
          const auto pattern = normalize_pattern(child.pattern);
          void_child = std::none_of(pattern.begin(), pattern.end(), [](const auto& s) { return s.has_value(); });
          n = results[k].document_count();
        } else {
          n = results[k].document_count();
        }
        counts.push_back(n);
        weights.push_back(void_child ? 0.0 : discrimination_weight(n, total));
      }
      out = eval_sameplus(results, weights);
      if (trace != nullptr) {
        trace->weights = std::move(weights);
        trace->doc_counts = std::move(counts);
      }
      break;
    }
    case OpKind::kFilter: {
      if (trace != nullptr) trace->children.resize(2);
      const ResultSet support = run_support(node.children[0], trace ? &trace->children[0] : nullptr);
      const ResultSet target = run(node.children[1], trace ? &trace->children[1] : nullptr);
      out = eval_filter(support, target);
      break;
    }
  }
  if (trace != nullptr) {
    trace->query = &node;
    trace->result = out;
  }
  return out;
}

// Supports only need to exist somewhere in the document, so boolean
// combinations of supports are taken per document rather than per element.
ResultSet Evaluator::run_support(const QueryNode& node, EvalTrace* trace) {
  if (node.kind != OpKind::kAnd && node.kind != OpKind::kOr && node.kind != OpKind::kWithout)
    return lift_to_documents(run(node, trace));

  std::vector<ResultSet> results;
  if (trace != nullptr) trace->children.resize(node.children.size());
  for (std::size_t i = 0; i < node.children.size(); ++i)
    results.push_back(run_support(node.children[i], trace ? &trace->children[i] : nullptr));
  ResultSet out;
  if (node.kind == OpKind::kAnd) out = eval_and(results);
  else if (node.kind == OpKind::kOr) out = eval_or(results);
  else out = eval_without(results[0], results[1]);
  if (trace != nullptr) {
    trace->query = &node;
    trace->result = out;
    trace->document_scope = true;
  }
  return out;
}

ResultSet eval(const IndexHandle& handle, const QueryNode& query, const CostMatrix& costs) {
  return Evaluator(handle, costs).eval(query);
}

}  // namespace xsearch
