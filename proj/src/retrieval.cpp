#include "xsearch/retrieval.h"

#include <algorithm>
#include <cctype>
#include <cstdio>

#include "xsearch/error.h"

namespace xsearch {

bool is_sexpr(std::string_view query) {
  const auto first = query.find_first_not_of(" \t\r\n");
  return first != std::string_view::npos && query[first] == '(';
}

QueryNode compile_query(const SearchRequest& request, const IngestConfig& config) {
  if (request.cutoff == 0) throw QueryError("cutoff must be at least 1");
  QueryNode query = is_sexpr(request.query)
                        ? parse_sexpr(request.query)
                        : translate(parse_nexi(request.query), request.strategy, config);
  validate(query);
  return query;
}

RankedList rank_results(const IndexHandle& handle, const ResultSet& results, std::size_t cutoff) {
  std::vector<const ScoredElement*> order;
  order.reserve(results.size());
  for (const auto& [key, element] : results) order.push_back(&element);
  // The set iterates in (doc_id, node_id) order, so a stable sort on the
  // score alone yields the full tie-break.
  std::stable_sort(order.begin(), order.end(),
                   [](const ScoredElement* a, const ScoredElement* b) { return a->value > b->value; });
  if (order.size() > cutoff) order.resize(cutoff);

  RankedList out;
  out.reserve(order.size());
  for (const ScoredElement* e : order) {
    const DocumentRecord& doc = handle.document(e->doc_id);
    out.push_back({out.size() + 1, e->doc_id, e->node_id, doc.locator,
                   doc.structure.element_path(e->node_id), e->value});
  }
  return out;
}

RankedList search(const IndexHandle& handle, const SearchRequest& request, const CostMatrix& costs) {
  const QueryNode query = compile_query(request, handle.ingest_config());
  ResultSet results = Evaluator(handle, costs).eval(query);
  if (request.focused) {
    results = highest_ancestor(propagate_max(
        results, [&](DocId doc) -> const DocStructure& { return handle.document(doc).structure; }));
  }
  return rank_results(handle, results, request.cutoff);
}

ResultSet propagate_max(const ResultSet& results, const StructureLookup& structure) {
  ResultSet out = results;
  for (const auto& [key, element] : results) {
    const DocStructure& s = structure(key.doc_id);
    std::optional<NodeId> up = s.node(key.node_id).parent;
    while (up) {
      const StructureNode& n = s.node(*up);
      const ScoredElement* existing = out.find({key.doc_id, *up});
      out.put_max({key.doc_id, *up, n.interval, existing ? existing->context_id : kNoContext, element.value});
      up = n.parent;
    }
  }
  return out;
}

ResultSet highest_ancestor(const ResultSet& results) {
  ResultSet out;
  std::optional<ScoredElement> open;
  for (const auto& [key, element] : results) {
    if (open && open->doc_id == key.doc_id && open->interval.contains(key.node_id)) continue;
    open = element;
    out.put(element);
  }
  return out;
}

ElementKey resolve_element(const IndexHandle& handle, std::string_view spec) {
  const auto split = spec.rfind(":/");
  if (split == std::string_view::npos)
    throw NotFoundError("element must look like LOCATOR:/tag[n]/...: " + std::string(spec));
  const auto locator = spec.substr(0, split);
  const auto doc = handle.find_document(locator);
  if (!doc) throw NotFoundError("unknown document: " + std::string(locator));
  const auto node = handle.document(*doc).structure.resolve_path(spec.substr(split + 1));
  if (!node) throw NotFoundError("no such element: " + std::string(spec));
  return {*doc, *node};
}

namespace {

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

class Explainer {
 public:
  Explainer(const IndexHandle& handle, Evaluator& evaluator) : handle_(handle), evaluator_(evaluator) {}

  Explanation element(const EvalTrace& t, ElementKey key) {
    Explanation out;
    out.label = label(*t.query);
    if (const ScoredElement* e = t.result.find(key)) out.value = e->value;
    const QueryNode& q = *t.query;

    switch (q.kind) {
      case OpKind::kTerm:
      case OpKind::kSeq: {
        std::string stems;
        const auto pattern = q.kind == OpKind::kTerm ? std::vector<std::string>{q.term} : q.pattern;
        for (const auto& slot : evaluator_.normalize_pattern(pattern)) stems += " " + slot.value_or("*");
        out.notes.push_back("stems:" + (stems.empty() ? std::string(" (none)") : stems));
        break;
      }
      case OpKind::kOr:
      case OpKind::kAnd:
      case OpKind::kWithout:
        for (const auto& c : t.children) out.children.push_back(element(c, key));
        break;
      case OpKind::kIn:
      case OpKind::kInPlus: {
        const ScoredElement* probe = nullptr;
        std::optional<double> content;
        bool everywhere = true;
        for (const auto& c : t.children) {
          out.children.push_back(element(c, key));
          const ScoredElement* e = c.result.find(key);
          if (e == nullptr) {
            everywhere = false;
            continue;
          }
          probe = e;
          content = content ? std::min(*content, e->value) : e->value;
        }
        if (probe == nullptr) break;
        if (everywhere) out.numbers["content_min"] = *content;
        if (q.kind == OpKind::kIn) {
          out.numbers["delta"] = evaluator_.delta(q.path, *probe) ? 1.0 : 0.0;
          out.notes.push_back("context " + evaluator_.context_of(*probe).to_string());
        } else {
          const StructuralMatch m = evaluator_.structural_match(q.path, *probe);
          out.numbers["beta"] = q.beta;
          out.numbers["sigma"] = m.similarity;
          out.notes.push_back("context " + evaluator_.context_of(*probe).to_string());
          out.notes.push_back("witness " + m.witness.to_string());
          std::string script;
          for (const auto& step : m.script) {
            script += (script.empty() ? "" : ", ") + std::string(edit_op_name(step.op));
            if (step.op == EditOp::kMatch || step.op == EditOp::kSubstitute)
              script += " " + step.context_tag + "->" + step.query_tag;
            else if (step.op == EditOp::kDelete)
              script += " " + step.context_tag;
            else
              script += " " + step.query_tag;
          }
          out.notes.push_back("edit script: " + (script.empty() ? std::string("(empty)") : script));
        }
        break;
      }
      case OpKind::kSamePlus: {
        double sum = 0.0;
        for (std::size_t k = 0; k < t.children.size(); ++k) {
          out.children.push_back(element(t.children[k], key));
          const std::string idx = "[" + std::to_string(k) + "]";
          out.numbers["lambda" + idx] = t.weights[k];
          out.numbers["n" + idx] = static_cast<double>(t.doc_counts[k]);
          sum += t.weights[k];
        }
        out.numbers["sum_lambda"] = sum;
        if (sum > 0.0) out.numbers["tau"] = 1.0 / sum;
        out.numbers["total_docs"] = static_cast<double>(handle_.stats().total_docs);
        break;
      }
      case OpKind::kFilter: {
        Explanation support = this->support(t.children[0], key.doc_id);
        Explanation target = element(t.children[1], key);
        if (target.value) out.numbers["target"] = *target.value;
        if (support.value) out.numbers["support_max"] = *support.value;
        else out.notes.push_back("no support in document");
        out.children.push_back(std::move(support));
        out.children.push_back(std::move(target));
        break;
      }
    }
    return out;
  }

  // Per-document view of a support subtree.
  Explanation support(const EvalTrace& t, DocId doc) {
    if (t.document_scope) {
      Explanation out;
      out.label = label(*t.query) + " (per document)";
      if (const ScoredElement* e = t.result.find({doc, 0})) out.value = e->value;
      for (const auto& c : t.children) out.children.push_back(support(c, doc));
      return out;
    }
    const ScoredElement* best = nullptr;
    const auto lo = t.result.entries().lower_bound({doc, 0});
    for (auto it = lo; it != t.result.end() && it->first.doc_id == doc; ++it)
      if (best == nullptr || it->second.value > best->value) best = &it->second;
    if (best == nullptr) {
      Explanation out;
      out.label = label(*t.query);
      out.notes.push_back("no support in document");
      return out;
    }
    Explanation out = element(t, best->key());
    out.notes.insert(out.notes.begin(),
                     "best support element " + handle_.document(doc).structure.element_path(best->node_id));
    return out;
  }

  static bool appears(const EvalTrace& t, ElementKey key) {
    if (!t.document_scope && t.result.contains(key)) return true;
    return std::any_of(t.children.begin(), t.children.end(),
                       [&](const EvalTrace& c) { return appears(c, key); });
  }

 private:
  static std::string label(const QueryNode& q) {
    switch (q.kind) {
      case OpKind::kTerm:
        return "TERM " + q.term;
      case OpKind::kIn:
        return "IN " + q.path.to_string();
      case OpKind::kInPlus:
        return "IN+ " + q.path.to_string();
      default: {
        std::string out(op_name(q.kind));
        if (q.kind == OpKind::kSeq)
          for (const auto& w : q.pattern) out += " " + w;
        return out;
      }
    }
  }

  const IndexHandle& handle_;
  Evaluator& evaluator_;
};

void render(std::string& out, const Explanation& e, int depth) {
  out += std::string(static_cast<std::size_t>(depth) * 2, ' ') + e.label + " = " +
         (e.value ? format_number(*e.value) : std::string("absent")) + "\n";
  const std::string pad(static_cast<std::size_t>(depth) * 2 + 4, ' ');
  for (const auto& [name, v] : e.numbers) out += pad + name + " = " + format_number(v) + "\n";
  for (const auto& note : e.notes) out += pad + note + "\n";
  for (const auto& c : e.children) render(out, c, depth + 1);
}

}  // namespace

Explanation explain(const IndexHandle& handle, const SearchRequest& request, ElementKey element,
                    const CostMatrix& costs) {
  const QueryNode query = compile_query(request, handle.ingest_config());
  Evaluator evaluator(handle, costs);
  const EvalTrace trace = evaluator.trace(query);
  if (!Explainer::appears(trace, element)) throw NotFoundError("element not in any result of the query");
  return Explainer(handle, evaluator).element(trace, element);
}

std::string format_explanation(const Explanation& explanation) {
  std::string out;
  render(out, explanation, 0);
  return out;
}

std::string format_table(const RankedList& hits) {
  std::size_t width = 8;
  for (const auto& h : hits) width = std::max(width, h.locator.size());
  std::string out = "rank  score     " + std::string("document") + std::string(width - 8 + 2, ' ') + "element\n";
  char buf[64];
  for (const auto& h : hits) {
    std::snprintf(buf, sizeof(buf), "%4zu  %.6f  ", h.rank, h.score);
    out += buf + h.locator + std::string(width - h.locator.size() + 2, ' ') + h.path + "\n";
  }
  return out;
}

std::string format_tsv(const RankedList& hits) {
  std::string out;
  for (const auto& h : hits)
    out += std::to_string(h.rank) + "\t" + h.locator + "\t" + h.path + "\t" + format_number(h.score) + "\n";
  return out;
}

namespace {

std::string xml_escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

}  // namespace

std::string format_inex(const RankedList& hits, std::string_view topic_id, std::string_view run_id) {
  std::string out = "<inex-submission run-id=\"" + xml_escape(run_id) + "\">\n";
  out += "  <topic topic-id=\"" + xml_escape(topic_id) + "\">\n";
  for (const auto& h : hits) {
    std::string file = h.locator;
    if (file.size() > 4 && file.compare(file.size() - 4, 4, ".xml") == 0) file.resize(file.size() - 4);
    out += "    <result><file>" + xml_escape(file) + "</file><path>" + xml_escape(h.path) +
           "</path><rank>" + std::to_string(h.rank) + "</rank><rsv>" + format_number(h.score) +
           "</rsv></result>\n";
  }
  return out + "  </topic>\n</inex-submission>\n";
}

}  // namespace xsearch
