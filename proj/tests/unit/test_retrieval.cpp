#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.h"
#include "xsearch/error.h"
#include "xsearch/retrieval.h"

using namespace xsearch;

namespace {

SearchRequest request(const std::string& q, Strategy s = Strategy::kVV) {
  return {q, {s, ContentMode::kSamePlus, 0.5}, kDefaultCutoff, false};
}

const DocStructure& single(const DocStructure& s) { return s; }

}  // namespace

TEST_CASE("topic 280 ranks the complete section first") {
  const auto h = fixture::build(fixture::topic280_corpus());
  const auto hits = search(h, request(fixture::kTopic280));
  REQUIRE(hits.size() == 3);
  CHECK(hits[0].locator == "complete.xml");
  CHECK(hits[0].path == "/article[1]/bdy[1]/sec[1]");
  CHECK(hits[0].score == doctest::Approx(1.0).epsilon(1e-12));
  for (std::size_t i = 0; i < hits.size(); ++i) CHECK(hits[i].rank == i + 1);
  for (std::size_t i = 1; i < hits.size(); ++i) CHECK(hits[i - 1].score >= hits[i].score);
  // Distractors missing the bibliography, the string-matching support or
  // the target text never appear.
  for (const auto& hit : hits) {
    CHECK(hit.locator != "no_bb.xml");
    CHECK(hit.locator != "no_string.xml");
    CHECK(hit.locator != "no_target.xml");
  }
}

TEST_CASE("strict structure drops the misplaced document") {
  const auto h = fixture::build(fixture::topic280_corpus());
  const auto hits = search(h, request(fixture::kTopic280, Strategy::kSS));
  REQUIRE(hits.size() == 2);
  for (const auto& hit : hits) CHECK(hit.locator == "complete.xml");
}

TEST_CASE("nothing matches") {
  const auto h = fixture::build(fixture::topic280_corpus());
  CHECK(search(h, request("//article[about(., zebra)]")).empty());
  CHECK(search(h, request("(SAME+ zebra)")).empty());
}

TEST_CASE("cutoff and truncation stability") {
  fixture::Corpus corpus;
  for (int i = 0; i < 10; ++i)
    corpus.emplace_back("d" + std::to_string(i) + ".xml",
                        "<article><sec>xml" + std::string(static_cast<std::size_t>(i % 3), ' ') + " retrieval</sec></article>");
  const auto h = fixture::build(corpus);
  auto req = request("//article//sec[about(., xml)]");
  const auto all = search(h, req);
  CHECK(all.size() == 10);
  req.cutoff = 3;
  const auto top = search(h, req);
  REQUIRE(top.size() == 3);
  CHECK(std::equal(top.begin(), top.end(), all.begin()));
  // Ties break by document order.
  CHECK(top[0].doc_id == 0);
  CHECK(top[1].doc_id == 1);
}

TEST_CASE("search is deterministic") {
  const auto corpus = fixture::synthetic_corpus(71, 60);
  const auto& v = fixture::vocabulary();
  const std::string q = "//article[about(.//p, " + v[1] + ")]//sec[about(., " + v[2] + " " + v[3] + ")]";
  const auto a = search(fixture::build(corpus), request(q));
  const auto b = search(fixture::build(corpus), request(q));
  CHECK(a == b);
  CHECK(format_tsv(a) == format_tsv(b));
}

TEST_CASE("s-expressions and NEXI are both accepted") {
  CHECK(is_sexpr("  (OR a b)"));
  CHECK_FALSE(is_sexpr("//a[about(., x)]"));
  const auto q = compile_query(request(fixture::kTopic280, Strategy::kSS), IngestConfig::defaults());
  const auto h = fixture::build(fixture::topic280_corpus());
  CHECK(search(h, request(to_sexpr(q))) == search(h, request(fixture::kTopic280, Strategy::kSS)));
  CHECK_THROWS_AS(compile_query(request("(OR a"), IngestConfig::defaults()), ParseError);
  CHECK_THROWS_AS(compile_query(request("//a[about(., x) or about(., y)]"), IngestConfig::defaults()), ParseError);
}

TEST_CASE("propagation and highest ancestor on a small tree") {
  // a(0) -> b(1) -> c(2), a -> d(3)
  const auto s = DocStructure::from_parents({{"a", std::nullopt}, {"b", 0}, {"c", 1}, {"d", 0}});
  ResultSet r;
  r.put({0, 2, s.node(2).interval, kNoContext, 0.8});
  r.put({0, 3, s.node(3).interval, kNoContext, 0.3});
  const auto p = propagate_max(r, [&](DocId) -> const DocStructure& { return single(s); });
  CHECK(p.size() == 4);
  CHECK(p.find({0, 0})->value == 0.8);
  CHECK(p.find({0, 1})->value == 0.8);
  CHECK(p.find({0, 3})->value == 0.3);
  const auto top = highest_ancestor(p);
  CHECK(top.size() == 1);
  CHECK(top.contains({0, 0}));

  const auto leaves = highest_ancestor(r);
  CHECK(leaves == r);
}

TEST_CASE("propagation against the subtree-max reference") {
  std::mt19937_64 rng(73);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const auto tree = oracle::random_tree(rng, 1 + static_cast<int>(rng() % 60));
    std::vector<std::pair<std::string, std::optional<NodeId>>> spec;
    for (int p : tree.parent) spec.emplace_back("e", p < 0 ? std::nullopt : std::optional<NodeId>(static_cast<NodeId>(p)));
    const auto s = DocStructure::from_parents(spec);
    std::map<int, double> scored;
    ResultSet r;
    for (NodeId n = 0; n < s.size(); ++n)
      if (rng() % 4 == 0) {
        scored[static_cast<int>(n)] = u(rng);
        r.put({0, n, s.node(n).interval, kNoContext, scored[static_cast<int>(n)]});
      }
    const auto p = propagate_max(r, [&](DocId) -> const DocStructure& { return single(s); });
    const auto want = oracle::subtree_max(tree, scored);
    REQUIRE(p.size() == want.size());
    for (const auto& [n, v] : want) CHECK(p.find({0, static_cast<NodeId>(n)})->value == v);
    // highest_ancestor keeps exactly the scored elements without a scored ancestor.
    const auto top = highest_ancestor(r);
    for (const auto& [k, e] : r) {
      bool has_scored_ancestor = false;
      for (const auto& [n, v] : scored)
        if (oracle::is_ancestor_by_walk(tree, n, static_cast<int>(k.node_id))) has_scored_ancestor = true;
      CHECK(top.contains(k) == !has_scored_ancestor);
    }
  }
}

TEST_CASE("focused search returns non-overlapping elements") {
  const auto h = fixture::build(fixture::topic280_corpus());
  auto req = request(fixture::kTopic280);
  req.focused = true;
  const auto hits = search(h, req);
  REQUIRE_FALSE(hits.empty());
  for (const auto& a : hits)
    for (const auto& b : hits)
      if (&a != &b && a.doc_id == b.doc_id) {
        const auto& s = h.document(a.doc_id).structure;
        CHECK_FALSE(s.node(a.node_id).interval.covers(b.node_id));
      }
}

TEST_CASE("element resolution") {
  const auto h = fixture::build(fixture::topic280_corpus());
  CHECK(resolve_element(h, "complete.xml:/article[1]/bdy[1]/sec[2]") == ElementKey{0, 5});
  CHECK_THROWS_AS(resolve_element(h, "nope.xml:/article[1]"), NotFoundError);
  CHECK_THROWS_AS(resolve_element(h, "complete.xml:/article[1]/sec[9]"), NotFoundError);
  CHECK_THROWS_AS(resolve_element(h, "complete.xml"), NotFoundError);
}

TEST_CASE("explanation recomputes the score") {
  const auto h = fixture::build(fixture::topic280_corpus());
  const auto req = request(fixture::kTopic280);
  const auto hits = search(h, req);
  for (const auto& hit : hits) {
    const auto e = explain(h, req, {hit.doc_id, hit.node_id});
    REQUIRE(e.value);
    CHECK(*e.value == doctest::Approx(hit.score).epsilon(1e-12));
    CHECK(e.label.rfind("FILTER", 0) == 0);
    REQUIRE(e.numbers.count("target"));
    REQUIRE(e.numbers.count("support_max"));
    CHECK(*e.value == doctest::Approx((e.numbers.at("target") + e.numbers.at("support_max")) / 2));

    // The target is IN+: beta * sigma + (1 - beta) * content.
    const auto& target = e.children.at(1);
    REQUIRE(target.value);
    const double b = target.numbers.at("beta");
    CHECK(*target.value ==
          doctest::Approx(b * target.numbers.at("sigma") + (1 - b) * target.numbers.at("content_min")));
    const auto& same = target.children.at(0);
    CHECK(same.numbers.at("tau") * same.numbers.at("sum_lambda") == doctest::Approx(1.0));
    CHECK(same.numbers.at("lambda[0]") == doctest::Approx(1.0 - std::log(4.0 / 6.0)));
  }
}

TEST_CASE("explanation of a filtered-out target") {
  const auto h = fixture::build(fixture::topic280_corpus());
  const auto doc = *h.find_document("no_bb.xml");
  const auto sec = *h.document(doc).structure.resolve_path("/article[1]/bdy[1]/sec[1]");
  const auto e = explain(h, request(fixture::kTopic280), {doc, sec});
  CHECK_FALSE(e.value);
  CHECK(std::find(e.notes.begin(), e.notes.end(), "no support in document") != e.notes.end());
  CHECK_FALSE(format_explanation(e).empty());
  CHECK_THROWS_AS(explain(h, request(fixture::kTopic280), {doc, 0}), NotFoundError);
}

TEST_CASE("output formats") {
  const RankedList hits{{1, 0, 3, "a.xml", "/article[1]/sec[1]", 0.75}, {2, 1, 0, "b&c.xml", "/article[1]", 0.5}};
  CHECK(format_tsv(hits) == "1\ta.xml\t/article[1]/sec[1]\t0.750000\n2\tb&c.xml\t/article[1]\t0.500000\n");
  const auto inex = format_inex(hits, "280", "run1");
  CHECK(inex.find("<topic topic-id=\"280\">") != std::string::npos);
  CHECK(inex.find("<file>a</file><path>/article[1]/sec[1]</path><rank>1</rank>") != std::string::npos);
  CHECK(inex.find("b&amp;c") != std::string::npos);
  const auto table = format_table(hits);
  CHECK(table.find("a.xml") != std::string::npos);
  CHECK(table.find("0.750000") != std::string::npos);
  CHECK(format_tsv({}).empty());
}

TEST_CASE("ranking orders ties by document and node") {
  const auto h = fixture::build({{"a", "<x><y>w</y><y>w</y></x>"}, {"b", "<x>w</x>"}});
  ResultSet r;
  for (const auto& [k, e] : eval_term(h, "w")) r.put(e);
  const auto ranked = rank_results(h, r, 10);
  REQUIRE(ranked.size() == 3);
  CHECK(ranked[0].doc_id == 0);
  CHECK(ranked[0].node_id == 1);
  CHECK(ranked[1].node_id == 2);
  CHECK(ranked[2].doc_id == 1);
  CHECK(ranked[1].path == "/x[1]/y[2]");
  CHECK(rank_results(h, r, 0).empty());
}
