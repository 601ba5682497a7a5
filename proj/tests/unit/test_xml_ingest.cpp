#include <doctest.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "fixtures.h"
#include "oracles.h"
#include "xsearch/error.h"
#include "xsearch/porter_stemmer.h"
#include "xsearch/xml_ingest.h"

using namespace xsearch;

namespace {

const IngestConfig& defaults() { return IngestConfig::defaults(); }

std::vector<std::string> stems_of(const DocumentTree& tree) {
  std::vector<std::pair<std::uint32_t, std::string>> all;
  for (const auto& n : tree.nodes)
    for (const auto& t : n.tokens) all.emplace_back(t.position, t.stem);
  std::sort(all.begin(), all.end());
  std::vector<std::string> out;
  for (auto& [p, s] : all) out.push_back(s);
  return out;
}

}  // namespace

TEST_CASE("preorder ids and intervals") {
  const auto tree = parse_document("<a><b>x</b><c/></a>", defaults());
  REQUIRE(tree.nodes.size() == 3);
  CHECK(tree.node(0).tag == "a");
  CHECK(tree.node(0).interval == NodeInterval{0, 2});
  CHECK(tree.node(1).interval == NodeInterval{1, 1});
  CHECK(tree.node(2).interval == NodeInterval{2, 2});
  CHECK(tree.node(2).tokens.empty());
  CHECK(tree.node(0).children == std::vector<NodeId>{1, 2});
}

TEST_CASE("single empty element") {
  const auto tree = parse_document("<a/>", defaults());
  REQUIRE(tree.nodes.size() == 1);
  CHECK(tree.root().interval == NodeInterval{0, 0});
  CHECK(tree.token_count() == 0);
}

TEST_CASE("three-level tree of seven nodes") {
  const auto tree = parse_document("<r><a><x/><y/></a><b><z/><w/></b></r>", defaults());
  REQUIRE(tree.nodes.size() == 7);
  CHECK(tree.root().interval == NodeInterval{0, 6});
  for (const auto& n : tree.nodes) {
    if (n.children.empty()) CHECK(n.interval.low == n.interval.high);
    // Brute-force descendant set through parent links.
    std::set<NodeId> below;
    for (const auto& m : tree.nodes)
      for (auto p = m.parent; p; p = tree.node(*p).parent)
        if (*p == n.node_id) below.insert(m.node_id);
    for (const auto& m : tree.nodes) CHECK(n.interval.contains(m.node_id) == (below.count(m.node_id) == 1));
  }
}

TEST_CASE("random trees: interval containment equals ancestry") {
  std::mt19937_64 rng(42);
  for (int t = 0; t < 50; ++t) {
    const int nodes = 1 + static_cast<int>(rng() % 300);
    const std::string xml = fixture::synthetic_document(rng, nodes);
    const auto tree = parse_document(xml, defaults());
    for (const auto& a : tree.nodes)
      for (int k = 0; k < 20; ++k) {
        const auto d = static_cast<NodeId>(rng() % tree.nodes.size());
        bool walk = false;
        for (auto p = tree.node(d).parent; p; p = tree.node(*p).parent) walk |= *p == a.node_id;
        CHECK(a.interval.contains(d) == walk);
      }
  }
}

TEST_CASE("tokenize pipeline") {
  CHECK(tokenize("approximate string matching", defaults()) == std::vector<std::string>{"approxim", "string", "match"});
  CHECK(tokenize("the of and", defaults()).empty());
  CHECK(tokenize("42 1995", defaults()).empty());
  CHECK(tokenize("", defaults()).empty());
  CHECK(tokenize("Baeza-Yates", defaults()) == std::vector<std::string>{"baeza", "yate"});
  IngestConfig numbers = defaults();
  numbers.index_numbers = true;
  CHECK(tokenize("42 1995", numbers) == std::vector<std::string>{"42", "1995"});
  // Mixed letters and digits are words, not numbers.
  CHECK(tokenize("mp3 x86", defaults()) == std::vector<std::string>{"mp3", "x86"});
}

TEST_CASE("tokens are lowercase, non-numeric and never stopwords") {
  std::mt19937_64 rng(7);
  const std::string alphabet = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 -.,";
  for (int i = 0; i < 200; ++i) {
    std::string text;
    for (int k = 0; k < 80; ++k) text += alphabet[rng() % alphabet.size()];
    for (const auto& w : {"the", "The", "AND"}) text += std::string(" ") + w;
    for (const auto& t : tokenize(text, defaults())) {
      CHECK_FALSE(t.empty());
      CHECK_FALSE(std::all_of(t.begin(), t.end(), [](unsigned char c) { return std::isdigit(c); }));
      CHECK(std::none_of(t.begin(), t.end(), [](unsigned char c) { return std::isupper(c); }));
      CHECK_FALSE(defaults().is_stopword(t));
    }
  }
}

TEST_CASE("positions are dense per document and follow document order") {
  const auto tree = parse_document(
      "<article><p>The first words</p><sec>of <it>mixed</it> content here</sec><p>42 last</p></article>", defaults());
  CHECK(stems_of(tree) == std::vector<std::string>{"first", "word", "mix", "content", "last"});
  std::vector<std::uint32_t> positions;
  for (const auto& n : tree.nodes)
    for (const auto& t : n.tokens) positions.push_back(t.position);
  std::sort(positions.begin(), positions.end());
  for (std::size_t i = 0; i < positions.size(); ++i) CHECK(positions[i] == i);
  // Text directly under sec belongs to sec, text of it to it.
  CHECK(tree.node(2).tag == "sec");
  CHECK(tree.node(2).tokens.size() == 1);
  CHECK(tree.node(2).tokens[0].stem == "content");
  CHECK(tree.node(3).tokens[0].stem == "mix");
}

TEST_CASE("attributes, comments and processing instructions are ignored; entities and CDATA are text") {
  const auto tree = parse_document(
      "<?xml version=\"1.0\"?><a id=\"zebra\"><!-- hidden giraffe --><?pi ostrich?>"
      "fish &amp; chips <![CDATA[<raw> turtle]]></a>",
      defaults());
  CHECK(stems_of(tree) == std::vector<std::string>{"fish", "chip", "raw", "turtl"});
}

TEST_CASE("malformed and empty input") {
  CHECK_THROWS_AS(parse_document("", defaults()), ParseError);
  CHECK_THROWS_AS(parse_document("   \n", defaults()), ParseError);
  try {
    parse_document("<a><b></a>", defaults());
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.offset() != ParseError::kNoOffset);
    CHECK(std::string(e.what()).find("byte") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_document("<a></a><b/>", defaults()), ParseError);
}

TEST_CASE("parsing is deterministic") {
  std::mt19937_64 rng(11);
  const std::string xml = fixture::synthetic_document(rng, 80);
  const auto a = parse_document(xml, defaults(), "x");
  const auto b = parse_document(xml, defaults(), "x");
  REQUIRE(a.nodes.size() == b.nodes.size());
  for (std::size_t i = 0; i < a.nodes.size(); ++i) {
    CHECK(a.nodes[i].tag == b.nodes[i].tag);
    CHECK(a.nodes[i].interval == b.nodes[i].interval);
    CHECK(a.nodes[i].tokens == b.nodes[i].tokens);
    CHECK(context_of(a.nodes[i], a) == context_of(b.nodes[i], b));
  }
}

TEST_CASE("context paths and tag classes") {
  const std::string xml = "<article><bm><bib><bibl><bb><au><snm>x</snm></au></bb></bibl></bib></bm></article>";
  const auto tree = parse_document(xml, defaults());
  CHECK(context_of(tree.node(4), tree).tags == std::vector<std::string>{"article", "bm", "bib", "bibl", "bb"});
  CHECK(context_of(tree.root(), tree).tags == std::vector<std::string>{"article"});
  CHECK(context_of(tree.node(4), tree).to_string() == "/article/bm/bib/bibl/bb");

  IngestConfig mapped = defaults();
  mapped.tag_classes = {{"p1", "para"}, {"ip1", "para"}};
  const auto m = parse_document("<article><sec><p1>x</p1><ip1>y</ip1></sec></article>", mapped);
  CHECK(context_of(m.node(2), m).to_string() == "/article/sec/para");
  CHECK(context_of(m.node(3), m).to_string() == "/article/sec/para");
}

TEST_CASE("context path text form") {
  CHECK(ContextPath::from_string("/a/b/c").tags == std::vector<std::string>{"a", "b", "c"});
  CHECK(ContextPath::from_string("//a//b").tags == std::vector<std::string>{"a", "b"});
  CHECK(ContextPath::from_string("").tags.empty());
}

TEST_CASE("built-in stopword list equals the shipped data file") {
  std::ifstream in(std::string(XSEARCH_SOURCE_DIR) + "/data/stopwords_en.txt");
  REQUIRE(in);
  std::vector<std::string> file;
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) file.push_back(line);
  CHECK(default_stopwords() == file);
  CHECK(file.size() == 300);
  CHECK_FALSE(defaults().is_stopword("system"));
  CHECK(defaults().is_stopword("the"));
}

TEST_CASE("stopwords are removed before and after stemming") {
  // "is" stems to "i", which is itself a stopword.
  CHECK_FALSE(normalize_word("is", defaults()));
  CHECK_FALSE(normalize_word("The", defaults()));
  CHECK(normalize_word("Matching", defaults()) == "match");
}

TEST_CASE("load_document reads files and reports missing ones") {
  fixture::TempDir tmp;
  std::ofstream(tmp.path() / "d.xml") << "<a>hello world</a>";
  const auto tree = load_document(tmp.path() / "d.xml", defaults(), "d.xml");
  CHECK(tree.locator == "d.xml");
  CHECK(tree.token_count() == 2);
  CHECK_THROWS_AS(load_document(tmp.path() / "missing.xml", defaults(), "m"), Error);
}
