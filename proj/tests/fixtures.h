#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "oracles.h"
#include "xsearch/context_index.h"
#include "xsearch/xml_ingest.h"

namespace fixture {

inline const std::string kTopic280 =
    "//article[about(./bb, Baeza-Yates) and about(./sec, string matching)]"
    "//sec[about(., approximate algorithm)]";

using Corpus = std::vector<std::pair<std::string, std::string>>;  // locator, XML

// Topic 280 scenario: one complete document and four distractors, each
// missing one ingredient.
inline Corpus topic280_corpus() {
  return {
      {"complete.xml",
       "<article><fm><atl>text search</atl></fm><bdy>"
       "<sec>approximate algorithm for string matching</sec>"
       "<sec>an approximate method</sec></bdy>"
       "<bm><bib><bb>Baeza-Yates</bb></bib></bm></article>"},
      {"no_bb.xml",
       "<article><bdy><sec>string matching algorithm</sec></bdy>"
       "<bm><bib><bb>Knuth</bb></bib></bm></article>"},
      {"no_string.xml",
       "<article><bdy><sec>approximate algorithm</sec></bdy>"
       "<bm><bib><bb>Baeza-Yates</bb></bib></bm></article>"},
      {"no_target.xml",
       "<article><bdy><sec>string matching</sec></bdy>"
       "<bm><bib><bb>Baeza-Yates</bb></bib></bm></article>"},
      {"misplaced.xml",
       "<article><fm><abs>approximate algorithm</abs></fm>"
       "<bdy><sec>Baeza-Yates on string matching</sec></bdy></article>"},
  };
}

inline xsearch::IndexHandle build(const Corpus& corpus,
                                  const xsearch::IngestConfig& config = xsearch::IngestConfig::defaults()) {
  xsearch::IndexHandle handle(config);
  for (const auto& [locator, xml] : corpus) handle.index_document(xsearch::parse_document(xml, config, locator));
  return handle;
}

inline const std::vector<std::string>& vocabulary() {
  static const std::vector<std::string> words = [] {
    const std::vector<std::string> syllables{"ka", "lo", "mi", "ter", "san", "pol", "dre", "vu", "ni", "gor"};
    std::vector<std::string> out;
    for (const auto& a : syllables)
      for (const auto& b : syllables) out.push_back(a + b + "x");
    return out;
  }();
  return words;
}

// Random document of `nodes` elements with a few words per element.
inline std::string synthetic_document(std::mt19937_64& rng, int nodes) {
  static const std::vector<std::string> tags{"sec", "p", "ss1", "bb", "fm", "bdy", "bm", "au", "atl", "it"};
  const oracle::Tree t = oracle::random_tree(rng, nodes);
  std::vector<std::vector<int>> children(t.parent.size());
  for (std::size_t i = 1; i < t.parent.size(); ++i) children[static_cast<std::size_t>(t.parent[i])].push_back(static_cast<int>(i));
  std::vector<std::string> tag_of(t.parent.size());
  tag_of[0] = "article";
  for (std::size_t i = 1; i < tag_of.size(); ++i) tag_of[i] = tags[rng() % tags.size()];

  std::string out;
  const auto& vocab = vocabulary();
  const auto emit = [&](auto&& self, int n) -> void {
    out += "<" + tag_of[static_cast<std::size_t>(n)] + ">";
    const int words = static_cast<int>(rng() % 6);
    for (int w = 0; w < words; ++w) out += vocab[rng() % vocab.size()] + " ";
    for (int c : children[static_cast<std::size_t>(n)]) self(self, c);
    out += "</" + tag_of[static_cast<std::size_t>(n)] + ">";
  };
  emit(emit, 0);
  return out;
}

inline Corpus synthetic_corpus(std::uint64_t seed, int docs, int nodes_per_doc = 40) {
  std::mt19937_64 rng(seed);
  Corpus out;
  for (int d = 0; d < docs; ++d)
    out.emplace_back("doc" + std::to_string(d) + ".xml", synthetic_document(rng, 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(nodes_per_doc))));
  return out;
}

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = std::filesystem::temp_directory_path() /
            ("xsearch-test-" + std::to_string(stamp) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace fixture
