#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "xsearch/path_similarity.h"
#include "xsearch/query_tree.h"
#include "xsearch/xml_ingest.h"

namespace xsearch {

// Target/support interpretation. The first letter is the target, the second
// the support: V = vague (IN+), S = strict (IN). CO drops structure.
enum class Strategy { kCO, kVV, kVS, kSV, kSS };
// How multi-word phrases in about() are matched.
enum class ContentMode { kSamePlus, kSeq };

std::optional<Strategy> parse_strategy(std::string_view name);
std::string_view strategy_name(Strategy strategy);
std::optional<ContentMode> parse_content_mode(std::string_view name);
std::string_view content_mode_name(ContentMode mode);

struct StrategyOptions {
  Strategy strategy = Strategy::kVV;
  ContentMode mode = ContentMode::kSamePlus;
  double beta = kDefaultBeta;
};

enum class TopicForm { kSimple, kComplex };

struct AboutClause {
  QueryPath path;    // absolute, with the enclosing step's path prepended
  std::string text;  // whitespace-collapsed about() text

  friend bool operator==(const AboutClause&, const AboutClause&) = default;
};

// //A[B] or //A[B]//C[D] with conjunctive about() clauses.
struct CasTopic {
  TopicForm form = TopicForm::kSimple;
  QueryPath anchor_path;  // A
  QueryPath target_path;  // A, or A followed by C
  std::string target_about;
  std::vector<AboutClause> supports;

  friend bool operator==(const CasTopic&, const CasTopic&) = default;
};

// Throws ParseError naming the offending construct for anything outside the
// supported subset (or, not, attributes, comparisons, wildcard steps, ...).
CasTopic parse_nexi(std::string_view text);
std::string to_nexi(const CasTopic& topic);

struct TopicFile {
  std::string id;
  std::string castitle;
};
// Extracts the castitle and the topic_id attribute from an INEX topic file.
TopicFile read_topic_file(const std::filesystem::path& path);

// One about() item: a word, a hyphenated compound or a quoted phrase.
struct AboutItem {
  std::vector<std::string> words;
  bool phrase = false;    // quoted or hyphenated
  bool negated = false;   // leading '-'

  friend bool operator==(const AboutItem&, const AboutItem&) = default;
};
std::vector<AboutItem> split_about(std::string_view text);

// Stems a phrase with the indexing pipeline; hyphenated names split.
std::vector<std::string> phrase_to_terms(std::string_view phrase,
                                         const IngestConfig& config = IngestConfig::defaults());

// Builds the operator tree: each about() becomes SAME+ (wrapped in IN or IN+
// unless the strategy is CO); supports are joined under AND and filter the
// target. Words the ingest pipeline would drop are left out. Throws
// QueryError when the target has no indexable word.
QueryNode translate(const CasTopic& topic, const StrategyOptions& options,
                    const IngestConfig& config = IngestConfig::defaults());

}  // namespace xsearch
