// xsearch: index XML collections and run structured queries against them.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "xsearch/config.h"
#include "xsearch/context_index.h"
#include "xsearch/error.h"
#include "xsearch/nexi.h"
#include "xsearch/path_similarity.h"
#include "xsearch/retrieval.h"
#include "xsearch/xml_ingest.h"

namespace fs = std::filesystem;
using namespace xsearch;

namespace {

constexpr int kExitData = 1;
constexpr int kExitUsage = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Clock = std::chrono::steady_clock;

double millis_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

bool verbose = false;

void log(const std::string& msg) { std::cerr << "xsearch: " << msg << '\n'; }
void debug(const std::string& msg) {
  if (verbose) log(msg);
}

struct Settings {
  std::string config_path;
  std::string index_dir;
};

ConfigFile load_config(const Settings& s) {
  if (s.config_path.empty()) return ConfigFile::parse("");
  return ConfigFile::load(s.config_path);
}

fs::path config_base(const Settings& s) {
  return s.config_path.empty() ? fs::path() : fs::path(s.config_path).parent_path();
}

std::string resolve_index_dir(const Settings& s, const ConfigFile& config) {
  if (!s.index_dir.empty()) return s.index_dir;
  if (auto v = config.get("", "index")) return *v;
  if (const char* env = std::getenv("XSEARCH_INDEX")) return env;
  throw UsageError("no index directory: pass --index or set XSEARCH_INDEX");
}

std::vector<fs::path> collect_inputs(const std::vector<std::string>& inputs) {
  std::vector<fs::path> files;
  for (const auto& in : inputs) {
    const fs::path p(in);
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& entry : fs::recursive_directory_iterator(p))
        if (entry.is_regular_file() && entry.path().extension() == ".xml") found.push_back(entry.path());
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else {
      files.push_back(p);
    }
  }
  return files;
}

std::string locator_for(const fs::path& file, const std::vector<std::string>& inputs) {
  for (const auto& in : inputs) {
    const fs::path root(in);
    if (fs::is_directory(root)) {
      const auto rel = fs::relative(file, root);
      if (!rel.empty() && *rel.begin() != "..") return rel.generic_string();
    }
  }
  return file.filename().generic_string();
}

struct IndexOptions {
  std::vector<std::string> inputs;
  bool force = false;
};

int cmd_index(const Settings& settings, const IndexOptions& opts) {
  const ConfigFile config = load_config(settings);
  const std::string dir = resolve_index_dir(settings, config);
  const IngestConfig ingest = IngestConfig::from_config(config, config_base(settings));

  if (fs::exists(dir) && !opts.force) throw IoError("index exists at " + dir + " (use --force to replace)");

  const auto files = collect_inputs(opts.inputs);
  if (files.empty()) throw IndexError("no documents");

  IndexHandle handle(ingest);
  double parse_ms = 0, index_ms = 0;
  std::size_t skipped = 0;
  for (const auto& file : files) {
    const std::string locator = locator_for(file, opts.inputs);
    try {
      auto t0 = Clock::now();
      const DocumentTree tree = load_document(file, ingest, locator);
      parse_ms += millis_since(t0);
      t0 = Clock::now();
      handle.index_document(tree);
      index_ms += millis_since(t0);
      debug("indexed " + locator);
    } catch (const Error& e) {
      log("skipping " + file.string() + ": " + e.what());
      ++skipped;
    }
  }
  if (handle.document_count() == 0) throw IndexError("no documents could be indexed");

  const auto t0 = Clock::now();
  handle.commit(dir, opts.force);
  const double commit_ms = millis_since(t0);

  std::printf("parse   %10.1f ms\n", parse_ms);
  std::printf("index   %10.1f ms\n", index_ms);
  std::printf("commit  %10.1f ms\n", commit_ms);
  std::printf("documents  %zu\n", handle.document_count());
  std::printf("skipped    %zu\n", skipped);
  std::printf("terms      %zu\n", handle.term_lists().size());
  std::printf("contexts   %zu\n", handle.dictionary().size());
  return 0;
}

int cmd_stats(const Settings& settings) {
  const ConfigFile config = load_config(settings);
  const IndexHandle handle = IndexHandle::open(resolve_index_dir(settings, config));
  std::set<std::string> tags;
  std::size_t max_len = 0, total_len = 0;
  for (std::size_t id = 0; id < handle.dictionary().size(); ++id) {
    const auto& path = handle.dictionary().path(static_cast<ContextId>(id));
    tags.insert(path.tags.begin(), path.tags.end());
    max_len = std::max(max_len, path.tags.size());
    total_len += path.tags.size();
  }
  const std::size_t contexts = handle.dictionary().size();
  std::printf("documents       %zu\n", handle.document_count());
  std::printf("terms           %zu\n", handle.term_lists().size());
  std::printf("contexts        %zu\n", contexts);
  std::printf("tag names       %zu\n", tags.size());
  std::printf("max context     %zu\n", max_len);
  std::printf("mean context    %.3f\n", contexts ? static_cast<double>(total_len) / static_cast<double>(contexts) : 0.0);
  return 0;
}

struct SearchOptions {
  std::string query;
  std::string strategy;
  std::string phrases;
  double beta = -1;
  std::size_t top = 0;
  bool focused = false;
  bool emit_query = false;
  std::string explain;
  std::string format = "table";
  std::string topic_id;
  bool timing = false;
};

std::string read_text(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot read " + file.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// A query argument naming an existing file is read from it; INEX topic files
// contribute their castitle and topic id.
void load_query(SearchOptions& opts) {
  const fs::path p(opts.query);
  std::error_code ec;
  if (opts.query.empty() || opts.query.front() == '(' || !fs::is_regular_file(p, ec)) return;
  if (p.extension() == ".xml") {
    const TopicFile topic = read_topic_file(p);
    opts.query = topic.castitle;
    if (opts.topic_id.empty()) opts.topic_id = topic.id;
  } else {
    opts.query = read_text(p);
  }
}

int cmd_search(const Settings& settings, SearchOptions opts) {
  const ConfigFile config = load_config(settings);

  SearchRequest request;
  const std::string strategy = !opts.strategy.empty() ? opts.strategy : config.get("", "strategy").value_or("vv");
  const auto s = parse_strategy(strategy);
  if (!s) throw UsageError("unknown strategy '" + strategy + "'");
  request.strategy.strategy = *s;
  const std::string phrases = !opts.phrases.empty() ? opts.phrases : config.get("", "phrases").value_or("sameplus");
  const auto mode = parse_content_mode(phrases);
  if (!mode) throw UsageError("unknown phrase mode '" + phrases + "'");
  request.strategy.mode = *mode;
  request.strategy.beta = opts.beta >= 0 ? opts.beta : config.get_double("", "beta").value_or(kDefaultBeta);
  if (!(request.strategy.beta >= 0.0 && request.strategy.beta <= 1.0)) throw ConfigError("beta must lie in [0, 1]");
  if (opts.top > 0) {
    request.cutoff = opts.top;
  } else if (auto c = config.get_double("", "cutoff")) {
    if (*c < 1) throw ConfigError("cutoff must be at least 1");
    request.cutoff = static_cast<std::size_t>(*c);
  }
  request.focused = opts.focused;
  const CostMatrix costs = CostMatrix::from_config(config);

  load_query(opts);
  request.query = opts.query;

  if (opts.emit_query) {
    IngestConfig ingest = IngestConfig::from_config(config, config_base(settings));
    std::string dir = settings.index_dir;
    if (dir.empty()) dir = config.get("", "index").value_or(std::getenv("XSEARCH_INDEX") ? std::getenv("XSEARCH_INDEX") : "");
    if (!dir.empty() && fs::exists(fs::path(dir) / "VERSION")) ingest = IndexHandle::open(dir).ingest_config();
    std::cout << to_sexpr(compile_query(request, ingest)) << '\n';
    return 0;
  }

  auto t0 = Clock::now();
  const IndexHandle handle = IndexHandle::open(resolve_index_dir(settings, config));
  const double open_ms = millis_since(t0);

  if (!opts.explain.empty()) {
    const ElementKey key = resolve_element(handle, opts.explain);
    std::cout << format_explanation(explain(handle, request, key, costs));
    return 0;
  }

  t0 = Clock::now();
  const RankedList hits = search(handle, request, costs);
  const double search_ms = millis_since(t0);

  if (opts.format == "tsv") {
    std::cout << format_tsv(hits);
  } else if (opts.format == "inex") {
    const std::string run = "xsearch-" + std::string(strategy_name(request.strategy.strategy)) + "-" +
                            std::string(content_mode_name(request.strategy.mode));
    std::cout << format_inex(hits, opts.topic_id, run);
  } else {
    std::cout << format_table(hits);
  }
  if (opts.timing) std::fprintf(stderr, "timing: open %.1f ms, search %.1f ms\n", open_ms, search_ms);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structured retrieval over XML collections"};
  app.require_subcommand(1);
  Settings settings;
  app.add_option("-c,--config", settings.config_path, "Configuration file")->check(CLI::ExistingFile);
  app.add_option("-i,--index", settings.index_dir, "Index directory (default: $XSEARCH_INDEX)");
  app.add_flag("-v,--verbose", verbose, "Log progress to stderr");

  IndexOptions index_opts;
  auto* index_cmd = app.add_subcommand("index", "Build an index from XML files or directories");
  index_cmd->add_option("inputs", index_opts.inputs, "Files or directories")->required();
  index_cmd->add_flag("-f,--force", index_opts.force, "Replace an existing index");

  app.add_subcommand("stats", "Report corpus statistics of an index");

  SearchOptions search_opts;
  const auto add_search_flags = [&](CLI::App* cmd) {
    cmd->add_option("query", search_opts.query, "NEXI topic, s-expression, or a file holding one")->required();
    cmd->add_option("-s,--strategy", search_opts.strategy, "co|vv|vs|sv|ss")
        ->check(CLI::IsMember({"co", "vv", "vs", "sv", "ss"}, CLI::ignore_case));
    cmd->add_option("-p,--phrases", search_opts.phrases, "sameplus|seq")
        ->check(CLI::IsMember({"sameplus", "seq"}, CLI::ignore_case));
    cmd->add_option("-b,--beta", search_opts.beta, "Weight of structure in IN+")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("-n,--top", search_opts.top, "Number of results")->check(CLI::PositiveNumber);
    cmd->add_flag("--focused", search_opts.focused, "Return non-overlapping topmost elements");
    cmd->add_option("--format", search_opts.format, "table|tsv|inex")->check(CLI::IsMember({"table", "tsv", "inex"}));
    cmd->add_option("--topic-id", search_opts.topic_id, "Topic id for INEX output");
    cmd->add_flag("--timing", search_opts.timing, "Print timings to stderr");
  };
  auto* search_cmd = app.add_subcommand("search", "Run a query");
  add_search_flags(search_cmd);
  auto* emit = search_cmd->add_flag("--emit-query", search_opts.emit_query, "Print the operator tree and exit");
  auto* expl = search_cmd->add_option("--explain", search_opts.explain, "Explain the score of LOCATOR:/path");
  emit->excludes(expl);

  auto* explain_cmd = app.add_subcommand("explain", "Explain the score of one element (search --explain)");
  add_search_flags(explain_cmd);
  explain_cmd->add_option("element", search_opts.explain, "LOCATOR:/tag[n]/...")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*index_cmd) return cmd_index(settings, index_opts);
    if (app.got_subcommand("stats")) return cmd_stats(settings);
    return cmd_search(settings, search_opts);
  } catch (const UsageError& e) {
    log(e.what());
    return kExitUsage;
  } catch (const Error& e) {
    log(e.what());
    return kExitData;
  } catch (const std::exception& e) {
    log(e.what());
    return kExitData;
  }
}
