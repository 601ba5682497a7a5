#include "xsearch/context_index.h"

#include <unistd.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <system_error>

#include "xsearch/error.h"

namespace xsearch {

namespace fs = std::filesystem;

namespace {

constexpr char kTermsMagic[4] = {'X', 'S', 'T', 'K'};
constexpr char kNodesMagic[4] = {'X', 'S', 'N', 'D'};
constexpr char kEndMagic[4] = {'X', 'E', 'N', 'D'};

std::string version_line() {
  return "xsearch-index " + std::to_string(kIndexFormatVersion);
}

// Little-endian fixed-width encoder.
class BinaryWriter {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void bytes(std::string_view s) { buf_.append(s); }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s);
  }
  const std::string& data() const { return buf_; }

 private:
  std::string buf_;
};

class BinaryReader {
 public:
  BinaryReader(std::string data, std::string name)
      : data_(std::move(data)), name_(std::move(name)) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return v;
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::string str() { return bytes(u32()); }
  void expect_magic(const char (&magic)[4]) {
    if (bytes(4) != std::string_view(magic, 4))
      throw IndexError(name_ + ": bad magic bytes");
  }
  bool at_end() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) throw IndexError(name_ + ": truncated file");
  }

  std::string data_;
  std::string name_;
  std::size_t pos_ = 0;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError("read failure on " + path.string());
  return buffer.str();
}

void write_file(const fs::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  out.flush();
  if (!out) throw IoError("write failure on " + path.string());
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return fields;
}

std::uint64_t parse_uint(const std::string& text, const std::string& where) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw IndexError(where + ": expected an integer, got '" + text + "'");
  }
}

std::string serialize_ingest_config(const IngestConfig& config) {
  std::ostringstream out;
  out << "index_numbers=" << (config.index_numbers ? "true" : "false") << "\n";
  out << "[tags]\n";
  for (const auto& [tag, cls] : config.tag_classes) out << tag << "=" << cls << "\n";
  return out.str();
}

}  // namespace

// ContextDictionary ----------------------------------------------------------

ContextId ContextDictionary::intern(const ContextPath& path) {
  const auto [it, inserted] =
      ids_.try_emplace(path, static_cast<ContextId>(paths_.size()));
  if (inserted) paths_.push_back(path);
  return it->second;
}

std::optional<ContextId> ContextDictionary::find(const ContextPath& path) const {
  const auto it = ids_.find(path);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

std::uint32_t CorpusStats::doc_freq_of(std::string_view term) const {
  const auto it = doc_freq.find(term);
  return it == doc_freq.end() ? 0 : it->second;
}

// DocStructure ---------------------------------------------------------------

DocStructure DocStructure::from_tree(const DocumentTree& tree) {
  std::vector<std::pair<std::string, std::optional<NodeId>>> nodes;
  nodes.reserve(tree.nodes.size());
  for (const auto& n : tree.nodes) nodes.emplace_back(n.tag, n.parent);
  return from_parents(std::move(nodes));
}

DocStructure DocStructure::from_parents(
    std::vector<std::pair<std::string, std::optional<NodeId>>> nodes) {
  DocStructure s;
  s.nodes_.resize(nodes.size());
  // Per parent: how many children of each tag seen so far.
  std::vector<std::map<std::string, std::uint32_t, std::less<>>> seen(nodes.size());
  std::map<std::string, std::uint32_t, std::less<>> root_seen;
  // Open root-to-node chain; in preorder every parent is on it.
  std::vector<NodeId> open;
  for (NodeId id = 0; id < nodes.size(); ++id) {
    auto& [tag, parent] = nodes[id];
    if ((id == 0) != !parent.has_value()) throw IndexError("node table is not in preorder");
    if (parent) {
      while (!open.empty() && open.back() != *parent) open.pop_back();
      if (open.empty()) throw IndexError("node table is not in preorder");
    }
    open.push_back(id);
    auto& node = s.nodes_[id];
    node.tag = std::move(tag);
    node.parent = parent;
    node.interval = {id, id};
    auto& counter = parent ? seen[*parent] : root_seen;
    node.ordinal = ++counter[node.tag];
  }
  for (NodeId id = static_cast<NodeId>(nodes.size()); id-- > 1;) {
    auto& parent = s.nodes_[*s.nodes_[id].parent];
    parent.interval.high = std::max(parent.interval.high, s.nodes_[id].interval.high);
  }
  return s;
}

ContextPath DocStructure::context(NodeId id) const {
  ContextPath path;
  std::optional<NodeId> current = id;
  while (current) {
    path.tags.push_back(nodes_.at(*current).tag);
    current = nodes_[*current].parent;
  }
  std::reverse(path.tags.begin(), path.tags.end());
  return path;
}

std::string DocStructure::element_path(NodeId id) const {
  std::vector<NodeId> chain;
  std::optional<NodeId> current = id;
  while (current) {
    chain.push_back(*current);
    current = nodes_.at(*current).parent;
  }
  std::string out;
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    const auto& node = nodes_[*it];
    out += '/' + node.tag + '[' + std::to_string(node.ordinal) + ']';
  }
  return out;
}

std::optional<NodeId> DocStructure::resolve_path(std::string_view element_path) const {
  if (nodes_.empty()) return std::nullopt;
  std::optional<NodeId> current;
  std::size_t pos = 0;
  while (pos < element_path.size()) {
    if (element_path[pos] != '/') return std::nullopt;
    const auto end = element_path.find('/', pos + 1);
    std::string_view step = element_path.substr(pos + 1, end == std::string_view::npos ? std::string_view::npos : end - pos - 1);
    pos = end == std::string_view::npos ? element_path.size() : end;
    std::string_view tag = step;
    std::uint32_t ordinal = 1;
    if (const auto bracket = step.find('['); bracket != std::string_view::npos) {
      if (step.back() != ']') return std::nullopt;
      tag = step.substr(0, bracket);
      const auto digits = step.substr(bracket + 1, step.size() - bracket - 2);
      try {
        ordinal = static_cast<std::uint32_t>(std::stoul(std::string(digits)));
      } catch (const std::exception&) {
        return std::nullopt;
      }
    }
    std::optional<NodeId> next;
    if (!current) {
      if (nodes_[0].tag == tag && ordinal == 1) next = 0;
    } else {
      const auto& parent = nodes_[*current];
      for (NodeId child = *current + 1; child <= parent.interval.high;
           child = nodes_[child].interval.high + 1) {
        if (nodes_[child].tag == tag && nodes_[child].ordinal == ordinal) {
          next = child;
          break;
        }
      }
    }
    if (!next) return std::nullopt;
    current = next;
  }
  return current;
}

// IndexHandle ----------------------------------------------------------------

DocId IndexHandle::index_document(const DocumentTree& tree) {
  if (tree.nodes.empty()) throw IndexError("document has no elements");
  if (locators_.count(tree.locator))
    throw IndexError("document already indexed: " + tree.locator);
  const auto doc_id = static_cast<DocId>(documents_.size());

  std::map<std::string_view, std::vector<PostingEntry>> local;
  std::uint32_t tokens = 0;
  for (const auto& node : tree.nodes) {
    if (node.tokens.empty()) continue;
    const ContextId ctx = dictionary_.intern(context_of(node, tree));
    for (const auto& token : node.tokens) {
      local[token.stem].push_back({doc_id, ctx, token.position, node.interval});
      ++tokens;
    }
  }
  // Tokens arrive node by node; postings must be in position order.
  for (auto& [stem, postings] : local) {
    std::sort(postings.begin(), postings.end(),
              [](const PostingEntry& a, const PostingEntry& b) { return a.position < b.position; });
    auto& list = terms_[std::string(stem)];
    list.insert(list.end(), postings.begin(), postings.end());
    ++stats_.doc_freq[std::string(stem)];
  }
  ++stats_.total_docs;
  documents_.push_back({tree.locator, tokens, DocStructure::from_tree(tree)});
  locators_.emplace(tree.locator, doc_id);
  return doc_id;
}

std::span<const PostingEntry> IndexHandle::lookup(std::string_view stem) const {
  const auto it = terms_.find(stem);
  if (it == terms_.end()) return {};
  return it->second;
}

std::vector<ContextId> IndexHandle::contexts_matching(
    const std::function<bool(const ContextPath&)>& predicate) const {
  std::vector<ContextId> ids;
  for (ContextId id = 0; id < dictionary_.size(); ++id)
    if (predicate(dictionary_.path(id))) ids.push_back(id);
  return ids;
}

std::optional<DocId> IndexHandle::find_document(std::string_view locator) const {
  const auto it = locators_.find(std::string(locator));
  if (it == locators_.end()) return std::nullopt;
  return it->second;
}

CorpusStats IndexHandle::recompute_stats() const {
  CorpusStats stats;
  stats.total_docs = documents_.size();
  for (const auto& [term, postings] : terms_) {
    std::set<DocId> docs;
    for (const auto& p : postings) docs.insert(p.doc_id);
    stats.doc_freq[term] = static_cast<std::uint32_t>(docs.size());
  }
  return stats;
}

void IndexHandle::commit(const fs::path& dir, bool overwrite) const {
  if (documents_.empty()) throw IndexError("cannot commit an empty index");
  std::error_code ec;
  if (fs::exists(dir, ec) && !overwrite)
    throw IoError("index directory already exists: " + dir.string());

  const fs::path target = fs::absolute(dir);
  const fs::path staging =
      target.parent_path() / ("." + target.filename().string() + ".tmp." + std::to_string(::getpid()));
  fs::remove_all(staging, ec);
  if (!fs::create_directories(staging, ec) || ec)
    throw IoError("cannot create " + staging.string() + ": " + ec.message());

  try {
    write_file(staging / "VERSION", version_line() + "\n");

    {
      BinaryWriter w;
      w.bytes(std::string_view(kTermsMagic, 4));
      w.u32(kIndexFormatVersion);
      w.u64(terms_.size());
      for (const auto& [term, postings] : terms_) {
        w.str(term);
        w.u64(postings.size());
        for (const auto& p : postings) {
          w.u32(p.doc_id);
          w.u32(p.context_id);
          w.u32(p.position);
          w.u32(p.interval.low);
          w.u32(p.interval.high);
        }
      }
      w.bytes(std::string_view(kEndMagic, 4));
      write_file(staging / "terms.kv", w.data());
    }

    {
      std::map<std::string, std::uint32_t, std::less<>> tag_ids;
      std::vector<std::string_view> tags;
      for (const auto& doc : documents_)
        for (const auto& node : doc.structure.nodes())
          if (tag_ids.try_emplace(node.tag, static_cast<std::uint32_t>(tags.size())).second)
            tags.push_back(node.tag);
      BinaryWriter w;
      w.bytes(std::string_view(kNodesMagic, 4));
      w.u32(kIndexFormatVersion);
      w.u32(static_cast<std::uint32_t>(tags.size()));
      for (auto tag : tags) w.str(tag);
      w.u32(static_cast<std::uint32_t>(documents_.size()));
      for (const auto& doc : documents_) {
        w.u32(static_cast<std::uint32_t>(doc.structure.size()));
        for (const auto& node : doc.structure.nodes()) {
          w.u32(node.parent ? *node.parent : 0xffffffffu);
          w.u32(tag_ids.find(node.tag)->second);
        }
      }
      w.bytes(std::string_view(kEndMagic, 4));
      write_file(staging / "nodes.kv", w.data());
    }

    {
      std::ostringstream out;
      for (ContextId id = 0; id < dictionary_.size(); ++id)
        out << id << '\t' << dictionary_.path(id).to_string() << '\n';
      write_file(staging / "contexts.tsv", out.str());
    }
    {
      std::ostringstream out;
      out << "total_docs\t" << stats_.total_docs << '\n';
      for (const auto& [term, df] : stats_.doc_freq) out << term << '\t' << df << '\n';
      write_file(staging / "stats.tsv", out.str());
    }
    {
      std::ostringstream out;
      for (DocId id = 0; id < documents_.size(); ++id)
        out << id << '\t' << documents_[id].token_count << '\t' << documents_[id].locator << '\n';
      write_file(staging / "docs.tsv", out.str());
    }
    write_file(staging / "ingest.conf", serialize_ingest_config(config_));
    {
      std::string words;
      for (const auto& w : config_.stopwords) words += w + '\n';
      write_file(staging / "stopwords.txt", words);
    }
  } catch (...) {
    fs::remove_all(staging, ec);
    throw;
  }

  // Swap the staged directory into place.
  fs::path previous;
  if (fs::exists(target, ec)) {
    previous = target.parent_path() / ("." + target.filename().string() + ".old." + std::to_string(::getpid()));
    fs::remove_all(previous, ec);
    fs::rename(target, previous, ec);
    if (ec) {
      fs::remove_all(staging, ec);
      throw IoError("cannot replace existing index " + target.string());
    }
  }
  fs::rename(staging, target, ec);
  if (ec) {
    const auto message = ec.message();
    if (!previous.empty()) fs::rename(previous, target, ec);
    fs::remove_all(staging, ec);
    throw IoError("cannot move index into place: " + message);
  }
  if (!previous.empty()) fs::remove_all(previous, ec);
}

IndexHandle IndexHandle::open(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("no index at " + dir.string());
  if (!fs::exists(dir / "VERSION")) throw IoError("not an index directory (no VERSION): " + dir.string());
  {
    std::string version = read_file(dir / "VERSION");
    while (!version.empty() && (version.back() == '\n' || version.back() == '\r')) version.pop_back();
    if (version != version_line())
      throw VersionError("unsupported index version '" + version + "', expected '" + version_line() + "'");
  }

  IngestConfig config = IngestConfig::defaults();
  {
    const auto conf = ConfigFile::parse(read_file(dir / "ingest.conf"));
    config.index_numbers = conf.get_bool("", "index_numbers").value_or(false);
    for (const auto& [tag, cls] : conf.entries("tags")) config.tag_classes[tag] = cls;
    config.stopwords = load_stopword_file(dir / "stopwords.txt");
  }
  IndexHandle handle(std::move(config));

  {
    std::istringstream in(read_file(dir / "contexts.tsv"));
    std::string line;
    while (std::getline(in, line)) {
      const auto fields = split_tabs(line);
      if (fields.size() != 2) throw IndexError("contexts.tsv: malformed line");
      const auto id = parse_uint(fields[0], "contexts.tsv");
      if (handle.dictionary_.intern(ContextPath::from_string(fields[1])) != id)
        throw IndexError("contexts.tsv: ids are not dense");
    }
  }

  std::vector<std::pair<std::string, std::uint32_t>> docs;
  {
    std::istringstream in(read_file(dir / "docs.tsv"));
    std::string line;
    while (std::getline(in, line)) {
      auto fields = split_tabs(line);
      if (fields.size() != 3) throw IndexError("docs.tsv: malformed line");
      if (parse_uint(fields[0], "docs.tsv") != docs.size())
        throw IndexError("docs.tsv: ids are not dense");
      docs.emplace_back(std::move(fields[2]),
                        static_cast<std::uint32_t>(parse_uint(fields[1], "docs.tsv")));
    }
  }

  {
    BinaryReader r(read_file(dir / "nodes.kv"), "nodes.kv");
    r.expect_magic(kNodesMagic);
    if (r.u32() != static_cast<std::uint32_t>(kIndexFormatVersion))
      throw VersionError("nodes.kv: unsupported version");
    std::vector<std::string> tags(r.u32());
    for (auto& tag : tags) tag = r.str();
    if (r.u32() != docs.size()) throw IndexError("nodes.kv: document count mismatch");
    for (auto& [locator, token_count] : docs) {
      std::vector<std::pair<std::string, std::optional<NodeId>>> nodes(r.u32());
      for (auto& [tag, parent] : nodes) {
        const auto p = r.u32();
        if (p != 0xffffffffu) parent = p;
        const auto tag_id = r.u32();
        if (tag_id >= tags.size()) throw IndexError("nodes.kv: bad tag id");
        tag = tags[tag_id];
      }
      const auto id = static_cast<DocId>(handle.documents_.size());
      handle.documents_.push_back({locator, token_count, DocStructure::from_parents(std::move(nodes))});
      handle.locators_.emplace(locator, id);
    }
    r.expect_magic(kEndMagic);
  }

  {
    BinaryReader r(read_file(dir / "terms.kv"), "terms.kv");
    r.expect_magic(kTermsMagic);
    if (r.u32() != static_cast<std::uint32_t>(kIndexFormatVersion))
      throw VersionError("terms.kv: unsupported version");
    const auto count = r.u64();
    for (std::uint64_t t = 0; t < count; ++t) {
      std::string term = r.str();
      std::vector<PostingEntry> postings(r.u64());
      for (auto& p : postings) {
        p.doc_id = r.u32();
        p.context_id = r.u32();
        p.position = r.u32();
        p.interval.low = r.u32();
        p.interval.high = r.u32();
        if (p.doc_id >= handle.documents_.size() || p.context_id >= handle.dictionary_.size())
          throw IndexError("terms.kv: posting references unknown document or context");
      }
      handle.terms_.emplace(std::move(term), std::move(postings));
    }
    r.expect_magic(kEndMagic);
    if (!r.at_end()) throw IndexError("terms.kv: trailing bytes");
  }

  {
    std::istringstream in(read_file(dir / "stats.tsv"));
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
      const auto fields = split_tabs(line);
      if (fields.size() != 2) throw IndexError("stats.tsv: malformed line");
      if (first) {
        if (fields[0] != "total_docs") throw IndexError("stats.tsv: missing total_docs");
        handle.stats_.total_docs = parse_uint(fields[1], "stats.tsv");
        first = false;
        continue;
      }
      handle.stats_.doc_freq[fields[0]] = static_cast<std::uint32_t>(parse_uint(fields[1], "stats.tsv"));
    }
    if (handle.stats_.total_docs != handle.documents_.size())
      throw IndexError("stats.tsv: document count disagrees with docs.tsv");
  }
  return handle;
}

}  // namespace xsearch
