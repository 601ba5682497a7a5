#include "xsearch/query_tree.h"

#include <cctype>
#include <charconv>
#include <optional>

#include "xsearch/error.h"

namespace xsearch {

QueryNode QueryNode::make_term(std::string word) {
  QueryNode node;
  node.kind = OpKind::kTerm;
  node.term = std::move(word);
  return node;
}

QueryNode QueryNode::make_seq(std::vector<std::string> pattern) {
  QueryNode node;
  node.kind = OpKind::kSeq;
  node.pattern = std::move(pattern);
  return node;
}

QueryNode QueryNode::make(OpKind kind, std::vector<QueryNode> children) {
  QueryNode node;
  node.kind = kind;
  node.children = std::move(children);
  return node;
}

QueryNode QueryNode::make_in(QueryPath path, std::vector<QueryNode> children) {
  QueryNode node = make(OpKind::kIn, std::move(children));
  node.path = std::move(path);
  return node;
}

QueryNode QueryNode::make_inplus(QueryPath path, double beta, std::vector<QueryNode> children) {
  QueryNode node = make(OpKind::kInPlus, std::move(children));
  node.path = std::move(path);
  node.beta = beta;
  return node;
}

std::string_view op_name(OpKind kind) {
  switch (kind) {
    case OpKind::kTerm:
      return "TERM";
    case OpKind::kSeq:
      return "SEQ";
    case OpKind::kOr:
      return "OR";
    case OpKind::kAnd:
      return "AND";
    case OpKind::kWithout:
      return "WITHOUT";
    case OpKind::kIn:
      return "IN";
    case OpKind::kInPlus:
      return "IN+";
    case OpKind::kSamePlus:
      return "SAME+";
    case OpKind::kFilter:
      return "FILTER";
  }
  return "?";
}

void validate(const QueryNode& node) {
  const auto fail = [&](const std::string& why) {
    throw QueryError(std::string(op_name(node.kind)) + ": " + why);
  };
  switch (node.kind) {
    case OpKind::kTerm:
      if (node.term.empty()) fail("empty term");
      if (!node.children.empty()) fail("a term has no children");
      return;
    case OpKind::kSeq: {
      if (!node.children.empty()) fail("a sequence holds words, not sub-queries");
      bool has_word = false;
      for (const auto& w : node.pattern) {
        if (w.empty()) fail("empty word in pattern");
        has_word |= w != kWildcard;
      }
      if (!has_word) fail("pattern needs at least one non-wildcard word");
      return;
    }
    case OpKind::kWithout:
    case OpKind::kFilter:
      if (node.children.size() != 2) fail("expects exactly two operands");
      break;
    case OpKind::kIn:
    case OpKind::kInPlus:
      if (node.path.empty()) fail("empty path");
      if (node.kind == OpKind::kInPlus && !(node.beta >= 0.0 && node.beta <= 1.0))
        fail("beta must lie in [0, 1]");
      [[fallthrough]];
    case OpKind::kOr:
    case OpKind::kAnd:
    case OpKind::kSamePlus:
      if (node.children.empty()) fail("expects at least one operand");
      break;
  }
  for (const auto& child : node.children) validate(child);
}

namespace {

bool needs_quotes(std::string_view word) {
  if (word.empty()) return true;
  for (char c : word)
    if (std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' || c == '[' ||
        c == ']' || c == '"')
      return true;
  return false;
}

void print_word(std::string& out, std::string_view word) {
  if (!needs_quotes(word)) {
    out += word;
    return;
  }
  out += '"';
  for (char c : word) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void print(std::string& out, const QueryNode& node) {
  if (node.kind == OpKind::kTerm) {
    print_word(out, node.term);
    return;
  }
  out += '(';
  out += op_name(node.kind);
  if (node.kind == OpKind::kSeq) {
    for (const auto& w : node.pattern) {
      out += ' ';
      print_word(out, w);
    }
  }
  if (node.kind == OpKind::kIn || node.kind == OpKind::kInPlus) {
    out += ' ';
    out += node.path.to_string();
    if (node.kind == OpKind::kInPlus && node.beta != kDefaultBeta)
      out += " beta=" + format_double(node.beta);
  }
  for (const auto& child : node.children) {
    out += ' ';
    print(out, child);
  }
  out += ')';
}

class SexprParser {
 public:
  explicit SexprParser(std::string_view text) : text_(text) {}

  QueryNode parse_all() {
    QueryNode node = parse_expr();
    skip_space();
    if (pos_ != text_.size()) throw ParseError("trailing input after query", pos_);
    return node;
  }

 private:
  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool at_end() {
    skip_space();
    return pos_ >= text_.size();
  }

  char peek() {
    skip_space();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  // Bare or quoted atom.
  std::string atom() {
    skip_space();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of query", pos_);
    if (text_[pos_] == '"') {
      const std::size_t start = pos_++;
      std::string out;
      while (pos_ < text_.size() && text_[pos_] != '"') {
        if (text_[pos_] == '\\' && pos_ + 1 < text_.size()) ++pos_;
        out += text_[pos_++];
      }
      if (pos_ >= text_.size()) throw ParseError("unterminated quoted word", start);
      ++pos_;
      return out;
    }
    const std::size_t start = pos_;
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' || c == '[' ||
          c == ']' || c == '"')
        break;
      ++pos_;
    }
    if (pos_ == start) throw ParseError(std::string("unexpected '") + text_[pos_] + "'", pos_);
    return std::string(text_.substr(start, pos_ - start));
  }

  QueryPath path() {
    const std::size_t start = pos_;
    ++pos_;  // '['
    const auto close = text_.find(']', pos_);
    if (close == std::string_view::npos) throw ParseError("unterminated path", start);
    const auto body = text_.substr(pos_, close - pos_);
    pos_ = close + 1;
    QueryPath p = QueryPath::parse(body);
    if (p.empty()) throw ParseError("empty path", start);
    return p;
  }

  static std::optional<OpKind> op_kind(std::string_view name) {
    std::string upper;
    for (char c : name) upper += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    for (OpKind k : {OpKind::kTerm, OpKind::kSeq, OpKind::kOr, OpKind::kAnd, OpKind::kWithout,
                     OpKind::kIn, OpKind::kInPlus, OpKind::kSamePlus, OpKind::kFilter})
      if (op_name(k) == upper) return k;
    return std::nullopt;
  }

  QueryNode parse_expr() {
    if (at_end()) throw ParseError("unexpected end of query", pos_);
    const char c = peek();
    if (c == ')') throw ParseError("unexpected ')'", pos_);
    if (c == '[') throw ParseError("path outside IN/IN+", pos_);
    if (c != '(') return QueryNode::make_term(atom());

    const std::size_t open = pos_++;
    const std::size_t name_at = (skip_space(), pos_);
    const std::string name = atom();
    const auto kind = op_kind(name);
    if (!kind) throw ParseError("unknown operator '" + name + "'", name_at);

    QueryNode node;
    node.kind = *kind;
    if (node.kind == OpKind::kTerm) {
      node.term = atom();
    } else if (node.kind == OpKind::kSeq) {
      while (peek() != ')') {
        if (at_end()) throw ParseError("unterminated SEQ", open);
        if (peek() == '(' || peek() == '[') throw ParseError("SEQ takes words only", pos_);
        node.pattern.push_back(atom());
      }
    } else {
      if (node.kind == OpKind::kIn || node.kind == OpKind::kInPlus) {
        if (peek() != '[') throw ParseError(name + " expects a [path]", pos_);
        node.path = path();
        if (node.kind == OpKind::kInPlus) parse_beta(node);
      }
      while (peek() != ')') {
        if (at_end()) throw ParseError("unbalanced parentheses", open);
        node.children.push_back(parse_expr());
      }
    }
    if (peek() != ')') throw ParseError("expected ')'", pos_);
    ++pos_;
    return node;
  }

  void parse_beta(QueryNode& node) {
    skip_space();
    constexpr std::string_view kKey = "beta=";
    if (text_.substr(pos_, kKey.size()) != kKey) return;
    const std::size_t at = pos_;
    pos_ += kKey.size();
    const std::string value = atom();
    double beta = 0.0;
    const auto res = std::from_chars(value.data(), value.data() + value.size(), beta);
    if (res.ec != std::errc() || res.ptr != value.data() + value.size())
      throw ParseError("bad beta value '" + value + "'", at);
    node.beta = beta;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string to_sexpr(const QueryNode& node) {
  std::string out;
  print(out, node);
  return out;
}

QueryNode parse_sexpr(std::string_view text) { return SexprParser(text).parse_all(); }

}  // namespace xsearch
