#include "s2t/sql_ast.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <set>
#include <unordered_set>

#include "s2t/error.hpp"

namespace s2t {
namespace {

constexpr std::array<std::string_view, 9> kKindNames = {
    "statement", "clause", "keyword", "operator", "function",
    "identifier", "alias", "literal", "star"};

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// ---------------------------------------------------------------------------
// Lexer

enum class TokType { Word, QuotedIdent, Number, String, Symbol, End };

struct Token {
  TokType type;
  std::string text;  // lower-cased for words; raw content for strings
  std::size_t pos;
};

bool is_word_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' ||
         static_cast<unsigned char>(c) >= 0x80;
}
bool is_word_char(char c) {
  return is_word_start(c) || std::isdigit(static_cast<unsigned char>(c)) || c == '$';
}

std::vector<Token> lex(std::string_view sql) {
  std::vector<Token> out;
  std::size_t i = 0;
  const std::size_t n = sql.size();
  while (i < n) {
    const char c = sql[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '-' && i + 1 < n && sql[i + 1] == '-') {
      while (i < n && sql[i] != '\n') ++i;
      continue;
    }
    if (c == '/' && i + 1 < n && sql[i + 1] == '*') {
      const auto end = sql.find("*/", i + 2);
      if (end == std::string_view::npos) throw ParseError(i, "unterminated comment");
      i = end + 2;
      continue;
    }
    const std::size_t start = i;
    if (is_word_start(c)) {
      while (i < n && is_word_char(sql[i])) ++i;
      out.push_back({TokType::Word, lower(sql.substr(start, i - start)), start});
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(sql[i + 1])))) {
      while (i < n && std::isdigit(static_cast<unsigned char>(sql[i]))) ++i;
      if (i < n && sql[i] == '.') {
        ++i;
        while (i < n && std::isdigit(static_cast<unsigned char>(sql[i]))) ++i;
      }
      if (i < n && (sql[i] == 'e' || sql[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < n && (sql[j] == '+' || sql[j] == '-')) ++j;
        if (j < n && std::isdigit(static_cast<unsigned char>(sql[j]))) {
          i = j;
          while (i < n && std::isdigit(static_cast<unsigned char>(sql[i]))) ++i;
        }
      }
      if (i < n && is_word_start(sql[i])) throw ParseError(i, "malformed number");
      out.push_back({TokType::Number, lower(sql.substr(start, i - start)), start});
      continue;
    }
    if (c == '\'' || c == '"') {
      // Spider writes string literals with either quote style.
      std::string content;
      ++i;
      bool closed = false;
      while (i < n) {
        if (sql[i] == c) {
          if (i + 1 < n && sql[i + 1] == c) {
            content.push_back(c);
            i += 2;
            continue;
          }
          ++i;
          closed = true;
          break;
        }
        content.push_back(sql[i++]);
      }
      if (!closed) throw ParseError(start, "unterminated string literal");
      out.push_back({TokType::String, content, start});
      continue;
    }
    if (c == '`' || c == '[') {
      const char close = c == '`' ? '`' : ']';
      const auto end = sql.find(close, i + 1);
      if (end == std::string_view::npos) throw ParseError(i, "unterminated quoted identifier");
      out.push_back({TokType::QuotedIdent, lower(sql.substr(i + 1, end - i - 1)), start});
      i = end + 1;
      continue;
    }
    static constexpr std::array<std::string_view, 6> kTwoChar = {"<=", ">=", "<>", "!=", "==",
                                                                 "||"};
    if (i + 1 < n) {
      const auto two = sql.substr(i, 2);
      if (std::find(kTwoChar.begin(), kTwoChar.end(), two) != kTwoChar.end()) {
        out.push_back({TokType::Symbol, std::string(two), start});
        i += 2;
        continue;
      }
    }
    static constexpr std::string_view kSingle = "=<>+-*/%,.();";
    if (kSingle.find(c) != std::string_view::npos) {
      out.push_back({TokType::Symbol, std::string(1, c), start});
      ++i;
      continue;
    }
    throw ParseError(i, std::string("unexpected character '") + c + "'");
  }
  out.push_back({TokType::End, "", n});
  return out;
}

// ---------------------------------------------------------------------------
// Parser

struct Node {
  std::string label;
  NodeKind kind;
  std::vector<Node> children;
};

Node leaf(std::string label, NodeKind kind) { return Node{std::move(label), kind, {}}; }

Node branch(std::string label, NodeKind kind, std::vector<Node> children) {
  return Node{std::move(label), kind, std::move(children)};
}

const std::unordered_set<std::string>& reserved_words() {
  static const std::unordered_set<std::string> words = {
      "select", "from",   "where",   "group",  "by",     "having", "order",   "limit",
      "offset", "union",  "intersect", "except", "all",  "distinct", "as",    "on",
      "join",   "inner",  "left",    "right",  "full",   "outer",  "cross",   "natural",
      "using",  "and",    "or",      "not",    "in",     "is",     "null",    "like",
      "between", "exists", "case",   "when",   "then",   "else",   "end",     "asc",
      "desc",   "with",   "into",    "values", "insert", "update", "delete",  "set",
      "glob"};
  return words;
}

class Parser {
 public:
  explicit Parser(std::string_view sql) : tokens_(lex(sql)) {}

  Node parse_statement() {
    if (peek().type == TokType::End) throw ParseError(0, "empty statement");
    if (peek_word("with")) throw ParseError(peek().pos, "common table expressions are not supported");
    if (!peek_word("select") && !peek_symbol("(")) {
      throw ParseError(peek().pos, "expected SELECT, found '" + peek().text + "'");
    }
    Node stmt = parse_set_expr();
    if (peek_symbol(";")) {
      advance();
      while (peek_symbol(";")) advance();
      if (peek().type != TokType::End) throw MultiStatementError(peek().pos);
    }
    if (peek().type != TokType::End) {
      throw ParseError(peek().pos, "unexpected token '" + peek().text + "'");
    }
    return stmt;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)];
  }
  const Token& advance() { return tokens_[pos_ < tokens_.size() - 1 ? pos_++ : pos_]; }

  bool peek_word(std::string_view w, std::size_t ahead = 0) const {
    const auto& t = peek(ahead);
    return t.type == TokType::Word && t.text == w;
  }
  bool peek_symbol(std::string_view s, std::size_t ahead = 0) const {
    const auto& t = peek(ahead);
    return t.type == TokType::Symbol && t.text == s;
  }
  bool accept_word(std::string_view w) {
    if (!peek_word(w)) return false;
    advance();
    return true;
  }
  bool accept_symbol(std::string_view s) {
    if (!peek_symbol(s)) return false;
    advance();
    return true;
  }
  void expect_word(std::string_view w) {
    if (!accept_word(w)) {
      throw ParseError(peek().pos, "expected " + std::string(w) + ", found '" + peek().text + "'");
    }
  }
  void expect_symbol(std::string_view s) {
    if (!accept_symbol(s)) {
      throw ParseError(peek().pos,
                       "expected '" + std::string(s) + "', found '" + peek().text + "'");
    }
  }

  bool is_plain_identifier(const Token& t) const {
    return (t.type == TokType::Word && !reserved_words().contains(t.text)) ||
           t.type == TokType::QuotedIdent;
  }

  std::string expect_identifier() {
    const Token& t = peek();
    if (!is_plain_identifier(t)) {
      throw ParseError(t.pos, "expected identifier, found '" + t.text + "'");
    }
    advance();
    return t.text;
  }

  bool at_subquery_start() const {
    // '(' followed by SELECT, possibly behind further parentheses.
    std::size_t k = 0;
    while (peek_symbol("(", k)) ++k;
    return k > 0 && peek_word("select", k);
  }

  Node parse_set_operand() {
    if (peek_symbol("(")) {
      advance();
      Node inner = parse_set_expr();
      expect_symbol(")");
      return inner;
    }
    return parse_select_core();
  }

  Node parse_set_expr() {
    Node left = parse_set_operand();
    while (true) {
      std::string op;
      if (accept_word("union")) {
        op = accept_word("all") ? "union all" : "union";
      } else if (accept_word("intersect")) {
        op = "intersect";
      } else if (accept_word("except")) {
        op = "except";
      } else {
        break;
      }
      Node right = parse_set_operand();
      std::vector<Node> kids;
      kids.push_back(std::move(left));
      kids.push_back(std::move(right));
      left = branch(op, NodeKind::Statement, std::move(kids));
    }
    return left;
  }

  Node parse_select_core() {
    expect_word("select");
    Node select = leaf("select", NodeKind::Statement);
    if (accept_word("distinct")) {
      select.children.push_back(leaf("distinct", NodeKind::Keyword));
    } else {
      accept_word("all");
    }
    do {
      select.children.push_back(parse_select_item());
    } while (accept_symbol(","));

    if (accept_word("from")) select.children.push_back(parse_from());
    if (accept_word("where")) {
      select.children.push_back(branch("where", NodeKind::Clause, {parse_expr()}));
    }
    if (peek_word("group")) {
      advance();
      expect_word("by");
      Node group = leaf("group by", NodeKind::Clause);
      do {
        group.children.push_back(parse_expr());
      } while (accept_symbol(","));
      select.children.push_back(std::move(group));
    }
    if (accept_word("having")) {
      select.children.push_back(branch("having", NodeKind::Clause, {parse_expr()}));
    }
    if (peek_word("order")) {
      advance();
      expect_word("by");
      Node order = leaf("order by", NodeKind::Clause);
      do {
        Node key = parse_expr();
        if (accept_word("asc")) {
          key = branch("asc", NodeKind::Keyword, {std::move(key)});
        } else if (accept_word("desc")) {
          key = branch("desc", NodeKind::Keyword, {std::move(key)});
        }
        order.children.push_back(std::move(key));
      } while (accept_symbol(","));
      select.children.push_back(std::move(order));
    }
    if (accept_word("limit")) {
      Node limit = branch("limit", NodeKind::Clause, {parse_expr()});
      if (accept_symbol(",")) limit.children.push_back(parse_expr());
      select.children.push_back(std::move(limit));
      if (accept_word("offset")) {
        select.children.push_back(branch("offset", NodeKind::Clause, {parse_expr()}));
      }
    }
    return select;
  }

  std::optional<Node> parse_alias() {
    if (accept_word("as")) {
      const Token& t = peek();
      if (t.type == TokType::String) {
        advance();
        return leaf(lower(t.text), NodeKind::Alias);
      }
      return leaf(expect_identifier(), NodeKind::Alias);
    }
    if (is_plain_identifier(peek())) return leaf(expect_identifier(), NodeKind::Alias);
    return std::nullopt;
  }

  Node with_alias(Node value) {
    if (auto alias = parse_alias()) {
      std::vector<Node> kids;
      kids.push_back(std::move(value));
      kids.push_back(std::move(*alias));
      return branch("as", NodeKind::Keyword, std::move(kids));
    }
    return value;
  }

  Node parse_select_item() { return with_alias(parse_expr()); }

  Node parse_table_ref() {
    if (at_subquery_start()) {
      expect_symbol("(");
      Node sub = parse_set_expr();
      expect_symbol(")");
      return with_alias(std::move(sub));
    }
    if (peek_symbol("(")) {
      // Parenthesised join group: descend and keep the inner structure.
      advance();
      Node inner = parse_table_ref();
      expect_symbol(")");
      return inner;
    }
    Node table = leaf(expect_identifier(), NodeKind::Identifier);
    if (accept_symbol(".")) {
      Node name = leaf(expect_identifier(), NodeKind::Identifier);
      std::vector<Node> kids;
      kids.push_back(std::move(table));
      kids.push_back(std::move(name));
      table = branch(".", NodeKind::Operator, std::move(kids));
    }
    return with_alias(std::move(table));
  }

  std::optional<std::string> parse_join_kind() {
    const std::size_t save = pos_;
    std::string kind;
    if (accept_word("natural")) kind = "natural ";
    if (accept_word("inner")) {
      kind += "inner ";
    } else if (accept_word("cross")) {
      kind += "cross ";
    } else if (accept_word("left")) {
      kind += "left ";
      accept_word("outer");
    } else if (accept_word("right")) {
      kind += "right ";
      accept_word("outer");
    } else if (accept_word("full")) {
      kind += "full ";
      accept_word("outer");
    }
    if (accept_word("join")) return kind + "join";
    pos_ = save;
    return std::nullopt;
  }

  Node parse_from() {
    Node from = leaf("from", NodeKind::Clause);
    from.children.push_back(parse_table_ref());
    while (true) {
      if (accept_symbol(",")) {
        from.children.push_back(parse_table_ref());
        continue;
      }
      auto kind = parse_join_kind();
      if (!kind) break;
      Node join = branch(*kind, NodeKind::Clause, {parse_table_ref()});
      if (accept_word("on")) {
        join.children.push_back(branch("on", NodeKind::Clause, {parse_expr()}));
      } else if (accept_word("using")) {
        expect_symbol("(");
        Node using_node = leaf("using", NodeKind::Clause);
        do {
          using_node.children.push_back(leaf(expect_identifier(), NodeKind::Identifier));
        } while (accept_symbol(","));
        expect_symbol(")");
        join.children.push_back(std::move(using_node));
      }
      from.children.push_back(std::move(join));
    }
    return from;
  }

  static Node binary(std::string op, Node lhs, Node rhs) {
    std::vector<Node> kids;
    kids.push_back(std::move(lhs));
    kids.push_back(std::move(rhs));
    return branch(std::move(op), NodeKind::Operator, std::move(kids));
  }

  Node parse_expr() { return parse_or(); }

  Node parse_or() {
    Node left = parse_and();
    while (accept_word("or")) left = binary("or", std::move(left), parse_and());
    return left;
  }

  Node parse_and() {
    Node left = parse_not();
    while (accept_word("and")) left = binary("and", std::move(left), parse_not());
    return left;
  }

  Node parse_not() {
    if (peek_word("not") && !peek_word("exists", 1)) {
      advance();
      return branch("not", NodeKind::Operator, {parse_not()});
    }
    return parse_predicate();
  }

  Node parse_in_rhs(std::string op, Node lhs) {
    expect_symbol("(");
    Node node = leaf(std::move(op), NodeKind::Operator);
    node.children.push_back(std::move(lhs));
    if (peek_word("select") || at_subquery_start()) {
      node.children.push_back(parse_set_expr());
    } else {
      do {
        node.children.push_back(parse_expr());
      } while (accept_symbol(","));
    }
    expect_symbol(")");
    return node;
  }

  Node parse_predicate() {
    Node left = parse_additive();
    static constexpr std::array<std::string_view, 8> kComparisons = {"=", "==", "!=", "<>",
                                                                     "<", ">",  "<=", ">="};
    const Token& t = peek();
    if (t.type == TokType::Symbol &&
        std::find(kComparisons.begin(), kComparisons.end(), t.text) != kComparisons.end()) {
      std::string op = t.text == "==" ? "=" : (t.text == "<>" ? "!=" : t.text);
      advance();
      return binary(std::move(op), std::move(left), parse_additive());
    }
    bool negated = false;
    if (peek_word("not") &&
        (peek_word("in", 1) || peek_word("like", 1) || peek_word("between", 1) ||
         peek_word("glob", 1))) {
      advance();
      negated = true;
    }
    const std::string prefix = negated ? "not " : "";
    if (accept_word("in")) return parse_in_rhs(prefix + "in", std::move(left));
    if (accept_word("like")) return binary(prefix + "like", std::move(left), parse_additive());
    if (accept_word("glob")) return binary(prefix + "glob", std::move(left), parse_additive());
    if (accept_word("between")) {
      Node lo = parse_additive();
      expect_word("and");
      Node hi = parse_additive();
      Node node = leaf(prefix + "between", NodeKind::Operator);
      node.children.push_back(std::move(left));
      node.children.push_back(std::move(lo));
      node.children.push_back(std::move(hi));
      return node;
    }
    if (negated) throw ParseError(peek().pos, "dangling NOT");
    if (accept_word("is")) {
      const std::string op = accept_word("not") ? "is not" : "is";
      return binary(op, std::move(left), parse_additive());
    }
    return left;
  }

  Node parse_additive() {
    Node left = parse_multiplicative();
    while (peek_symbol("+") || peek_symbol("-") || peek_symbol("||")) {
      std::string op = advance().text;
      left = binary(std::move(op), std::move(left), parse_multiplicative());
    }
    return left;
  }

  Node parse_multiplicative() {
    Node left = parse_unary();
    while (peek_symbol("*") || peek_symbol("/") || peek_symbol("%")) {
      std::string op = advance().text;
      left = binary(std::move(op), std::move(left), parse_unary());
    }
    return left;
  }

  Node parse_unary() {
    if (peek_symbol("-") || peek_symbol("+")) {
      const Token& t = advance();
      if (peek().type == TokType::Number) {
        Node lit = leaf(t.text == "-" ? "-" + advance().text : advance().text, NodeKind::Literal);
        return lit;
      }
      return branch(t.text, NodeKind::Operator, {parse_unary()});
    }
    return parse_primary();
  }

  Node parse_function(std::string name) {
    expect_symbol("(");
    Node fn = leaf(std::move(name), NodeKind::Function);
    if (accept_symbol(")")) return fn;
    if (fn.label == "cast") {
      fn.children.push_back(parse_expr());
      expect_word("as");
      fn.children.push_back(leaf(expect_identifier(), NodeKind::Keyword));
      expect_symbol(")");
      return fn;
    }
    if (accept_word("distinct")) {
      Node distinct = leaf("distinct", NodeKind::Keyword);
      do {
        distinct.children.push_back(parse_expr());
      } while (accept_symbol(","));
      fn.children.push_back(std::move(distinct));
    } else {
      do {
        fn.children.push_back(parse_expr());
      } while (accept_symbol(","));
    }
    expect_symbol(")");
    return fn;
  }

  Node parse_case() {
    Node node = leaf("case", NodeKind::Operator);
    if (!peek_word("when")) node.children.push_back(parse_expr());
    if (!peek_word("when")) throw ParseError(peek().pos, "CASE without WHEN");
    while (accept_word("when")) {
      Node cond = parse_expr();
      expect_word("then");
      std::vector<Node> kids;
      kids.push_back(std::move(cond));
      kids.push_back(parse_expr());
      node.children.push_back(branch("when", NodeKind::Keyword, std::move(kids)));
    }
    if (accept_word("else")) node.children.push_back(branch("else", NodeKind::Keyword, {parse_expr()}));
    expect_word("end");
    return node;
  }

  Node parse_primary() {
    const Token& t = peek();
    switch (t.type) {
      case TokType::Number:
        advance();
        return leaf(t.text, NodeKind::Literal);
      case TokType::String:
        advance();
        return leaf("'" + lower(t.text) + "'", NodeKind::Literal);
      case TokType::End:
        throw ParseError(t.pos, "unexpected end of input");
      case TokType::Symbol:
        if (t.text == "*") {
          advance();
          return leaf("*", NodeKind::Star);
        }
        if (t.text == "(") {
          if (at_subquery_start()) {
            advance();
            Node sub = parse_set_expr();
            expect_symbol(")");
            return sub;
          }
          advance();
          Node inner = parse_expr();
          expect_symbol(")");
          return inner;
        }
        throw ParseError(t.pos, "unexpected '" + t.text + "'");
      case TokType::QuotedIdent:
      case TokType::Word:
        break;
    }
    if (t.type == TokType::Word) {
      if (t.text == "null" || t.text == "true" || t.text == "false") {
        advance();
        return leaf(t.text, NodeKind::Literal);
      }
      if (t.text == "exists" || (t.text == "not" && peek_word("exists", 1))) {
        const bool negated = t.text == "not";
        if (negated) advance();
        advance();
        expect_symbol("(");
        Node sub = parse_set_expr();
        expect_symbol(")");
        return branch(negated ? "not exists" : "exists", NodeKind::Operator, {std::move(sub)});
      }
      if (t.text == "case") {
        advance();
        return parse_case();
      }
      if (reserved_words().contains(t.text)) {
        throw ParseError(t.pos, "unexpected keyword '" + t.text + "'");
      }
    }
    advance();
    std::string name = t.text;
    if (t.type == TokType::Word && peek_symbol("(")) return parse_function(std::move(name));
    Node ident = leaf(std::move(name), NodeKind::Identifier);
    if (accept_symbol(".")) {
      Node member = peek_symbol("*") ? (advance(), leaf("*", NodeKind::Star))
                                     : leaf(expect_identifier(), NodeKind::Identifier);
      std::vector<Node> kids;
      kids.push_back(std::move(ident));
      kids.push_back(std::move(member));
      return branch(".", NodeKind::Operator, std::move(kids));
    }
    return ident;
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

void flatten(const Node& node, std::optional<std::size_t> parent, AstGraph& out) {
  const std::size_t index = out.nodes.size();
  out.nodes.push_back(node.label);
  out.kinds.push_back(node.kind);
  if (parent) out.edges.emplace_back(*parent, index);
  for (const auto& child : node.children) flatten(child, index, out);
}

}  // namespace

std::string_view node_kind_name(NodeKind kind) {
  return kKindNames[static_cast<std::size_t>(kind)];
}

std::optional<NodeKind> parse_node_kind(std::string_view name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == name) return static_cast<NodeKind>(i);
  }
  return std::nullopt;
}

AstGraph parse_sql(std::string_view sql) {
  Parser parser(sql);
  const Node root = parser.parse_statement();
  AstGraph graph;
  flatten(root, std::nullopt, graph);
  return graph;
}

bool is_tree(const AstGraph& graph) {
  const std::size_t n = graph.size();
  if (n == 0 || graph.kinds.size() != n) return false;
  if (graph.edges.size() != n - 1) return false;
  std::vector<int> parents(n, 0);
  std::vector<std::vector<std::size_t>> children(n);
  for (const auto& [p, c] : graph.edges) {
    if (p >= n || c >= n || c == 0 || p == c) return false;
    if (++parents[c] > 1) return false;
    children[p].push_back(c);
  }
  // Connected from the root, which with n-1 edges and single parents means acyclic.
  std::vector<bool> seen(n, false);
  std::vector<std::size_t> stack = {0};
  std::size_t visited = 0;
  while (!stack.empty()) {
    const auto v = stack.back();
    stack.pop_back();
    if (seen[v]) return false;
    seen[v] = true;
    ++visited;
    for (auto c : children[v]) stack.push_back(c);
  }
  return visited == n;
}

QueryType classify_query(const AstGraph& graph) {
  for (std::size_t i = 1; i < graph.size(); ++i) {
    if (graph.kinds[i] == NodeKind::Statement) return QueryType::Nested;
  }
  static const std::set<std::string, std::less<>> kAggregates = {"avg", "count", "max", "min",
                                                                 "sum"};
  for (std::size_t i = 0; i < graph.size(); ++i) {
    if (graph.kinds[i] == NodeKind::Function && kAggregates.contains(graph.nodes[i])) {
      return QueryType::Aggregate;
    }
  }
  return QueryType::Simple;
}

std::string_view query_type_name(QueryType type) {
  switch (type) {
    case QueryType::Simple:
      return "simple";
    case QueryType::Nested:
      return "nested";
    case QueryType::Aggregate:
      return "aggregate";
  }
  return "simple";
}

std::optional<QueryType> parse_query_type(std::string_view name) {
  if (name == "simple") return QueryType::Simple;
  if (name == "nested") return QueryType::Nested;
  if (name == "aggregate") return QueryType::Aggregate;
  return std::nullopt;
}

std::vector<std::string> schema_identifiers(const AstGraph& graph) {
  std::set<std::string> names;
  for (std::size_t i = 0; i < graph.size(); ++i) {
    if (graph.kinds[i] == NodeKind::Identifier) names.insert(graph.nodes[i]);
  }
  return {names.begin(), names.end()};
}

nlohmann::ordered_json graph_to_json(const AstGraph& graph) {
  nlohmann::ordered_json j;
  j["nodes"] = graph.nodes;
  auto& kinds = j["kinds"] = nlohmann::ordered_json::array();
  for (auto k : graph.kinds) kinds.push_back(std::string(node_kind_name(k)));
  auto& edges = j["edges"] = nlohmann::ordered_json::array();
  for (const auto& [p, c] : graph.edges) edges.push_back({p, c});
  j["tokens"] = graph.node_tokens;
  return j;
}

AstGraph graph_from_json(const nlohmann::json& j) {
  AstGraph graph;
  graph.nodes = j.at("nodes").get<std::vector<std::string>>();
  if (j.contains("kinds")) {
    for (const auto& k : j.at("kinds")) {
      auto kind = parse_node_kind(k.get<std::string>());
      if (!kind) throw Error("unknown node kind: " + k.get<std::string>());
      graph.kinds.push_back(*kind);
    }
  } else {
    graph.kinds.assign(graph.nodes.size(), NodeKind::Identifier);
  }
  for (const auto& e : j.at("edges")) {
    graph.edges.emplace_back(e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>());
  }
  if (j.contains("tokens")) graph.node_tokens = j.at("tokens").get<std::vector<std::int32_t>>();
  return graph;
}

}  // namespace s2t
