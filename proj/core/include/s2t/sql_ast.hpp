#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace s2t {

enum class NodeKind : std::uint8_t {
  Statement,   // select / set operation
  Clause,      // from, where, group by, join, on, ...
  Keyword,     // distinct, as, asc, desc, when, ...
  Operator,    // =, and, not in, like, +, ., ...
  Function,    // count, max, lower, ...
  Identifier,  // table and column names
  Alias,       // names introduced by AS
  Literal,     // numbers, strings, null
  Star,        // *
};

std::string_view node_kind_name(NodeKind kind);
std::optional<NodeKind> parse_node_kind(std::string_view name);

// Parse tree of one SQL statement, flattened in pre-order. Node 0 is the root
// statement; children appear after their parent in source order. Edges point
// parent -> child.
struct AstGraph {
  std::vector<std::string> nodes;
  std::vector<NodeKind> kinds;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::vector<std::int32_t> node_tokens;  // empty until tokenize()

  std::size_t size() const noexcept { return nodes.size(); }
  bool operator==(const AstGraph&) const = default;
};

// Parses a single ANSI-style statement (the subset used by Spider, SParC and
// CoSQL). A trailing semicolon is accepted. Labels are lower-cased.
// Throws ParseError or MultiStatementError.
AstGraph parse_sql(std::string_view sql);

// True when edges form a tree rooted at node 0 with one parent per non-root node.
bool is_tree(const AstGraph& graph);

enum class QueryType : std::uint8_t { Simple, Nested, Aggregate };

// Nested if any subquery exists, else Aggregate if an aggregate function
// (count/sum/avg/min/max) appears, else Simple.
QueryType classify_query(const AstGraph& graph);

std::string_view query_type_name(QueryType type);
std::optional<QueryType> parse_query_type(std::string_view name);

// Distinct table and column names referenced by the statement, sorted.
std::vector<std::string> schema_identifiers(const AstGraph& graph);

// {"nodes": [...], "kinds": [...], "edges": [[p, c], ...], "tokens": [...]}
nlohmann::ordered_json graph_to_json(const AstGraph& graph);
AstGraph graph_from_json(const nlohmann::json& j);

}  // namespace s2t
