#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "s2t/sql_ast.hpp"

namespace s2t {

enum class Split { Train, Test };

std::string_view split_name(Split split);
std::optional<Split> parse_split(std::string_view name);

// One dataset row: SQL x, gold utterance y and up to three generated
// utterances U'.
struct QueryRecord {
  std::string id;
  std::string sql;
  std::optional<std::string> utterance;
  std::vector<std::string> generated;
  std::optional<QueryType> query_type;
  Split split = Split::Train;

  bool operator==(const QueryRecord&) const = default;
};

inline constexpr std::size_t kMaxGeneratedUtterances = 3;

// Gold utterance when present, otherwise the first generated one.
std::optional<std::string> primary_reference(const QueryRecord& record);

// Gold utterance followed by every generated utterance.
std::vector<std::string> all_references(const QueryRecord& record);

}  // namespace s2t
