#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "s2t/sql_ast.hpp"

namespace s2t {

// Index tokenizer over AST node labels. Ids 0 and 1 are reserved for UNK and
// PAD; real labels follow in lexicographic order so the vocabulary depends only
// on the set of labels seen, never on corpus order.
class TokenVocab {
 public:
  static constexpr std::int32_t kUnk = 0;
  static constexpr std::int32_t kPad = 1;

  TokenVocab() = default;

  // Throws EmptyCorpus when no graphs are given.
  static TokenVocab build(std::span<const AstGraph> corpus);

  // Rebuilds from a label list (without the reserved entries).
  static TokenVocab from_labels(std::vector<std::string> labels);

  std::int32_t id(std::string_view label) const;
  std::size_t size() const noexcept { return labels_.size() + 2; }

  // Labels in id order starting at id 2.
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  std::uint64_t hash() const;

  nlohmann::ordered_json to_json() const;
  static TokenVocab from_json(const nlohmann::json& j);

  bool operator==(const TokenVocab& other) const { return labels_ == other.labels_; }

 private:
  std::vector<std::string> labels_;
  std::map<std::string, std::int32_t, std::less<>> ids_;
};

// Fills node_tokens; unseen labels map to kUnk. Idempotent.
AstGraph tokenize(AstGraph graph, const TokenVocab& vocab);

}  // namespace s2t
