#include "s2t/token_vocab.hpp"

#include <algorithm>
#include <set>

#include "s2t/error.hpp"
#include "s2t/hash.hpp"

namespace s2t {

TokenVocab TokenVocab::build(std::span<const AstGraph> corpus) {
  if (corpus.empty()) throw EmptyCorpus();
  std::set<std::string> seen;
  for (const auto& graph : corpus) seen.insert(graph.nodes.begin(), graph.nodes.end());
  return from_labels({seen.begin(), seen.end()});
}

TokenVocab TokenVocab::from_labels(std::vector<std::string> labels) {
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  TokenVocab vocab;
  vocab.labels_ = std::move(labels);
  for (std::size_t i = 0; i < vocab.labels_.size(); ++i) {
    vocab.ids_.emplace(vocab.labels_[i], static_cast<std::int32_t>(i + 2));
  }
  return vocab;
}

std::int32_t TokenVocab::id(std::string_view label) const {
  const auto it = ids_.find(label);
  return it == ids_.end() ? kUnk : it->second;
}

std::uint64_t TokenVocab::hash() const {
  std::uint64_t h = fnv1a64("s2t-vocab");
  for (const auto& label : labels_) {
    h = fnv1a64(label, h);
    h = fnv1a64(std::string_view("\0", 1), h);
  }
  return h;
}

nlohmann::ordered_json TokenVocab::to_json() const {
  nlohmann::ordered_json j;
  j["reserved"] = {"<unk>", "<pad>"};
  j["labels"] = labels_;
  j["hash"] = hex64(hash());
  return j;
}

TokenVocab TokenVocab::from_json(const nlohmann::json& j) {
  return from_labels(j.at("labels").get<std::vector<std::string>>());
}

AstGraph tokenize(AstGraph graph, const TokenVocab& vocab) {
  graph.node_tokens.resize(graph.nodes.size());
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    graph.node_tokens[i] = vocab.id(graph.nodes[i]);
  }
  return graph;
}

}  // namespace s2t
