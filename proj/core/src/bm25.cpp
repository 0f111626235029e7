#include "s2t/bm25.hpp"

#include <cctype>
#include <cmath>

namespace s2t {

std::vector<std::string> bm25_tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  for (const char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) || ch == '_' || c >= 0x80) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      out.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

Bm25Index Bm25Index::build(std::span<const std::string> documents, Bm25Params params) {
  Bm25Index index;
  index.params_ = params;
  index.term_counts_.reserve(documents.size());
  double total_length = 0.0;
  for (const auto& doc : documents) {
    std::unordered_map<std::string, std::size_t> counts;
    const auto tokens = bm25_tokenize(doc);
    for (const auto& t : tokens) ++counts[t];
    for (const auto& [term, _] : counts) ++index.doc_freq_[term];
    index.doc_length_.push_back(tokens.size());
    total_length += static_cast<double>(tokens.size());
    index.term_counts_.push_back(std::move(counts));
  }
  if (!documents.empty()) index.avg_doc_length_ = total_length / static_cast<double>(documents.size());
  return index;
}

std::size_t Bm25Index::doc_frequency(std::string_view term) const {
  const auto it = doc_freq_.find(std::string(term));
  return it == doc_freq_.end() ? 0 : it->second;
}

double Bm25Index::idf(std::string_view term) const {
  const double n = static_cast<double>(size());
  const double df = static_cast<double>(doc_frequency(term));
  return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

double Bm25Index::score(std::span<const std::string> query_terms, std::size_t doc) const {
  const auto& counts = term_counts_.at(doc);
  const double len_ratio =
      avg_doc_length_ > 0.0 ? static_cast<double>(doc_length_[doc]) / avg_doc_length_ : 0.0;
  const double norm = params_.k1 * (1.0 - params_.b + params_.b * len_ratio);
  double total = 0.0;
  for (const auto& term : query_terms) {
    const auto it = counts.find(term);
    if (it == counts.end()) continue;
    const double tf = static_cast<double>(it->second);
    total += idf(term) * tf * (params_.k1 + 1.0) / (tf + norm);
  }
  return total;
}

std::vector<double> Bm25Index::score_all(std::string_view query) const {
  const auto terms = bm25_tokenize(query);
  std::vector<double> out(size());
  for (std::size_t d = 0; d < size(); ++d) out[d] = score(terms, d);
  return out;
}

}  // namespace s2t
