#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace s2t {

// Lower-cases and splits on whitespace and punctuation. Underscores stay inside
// tokens so column names such as dog_id remain one term.
std::vector<std::string> bm25_tokenize(std::string_view text);

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

// Okapi BM25 over a fixed document collection:
//   score(q, D) = sum_{t in q} idf(t) * tf(t,D) * (k1 + 1)
//                 / (tf(t,D) + k1 * (1 - b + b * |D| / avgdl))
//   idf(t) = ln(1 + (N - df(t) + 0.5) / (df(t) + 0.5))
// Query terms are counted with multiplicity. A document without any query term
// scores exactly 0.
class Bm25Index {
 public:
  Bm25Index() = default;
  static Bm25Index build(std::span<const std::string> documents, Bm25Params params = {});

  double idf(std::string_view term) const;
  double score(std::span<const std::string> query_terms, std::size_t doc) const;
  std::vector<double> score_all(std::string_view query) const;

  std::size_t size() const noexcept { return doc_length_.size(); }
  std::size_t doc_length(std::size_t doc) const { return doc_length_.at(doc); }
  std::size_t doc_frequency(std::string_view term) const;
  double average_doc_length() const noexcept { return avg_doc_length_; }
  const Bm25Params& params() const noexcept { return params_; }

 private:
  Bm25Params params_;
  std::vector<std::unordered_map<std::string, std::size_t>> term_counts_;
  std::unordered_map<std::string, std::size_t> doc_freq_;
  std::vector<std::size_t> doc_length_;
  double avg_doc_length_ = 0.0;
};

}  // namespace s2t
