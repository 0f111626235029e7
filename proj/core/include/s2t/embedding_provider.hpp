#pragma once

#include <cstddef>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "s2t/http_client.hpp"

namespace s2t {

using Embedding = std::vector<double>;

// Sentence embedding source. Implementations throw ProviderUnavailable when the
// backing service cannot answer.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::string name() const = 0;
  virtual Embedding embed(std::string_view text) = 0;
};

// Offline stand-in: L2-normalised bag of hashed unigrams and bigrams over the
// BLEU tokenisation. Identical texts map to identical vectors; texts with no
// shared tokens are orthogonal.
class HashingEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit HashingEmbeddingProvider(std::size_t dim = 512) : dim_(dim) {}
  std::string name() const override { return "hashing-bow"; }
  Embedding embed(std::string_view text) override;

 private:
  std::size_t dim_;
};

// OpenAI-compatible POST {base}/embeddings.
class HttpEmbeddingProvider final : public EmbeddingProvider {
 public:
  HttpEmbeddingProvider(std::string base_url, std::string model, std::string api_key,
                        double timeout_seconds = 30.0);
  std::string name() const override { return "http:" + model_; }
  Embedding embed(std::string_view text) override;

 private:
  HttpEndpoint endpoint_;
  std::string model_;
  std::string api_key_;
  double timeout_seconds_;
};

// Memoises embeddings by text hash. Concurrent requests for the same text
// share one provider call; failures are not cached.
class EmbeddingCache {
 public:
  explicit EmbeddingCache(std::shared_ptr<EmbeddingProvider> provider)
      : provider_(std::move(provider)) {}

  std::shared_ptr<const Embedding> get(std::string_view text);
  std::size_t size() const;
  std::size_t provider_calls() const;
  const EmbeddingProvider& provider() const { return *provider_; }

 private:
  std::shared_ptr<EmbeddingProvider> provider_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_future<std::shared_ptr<const Embedding>>> entries_;
  std::size_t calls_ = 0;
};

// Max cosine between the candidate and any reference, clamped to [0, 1].
// nullopt when the provider is unavailable. Throws EmptyCandidate,
// EmptyReferences.
std::optional<double> embed_similarity(std::string_view candidate,
                                       std::span<const std::string> references,
                                       EmbeddingCache& cache);

// External alignment scorer: POST {base}/score with
// {"contexts": [...], "claims": [...]} answered by {"scores": [...]}.
class HttpAlignScorer {
 public:
  HttpAlignScorer(std::string base_url, double timeout_seconds = 60.0);
  std::optional<double> score(std::string_view context, std::string_view claim) const;

 private:
  HttpEndpoint endpoint_;
  double timeout_seconds_;
};

}  // namespace s2t
