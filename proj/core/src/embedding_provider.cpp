#include "s2t/embedding_provider.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "s2t/error.hpp"
#include "s2t/hash.hpp"
#include "s2t/metrics.hpp"

namespace s2t {

Embedding HashingEmbeddingProvider::embed(std::string_view text) {
  Embedding v(dim_, 0.0);
  const auto tokens = bleu_tokenize(text);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    v[fnv1a64(tokens[i]) % dim_] += 1.0;
    if (i + 1 < tokens.size()) v[fnv1a64(tokens[i] + " " + tokens[i + 1]) % dim_] += 0.5;
  }
  double norm = 0.0;
  for (const double x : v) norm += x * x;
  if (norm > 0.0) {
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
  }
  return v;
}

HttpEmbeddingProvider::HttpEmbeddingProvider(std::string base_url, std::string model,
                                             std::string api_key, double timeout_seconds)
    : endpoint_(HttpEndpoint::parse(base_url)),
      model_(std::move(model)),
      api_key_(std::move(api_key)),
      timeout_seconds_(timeout_seconds) {}

Embedding HttpEmbeddingProvider::embed(std::string_view text) {
  const nlohmann::json body = {{"model", model_}, {"input", std::string(text)}};
  HttpHeaders headers;
  if (!api_key_.empty()) headers.emplace_back("Authorization", "Bearer " + api_key_);
  HttpResponse res;
  try {
    res = http_post_json(endpoint_, "/embeddings", body.dump(), headers, timeout_seconds_);
  } catch (const TransportError& e) {
    throw ProviderUnavailable(e.what());
  }
  if (res.status != 200) throw ProviderUnavailable("embeddings endpoint returned HTTP " + std::to_string(res.status));
  const auto j = nlohmann::json::parse(res.body, nullptr, false);
  if (j.is_discarded() || !j.contains("data") || !j["data"].is_array() || j["data"].empty() ||
      !j["data"][0].contains("embedding")) {
    throw ProviderUnavailable("embeddings response has no data[0].embedding");
  }
  return j["data"][0]["embedding"].get<Embedding>();
}

std::shared_ptr<const Embedding> EmbeddingCache::get(std::string_view text) {
  const std::string key = text_hash(text);
  std::promise<std::shared_ptr<const Embedding>> promise;
  std::shared_future<std::shared_ptr<const Embedding>> pending;
  {
    std::lock_guard lock(mu_);
    if (const auto it = entries_.find(key); it != entries_.end()) {
      pending = it->second;
    } else {
      entries_.emplace(key, promise.get_future().share());
      ++calls_;
    }
  }
  if (pending.valid()) return pending.get();
  try {
    auto value = std::make_shared<const Embedding>(provider_->embed(text));
    promise.set_value(value);
    return value;
  } catch (...) {
    promise.set_exception(std::current_exception());
    std::lock_guard lock(mu_);
    entries_.erase(key);
    throw;
  }
}

std::size_t EmbeddingCache::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

std::size_t EmbeddingCache::provider_calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

std::optional<double> embed_similarity(std::string_view candidate,
                                       std::span<const std::string> references,
                                       EmbeddingCache& cache) {
  if (references.empty()) throw EmptyReferences();
  if (bleu_tokenize(candidate).empty()) throw EmptyCandidate();
  try {
    const auto c = cache.get(candidate);
    double best = 0.0;
    for (const auto& r : references) {
      const auto e = cache.get(r);
      best = std::max(best, cosine_similarity(*c, *e));
    }
    return std::clamp(best, 0.0, 1.0);
  } catch (const ProviderUnavailable&) {
    return std::nullopt;
  }
}

HttpAlignScorer::HttpAlignScorer(std::string base_url, double timeout_seconds)
    : endpoint_(HttpEndpoint::parse(base_url)), timeout_seconds_(timeout_seconds) {}

std::optional<double> HttpAlignScorer::score(std::string_view context, std::string_view claim) const {
  const nlohmann::json body = {{"contexts", nlohmann::json::array({std::string(context)})},
                               {"claims", nlohmann::json::array({std::string(claim)})}};
  try {
    const auto res = http_post_json(endpoint_, "/score", body.dump(), {}, timeout_seconds_);
    if (res.status != 200) return std::nullopt;
    const auto j = nlohmann::json::parse(res.body, nullptr, false);
    if (j.is_discarded() || !j.contains("scores") || !j["scores"].is_array() || j["scores"].empty() ||
        !j["scores"][0].is_number()) {
      return std::nullopt;
    }
    return std::clamp(j["scores"][0].get<double>(), 0.0, 1.0);
  } catch (const TransportError&) {
    return std::nullopt;
  }
}

}  // namespace s2t
