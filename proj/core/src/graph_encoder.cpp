#include "s2t/graph_encoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "s2t/error.hpp"
#include "s2t/hash.hpp"
#include "s2t/rng.hpp"

namespace s2t {
namespace {

void fill_uniform(Matrix& m, double bound, Rng& rng) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rng.uniform(-bound, bound);
  }
}

constexpr int kParamsFormatVersion = 1;

}  // namespace

double euclidean_distance(const EmbeddingVector& a, const EmbeddingVector& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  return std::sqrt(dx * dx + dy * dy);
}

EncoderParams init_params(std::size_t vocab_size, std::uint64_t seed, std::size_t embedding_dim) {
  if (vocab_size == 0) throw DimensionMismatch("vocabulary size must be at least 1");
  if (embedding_dim == 0) throw DimensionMismatch("embedding width must be at least 1");
  const auto d = static_cast<Eigen::Index>(embedding_dim);
  const double bound = 1.0 / std::sqrt(static_cast<double>(embedding_dim));
  Rng rng(seed);

  EncoderParams params;
  params.seed = seed;
  params.token_embedding.resize(static_cast<Eigen::Index>(vocab_size), d);
  fill_uniform(params.token_embedding, 1.0, rng);
  for (std::size_t l = 0; l < kGcnLayerCount; ++l) {
    Matrix w(d, d);
    fill_uniform(w, bound, rng);
    params.gcn_weights.push_back(std::move(w));
  }
  params.output_projection.resize(d, static_cast<Eigen::Index>(kOutputDim));
  fill_uniform(params.output_projection, bound, rng);
  params.output_bias.resize(static_cast<Eigen::Index>(kOutputDim));
  for (Eigen::Index i = 0; i < params.output_bias.size(); ++i) {
    params.output_bias(i) = rng.uniform(-bound, bound);
  }
  return params;
}

Matrix GcnAggregator::propagate(const Matrix& features, const AstGraph& graph,
                                const Matrix& weight) const {
  return gcn_layer(features, graph, weight);
}

Matrix gcn_layer(const Matrix& features, const AstGraph& graph, const Matrix& weight) {
  const auto n = static_cast<std::size_t>(features.rows());
  if (n != graph.size()) {
    throw DimensionMismatch("feature rows (" + std::to_string(n) + ") != node count (" +
                            std::to_string(graph.size()) + ")");
  }
  if (features.cols() != weight.cols()) {
    throw DimensionMismatch("feature width " + std::to_string(features.cols()) +
                            " != weight width " + std::to_string(weight.cols()));
  }

  // In-neighbour lists with the self loop, sorted by source index.
  std::vector<std::vector<std::size_t>> in_neighbors(n);
  for (std::size_t i = 0; i < n; ++i) in_neighbors[i].push_back(i);
  for (const auto& [src, dst] : graph.edges) {
    if (src >= n || dst >= n) throw DimensionMismatch("edge references a missing node");
    if (src != dst) in_neighbors[dst].push_back(src);
  }
  std::vector<double> inv_sqrt_degree(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& nb = in_neighbors[i];
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    inv_sqrt_degree[i] = 1.0 / std::sqrt(static_cast<double>(nb.size()));
  }

  Matrix aggregated = Matrix::Zero(features.rows(), features.cols());
  for (std::size_t i = 0; i < n; ++i) {
    for (const std::size_t j : in_neighbors[i]) {
      const double coeff = inv_sqrt_degree[i] * inv_sqrt_degree[j];
      aggregated.row(static_cast<Eigen::Index>(i)) +=
          coeff * features.row(static_cast<Eigen::Index>(j));
    }
  }
  // Explicit loops keep each row's arithmetic independent of its position in
  // the matrix; a blocked GEMM may take different paths for edge rows.
  Matrix out(features.rows(), weight.rows());
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    for (Eigen::Index r = 0; r < out.cols(); ++r) {
      double acc = 0.0;
      for (Eigen::Index k = 0; k < weight.cols(); ++k) acc += aggregated(i, k) * weight(r, k);
      out(i, r) = acc > 0.0 ? acc : 0.0;
    }
  }
  return out;
}

Eigen::RowVectorXd mean_pool(const Matrix& node_features) {
  const auto n = static_cast<std::size_t>(node_features.rows());
  Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(node_features.cols());
  if (n == 0) return sum;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto ra = node_features.row(static_cast<Eigen::Index>(a));
    const auto rb = node_features.row(static_cast<Eigen::Index>(b));
    return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
  });
  for (const std::size_t i : order) sum += node_features.row(static_cast<Eigen::Index>(i));
  return sum / static_cast<double>(n);
}

EmbeddingVector encode(const AstGraph& graph, const EncoderParams& params,
                       const Aggregator& aggregator) {
  const std::size_t n = graph.size();
  if (n == 0) throw DimensionMismatch("cannot encode an empty graph");
  if (graph.node_tokens.size() != n) throw TokenOutOfRange("graph has not been tokenized");

  Matrix h(static_cast<Eigen::Index>(n), params.token_embedding.cols());
  for (std::size_t i = 0; i < n; ++i) {
    const auto token = graph.node_tokens[i];
    if (token < 0 || static_cast<std::size_t>(token) >= params.vocab_size()) {
      throw TokenOutOfRange("token id " + std::to_string(token) + " outside embedding table of " +
                            std::to_string(params.vocab_size()));
    }
    h.row(static_cast<Eigen::Index>(i)) = params.token_embedding.row(token);
  }
  for (const auto& w : params.gcn_weights) h = aggregator.propagate(h, graph, w);

  const Eigen::RowVectorXd pooled = mean_pool(h);
  const auto& proj = params.output_projection;
  if (proj.cols() != static_cast<Eigen::Index>(kOutputDim) || proj.rows() != pooled.size() ||
      params.output_bias.size() != static_cast<Eigen::Index>(kOutputDim)) {
    throw DimensionMismatch("output projection must map " + std::to_string(pooled.size()) +
                            " features to " + std::to_string(kOutputDim) + " dimensions");
  }
  EmbeddingVector out;
  for (std::size_t c = 0; c < kOutputDim; ++c) {
    const auto col = static_cast<Eigen::Index>(c);
    double acc = 0.0;
    for (Eigen::Index k = 0; k < pooled.size(); ++k) acc += pooled(k) * proj(k, col);
    out.values[c] = acc + params.output_bias(col);
    if (!std::isfinite(out.values[c])) throw Error("encoder produced a non-finite embedding");
  }
  return out;
}

std::vector<EmbeddingVector> encode_all(std::span<const AstGraph> graphs,
                                        const EncoderParams& params, std::size_t threads) {
  std::vector<EmbeddingVector> out(graphs.size());
  if (threads == 0) threads = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(1, graphs.size() / 32));
  if (threads <= 1) {
    for (std::size_t i = 0; i < graphs.size(); ++i) out[i] = encode(graphs[i], params);
    return out;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < graphs.size(); i += threads) out[i] = encode(graphs[i], params);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

nlohmann::ordered_json params_to_json(const EncoderParams& params, const TokenVocab& vocab) {
  nlohmann::ordered_json j;
  j["format"] = "s2t-encoder-params";
  j["version"] = kParamsFormatVersion;
  j["seed"] = params.seed;
  j["vocab_size"] = params.vocab_size();
  j["vocab_hash"] = hex64(vocab.hash());
  j["embedding_dim"] = params.embedding_dim();
  j["gcn_layers"] = params.gcn_weights.size();
  j["output_dim"] = kOutputDim;
  j["aggregator"] = "gcn";
  j["init"] = "uniform(+-1/sqrt(fan_in)), mt19937_64";
  j["vocab"] = vocab.to_json();
  return j;
}

EncoderParams params_from_json(const nlohmann::json& j, const TokenVocab& vocab) {
  if (j.value("format", "") != "s2t-encoder-params") throw Error("not an encoder parameter file");
  if (j.at("version").get<int>() != kParamsFormatVersion) {
    throw Error("unsupported encoder parameter version");
  }
  if (j.at("vocab_hash").get<std::string>() != hex64(vocab.hash()) ||
      j.at("vocab_size").get<std::size_t>() != vocab.size()) {
    throw Error("encoder parameters were built against a different vocabulary");
  }
  if (j.at("gcn_layers").get<std::size_t>() != kGcnLayerCount ||
      j.at("output_dim").get<std::size_t>() != kOutputDim) {
    throw DimensionMismatch("unsupported encoder layout");
  }
  return init_params(vocab.size(), j.at("seed").get<std::uint64_t>(),
                     j.at("embedding_dim").get<std::size_t>());
}

std::string params_fingerprint(const EncoderParams& params, const TokenVocab& vocab) {
  const std::string key = std::to_string(params.seed) + "/" + hex64(vocab.hash()) + "/" +
                          std::to_string(params.embedding_dim()) + "/" +
                          std::to_string(params.gcn_weights.size()) + "/" +
                          std::to_string(kOutputDim);
  return text_hash(key);
}

}  // namespace s2t
