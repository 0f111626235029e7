#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "s2t/sql_ast.hpp"
#include "s2t/token_vocab.hpp"

namespace s2t {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr std::size_t kDefaultEmbeddingDim = 100;
inline constexpr std::size_t kGcnLayerCount = 2;
inline constexpr std::size_t kOutputDim = 2;

// Pooled and projected query embedding.
struct EmbeddingVector {
  std::array<double, kOutputDim> values{};

  double operator[](std::size_t i) const { return values[i]; }
  bool operator==(const EmbeddingVector&) const = default;
};

double euclidean_distance(const EmbeddingVector& a, const EmbeddingVector& b);

// Token embedding table, GCN weights and output projection. Everything is
// regenerated from (vocab_size, seed, embedding_dim).
struct EncoderParams {
  Matrix token_embedding;            // vocab_size x d
  std::vector<Matrix> gcn_weights;   // layer count entries, d x d
  Matrix output_projection;          // d x kOutputDim
  Eigen::RowVectorXd output_bias;    // kOutputDim
  std::uint64_t seed = 0;

  std::size_t vocab_size() const { return static_cast<std::size_t>(token_embedding.rows()); }
  std::size_t embedding_dim() const { return static_cast<std::size_t>(token_embedding.cols()); }
};

// Uniform initialisation in [-1/sqrt(fan_in), 1/sqrt(fan_in)]. The embedding
// table is a lookup of a one-hot input, so its fan-in is 1. Draw order:
// embedding rows, W(0), W(1), projection, bias; all row-major.
EncoderParams init_params(std::size_t vocab_size, std::uint64_t seed,
                          std::size_t embedding_dim = kDefaultEmbeddingDim);

// One propagation step over the parse tree. Implementations must be pure.
class Aggregator {
 public:
  virtual ~Aggregator() = default;
  virtual std::string name() const = 0;
  virtual Matrix propagate(const Matrix& features, const AstGraph& graph,
                           const Matrix& weight) const = 0;
};

// Symmetric-normalised graph convolution with self loops:
//   h_i' = ReLU( sum_{j in N(i)} 1/sqrt(d_i d_j) * W h_j )
// N(i) holds the in-neighbours of i (its parent in the tree) plus i itself,
// and d_i = |N(i)|. Contributions are summed in ascending source index.
class GcnAggregator final : public Aggregator {
 public:
  std::string name() const override { return "gcn"; }
  Matrix propagate(const Matrix& features, const AstGraph& graph,
                   const Matrix& weight) const override;
};

// Throws DimensionMismatch if features.cols() != weight.cols() or the row count
// differs from the node count.
Matrix gcn_layer(const Matrix& features, const AstGraph& graph, const Matrix& weight);

// Global mean pool. Rows are summed in lexicographic order of their values so
// the result is bitwise independent of node numbering.
Eigen::RowVectorXd mean_pool(const Matrix& node_features);

// Embedding lookup -> GCN layers -> mean pool -> linear projection.
// Throws TokenOutOfRange when the graph is untokenised or a token id falls
// outside the embedding table.
EmbeddingVector encode(const AstGraph& graph, const EncoderParams& params,
                       const Aggregator& aggregator = GcnAggregator{});

// Encodes many graphs, fanning out over worker threads. Output order matches
// input order. threads == 0 picks the hardware concurrency.
std::vector<EmbeddingVector> encode_all(std::span<const AstGraph> graphs,
                                        const EncoderParams& params, std::size_t threads = 0);

// Parameter file: enough to regenerate the weights, plus the vocabulary hash
// it was built against.
nlohmann::ordered_json params_to_json(const EncoderParams& params, const TokenVocab& vocab);

// Regenerates parameters and checks them against the recorded vocabulary.
EncoderParams params_from_json(const nlohmann::json& j, const TokenVocab& vocab);

// Identifies a (seed, vocab, dims) combination.
std::string params_fingerprint(const EncoderParams& params, const TokenVocab& vocab);

}  // namespace s2t
