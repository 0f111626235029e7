#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "s2t/error.hpp"
#include "s2t/graph_encoder.hpp"
#include "s2t/token_vocab.hpp"
#include "synthetic.hpp"

namespace s2t {
namespace {

constexpr std::size_t kVocab = 16;

TEST(GraphEncoder, LayerMatchesDenseFormula) {
  Rng rng(3);
  const auto params = init_params(kVocab, 5, 8);
  for (int trial = 0; trial < 200; ++trial) {
    const AstGraph g = testdata::random_tree(rng, 6, kVocab);
    Matrix h(static_cast<Eigen::Index>(g.size()), 8);
    for (Eigen::Index r = 0; r < h.rows(); ++r) h.row(r) = params.token_embedding.row(g.node_tokens[r]);
    const Matrix sparse = gcn_layer(h, g, params.gcn_weights[0]);
    const Eigen::MatrixXd dense = testdata::dense_gcn_layer(g, h, params.gcn_weights[0]);
    ASSERT_LE((sparse - dense).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(GraphEncoder, EncodeMatchesDenseForwardPass) {
  Rng rng(17);
  const auto params = init_params(kVocab, 42);
  for (int trial = 0; trial < 200; ++trial) {
    const AstGraph g = testdata::random_tree(rng, 6, kVocab);
    const EmbeddingVector e = encode(g, params);
    const Eigen::Vector2d d = testdata::dense_encode(g, params);
    ASSERT_NEAR(e[0], d(0), 1e-9);
    ASSERT_NEAR(e[1], d(1), 1e-9);
  }
}

TEST(GraphEncoder, PermutationInvarianceIsExact) {
  Rng rng(99);
  const auto params = init_params(kVocab, 42);
  for (int trial = 0; trial < 100; ++trial) {
    const AstGraph g = testdata::random_tree(rng, 24, kVocab);
    const auto perm = testdata::random_permutation(rng, g.size());
    EXPECT_EQ(encode(testdata::permute_graph(g, perm), params), encode(g, params));
  }
}

TEST(GraphEncoder, DeterministicAcrossParameterRebuilds) {
  const AstGraph raw = parse_sql("SELECT name FROM singer WHERE age > 30");
  const auto vocab = TokenVocab::build(std::vector{raw});
  const auto g = tokenize(raw, vocab);
  const EmbeddingVector a = encode(g, init_params(vocab.size(), 42));
  const EmbeddingVector b = encode(g, params_from_json(params_to_json(init_params(vocab.size(), 42), vocab), vocab));
  EXPECT_EQ(a, b);
  EXPECT_NE(a, encode(g, init_params(vocab.size(), 43)));
}

TEST(GraphEncoder, InitialisationBounds) {
  const auto p = init_params(10, 1);
  EXPECT_EQ(p.embedding_dim(), kDefaultEmbeddingDim);
  EXPECT_EQ(p.gcn_weights.size(), kGcnLayerCount);
  EXPECT_LE(p.token_embedding.cwiseAbs().maxCoeff(), 1.0);
  for (const auto& w : p.gcn_weights) EXPECT_LE(w.cwiseAbs().maxCoeff(), 0.1);
  EXPECT_LE(p.output_projection.cwiseAbs().maxCoeff(), 0.1);
}

TEST(GraphEncoder, OutputsAreFinite) {
  Rng rng(5);
  const auto params = init_params(64, 8);
  for (int i = 0; i < 200; ++i) {
    const auto e = encode(testdata::random_tree(rng, 80, 64), params);
    EXPECT_TRUE(std::isfinite(e[0]) && std::isfinite(e[1]));
  }
}

TEST(GraphEncoder, ThreadedBatchMatchesSerial) {
  Rng rng(8);
  const auto params = init_params(kVocab, 42);
  std::vector<AstGraph> graphs;
  for (int i = 0; i < 300; ++i) graphs.push_back(testdata::random_tree(rng, 30, kVocab));
  const auto batch = encode_all(graphs, params, 4);
  for (std::size_t i = 0; i < graphs.size(); ++i) EXPECT_EQ(batch[i], encode(graphs[i], params));
}

TEST(GraphEncoder, RejectsBadInput) {
  const auto params = init_params(4, 1, 8);
  AstGraph untokenized = parse_sql("SELECT a FROM t");
  EXPECT_THROW(encode(untokenized, params), TokenOutOfRange);
  untokenized.node_tokens.assign(untokenized.size(), 9);
  EXPECT_THROW(encode(untokenized, params), TokenOutOfRange);
  EXPECT_THROW(encode(AstGraph{}, params), DimensionMismatch);
  EXPECT_THROW(gcn_layer(Matrix::Zero(2, 8), parse_sql("SELECT a FROM t"), params.gcn_weights[0]), DimensionMismatch);
  EXPECT_THROW(gcn_layer(Matrix::Zero(4, 5), parse_sql("SELECT a FROM t"), params.gcn_weights[0]), DimensionMismatch);
  EXPECT_THROW(init_params(0, 1), DimensionMismatch);
}

TEST(GraphEncoder, RejectsMismatchedVocabulary) {
  const auto v1 = TokenVocab::from_labels({"a", "b"});
  const auto v2 = TokenVocab::from_labels({"a", "c"});
  const auto j = params_to_json(init_params(v1.size(), 3), v1);
  EXPECT_THROW(params_from_json(j, v2), Error);
}

}  // namespace
}  // namespace s2t
