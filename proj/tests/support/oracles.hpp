#pragma once

// Straightforward re-derivations of library results, written from the
// formulas rather than from the library code.

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "s2t/graph_encoder.hpp"

namespace s2t::testdata {

// D^-1/2 (A + I) D^-1/2 with A[i][j] = 1 for an edge j -> i.
Eigen::MatrixXd normalized_adjacency(const AstGraph& graph);

// ReLU(Ahat H W^T) with dense matrices.
Eigen::MatrixXd dense_gcn_layer(const AstGraph& graph, const Eigen::MatrixXd& h, const Eigen::MatrixXd& w);

// Full forward pass with dense algebra and plain column means.
Eigen::Vector2d dense_encode(const AstGraph& graph, const EncoderParams& params);

// Okapi BM25 from the textbook formula over pre-tokenised documents.
double bm25_reference(const std::vector<std::vector<std::string>>& docs, const std::vector<std::string>& query,
                      std::size_t doc, double k1 = 1.2, double b = 0.75);

}  // namespace s2t::testdata
