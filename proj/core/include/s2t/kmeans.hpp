#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "s2t/graph_encoder.hpp"

namespace s2t {

struct KMeansOptions {
  std::size_t k = 20;
  std::uint64_t seed = 0;
  std::size_t max_iters = 300;
  double tol = 1e-10;
  // Independent k-means++ restarts; the lowest final inertia wins.
  std::size_t n_init = 4;
};

struct KMeansResult {
  std::vector<EmbeddingVector> centroids;
  std::vector<std::size_t> assignments;
  double inertia = 0.0;
  // Inertia after every assignment step of the winning restart.
  std::vector<double> inertia_history;
  std::size_t iterations = 0;
};

// Seeded k-means++ initialisation followed by Lloyd iterations until the
// largest centroid shift drops below tol or max_iters is reached. A cluster
// that empties is reseeded at the point farthest from its centroid. The
// returned assignments are nearest-centroid for the returned centroids.
// Throws PoolTooSmall when points.size() < k.
KMeansResult kmeans(std::span<const EmbeddingVector> points, const KMeansOptions& options);

// Nearest centroid per point; ties go to the lower centroid index.
std::vector<std::size_t> assign_nearest(std::span<const EmbeddingVector> points,
                                        std::span<const EmbeddingVector> centroids);

double inertia(std::span<const EmbeddingVector> points, std::span<const EmbeddingVector> centroids,
               std::span<const std::size_t> assignments);

// Mean silhouette over all points. Points in singleton clusters, and points
// with a == b == 0, contribute 0. Throws DegenerateClustering when k < 2 or a
// cluster is empty.
double silhouette(std::span<const EmbeddingVector> points, std::span<const std::size_t> assignments,
                  std::size_t k);

}  // namespace s2t
