#include "s2t/kmeans.hpp"

#include <algorithm>
#include <limits>

#include "s2t/error.hpp"
#include "s2t/rng.hpp"

namespace s2t {
namespace {

double squared_distance(const EmbeddingVector& a, const EmbeddingVector& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  return dx * dx + dy * dy;
}

std::vector<EmbeddingVector> kmeanspp_init(std::span<const EmbeddingVector> points, std::size_t k,
                                           Rng& rng) {
  const std::size_t n = points.size();
  std::vector<EmbeddingVector> centers;
  centers.reserve(k);
  std::vector<bool> chosen(n, false);
  const std::size_t first = rng.uniform_index(n);
  centers.push_back(points[first]);
  chosen[first] = true;

  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(points[i], centers[0]);
  while (centers.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += d2[i];
    std::size_t pick = n;
    if (total > 0.0) {
      const double r = rng.uniform01() * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (d2[i] <= 0.0) continue;
        acc += d2[i];
        pick = i;
        if (acc > r) break;
      }
    }
    if (pick == n) {
      // Every point coincides with a center; take any unused point.
      std::vector<std::size_t> unused;
      for (std::size_t i = 0; i < n; ++i) {
        if (!chosen[i]) unused.push_back(i);
      }
      pick = unused[rng.uniform_index(unused.size())];
    }
    chosen[pick] = true;
    centers.push_back(points[pick]);
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(points[i], centers.back()));
    }
  }
  return centers;
}

KMeansResult lloyd(std::span<const EmbeddingVector> points, std::vector<EmbeddingVector> centroids,
                   const KMeansOptions& options) {
  const std::size_t n = points.size();
  const std::size_t k = centroids.size();
  KMeansResult result;
  result.assignments = assign_nearest(points, centroids);
  result.inertia_history.push_back(inertia(points, centroids, result.assignments));

  for (std::size_t iter = 1; iter <= options.max_iters; ++iter) {
    std::vector<EmbeddingVector> next(k);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = result.assignments[i];
      next[c].values[0] += points[i][0];
      next[c].values[1] += points[i][1];
      ++counts[c];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      next[c].values[0] /= static_cast<double>(counts[c]);
      next[c].values[1] /= static_cast<double>(counts[c]);
    }
    std::vector<bool> taken(n, false);
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      std::size_t far = n;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        const auto owner = result.assignments[i];
        if (taken[i] || counts[owner] < 2) continue;
        const double d = squared_distance(points[i], next[owner]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      if (far == n) {
        next[c] = centroids[c];
        continue;
      }
      taken[far] = true;
      --counts[result.assignments[far]];
      ++counts[c];
      next[c] = points[far];
    }

    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      shift = std::max(shift, euclidean_distance(centroids[c], next[c]));
    }
    centroids = std::move(next);
    result.assignments = assign_nearest(points, centroids);
    result.inertia_history.push_back(inertia(points, centroids, result.assignments));
    result.iterations = iter;
    if (shift < options.tol) break;
  }
  result.centroids = std::move(centroids);
  result.inertia = result.inertia_history.back();
  return result;
}

}  // namespace

std::vector<std::size_t> assign_nearest(std::span<const EmbeddingVector> points,
                                        std::span<const EmbeddingVector> centroids) {
  std::vector<std::size_t> out(points.size(), 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.size(); ++c) {
      const double d = squared_distance(points[i], centroids[c]);
      if (d < best) {
        best = d;
        out[i] = c;
      }
    }
  }
  return out;
}

double inertia(std::span<const EmbeddingVector> points, std::span<const EmbeddingVector> centroids,
               std::span<const std::size_t> assignments) {
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    total += squared_distance(points[i], centroids[assignments[i]]);
  }
  return total;
}

KMeansResult kmeans(std::span<const EmbeddingVector> points, const KMeansOptions& options) {
  if (options.k == 0) throw DegenerateClustering("k must be at least 1");
  if (points.size() < options.k) throw PoolTooSmall(points.size(), options.k);
  const std::size_t restarts = std::max<std::size_t>(1, options.n_init);
  KMeansResult best;
  bool have_best = false;
  for (std::size_t r = 0; r < restarts; ++r) {
    Rng rng(derive_seed(options.seed, r));
    auto run = lloyd(points, kmeanspp_init(points, options.k, rng), options);
    if (!have_best || run.inertia < best.inertia) {
      best = std::move(run);
      have_best = true;
    }
  }
  return best;
}

double silhouette(std::span<const EmbeddingVector> points, std::span<const std::size_t> assignments,
                  std::size_t k) {
  if (k < 2) throw DegenerateClustering("silhouette needs at least 2 clusters");
  if (assignments.size() != points.size()) {
    throw DimensionMismatch("assignment count differs from point count");
  }
  std::vector<std::size_t> sizes(k, 0);
  for (const auto a : assignments) {
    if (a >= k) throw DegenerateClustering("assignment outside [0, k)");
    ++sizes[a];
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (sizes[c] == 0) throw DegenerateClustering("cluster " + std::to_string(c) + " is empty");
  }
  const std::size_t n = points.size();
  double total = 0.0;
  std::vector<double> dist_sum(k);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t own = assignments[i];
    if (sizes[own] == 1) continue;
    std::fill(dist_sum.begin(), dist_sum.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) dist_sum[assignments[j]] += euclidean_distance(points[i], points[j]);
    }
    const double a = dist_sum[own] / static_cast<double>(sizes[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      if (c != own) b = std::min(b, dist_sum[c] / static_cast<double>(sizes[c]));
    }
    const double denom = std::max(a, b);
    if (denom > 0.0) total += (b - a) / denom;
  }
  return total / static_cast<double>(n);
}

}  // namespace s2t
