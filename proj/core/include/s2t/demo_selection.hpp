#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "s2t/bm25.hpp"
#include "s2t/graph_encoder.hpp"
#include "s2t/kmeans.hpp"
#include "s2t/record.hpp"

namespace s2t {

enum class Strategy { ZeroShot, Random, Bm25, AstIcl, AstIclTop };

std::string_view strategy_name(Strategy strategy);
std::optional<Strategy> parse_strategy(std::string_view name);

// Demonstration pool M: records with a reference utterance, their query
// embeddings and BM25 statistics over the SQL text.
struct DemoPool {
  std::vector<QueryRecord> records;
  std::vector<EmbeddingVector> embeddings;
  Bm25Index bm25;

  // Throws DimensionMismatch when the sizes differ and SchemaError when a
  // record has no reference utterance.
  static DemoPool build(std::vector<QueryRecord> records, std::vector<EmbeddingVector> embeddings,
                        Bm25Params bm25_params = {});

  std::size_t size() const noexcept { return records.size(); }
  std::optional<std::size_t> index_of(std::string_view id) const;
};

struct SelectionIndex {
  std::vector<EmbeddingVector> centroids;
  std::vector<std::size_t> assignments;
  std::size_t k = 0;
  std::uint64_t rng_seed = 0;
  std::string params_hash;
  double inertia = 0.0;

  nlohmann::ordered_json to_json() const;
  // Throws Error on a wrong format tag, version or inconsistent content.
  static SelectionIndex from_json(const nlohmann::json& j);
};

struct IndexOptions {
  std::size_t k = 20;
  std::uint64_t seed = 0;
  std::size_t max_iters = 300;
  double tol = 1e-10;
  std::size_t n_init = 4;
};

// Clusters the pool embeddings. Throws PoolTooSmall when |pool| < k.
SelectionIndex build_index(const DemoPool& pool, const IndexOptions& options,
                           std::string params_hash = {});

double silhouette(const DemoPool& pool, const SelectionIndex& index);

struct KScore {
  std::size_t k;
  double silhouette;
};

struct TuneKResult {
  std::vector<KScore> scores;
  std::size_t best_k = 0;
};

// Sweeps k over [k_min, min(k_max, |pool| - 1)] and keeps the highest
// silhouette; ties go to the smaller k.
TuneKResult tune_k(const DemoPool& pool, std::size_t k_min, std::size_t k_max,
                   const IndexOptions& options);

struct Demo {
  std::size_t pool_index = 0;
  std::string id;
  std::string sql;
  std::string utterance;
  // Euclidean distance to the test embedding for AST strategies, BM25 score
  // for BM25, absent for random.
  std::optional<double> score;

  bool operator==(const Demo&) const = default;
};

// Demonstrations in rank order: the most relevant first for the similarity
// strategies, sampling order for the random ones.
struct SelectedDemos {
  Strategy strategy = Strategy::ZeroShot;
  std::vector<Demo> demos;

  bool operator==(const SelectedDemos&) const = default;
};

// Picks the cluster whose centroid is nearest the test embedding and samples n
// distinct members with a seeded RNG. Undersized clusters are topped up from
// the next-nearest clusters, again by sampling. Returns fewer than n demos
// only when the whole pool is exhausted. Throws EmptyPool.
SelectedDemos select_ast_icl(const EmbeddingVector& test, const SelectionIndex& index,
                             const DemoPool& pool, std::size_t n, std::uint64_t rng_seed,
                             std::optional<std::string_view> exclude_id = std::nullopt);

// Full scan: the n records nearest the test embedding, ordered by
// (distance, pool index). Throws PoolTooSmall.
SelectedDemos select_ast_icl_top(const EmbeddingVector& test, const DemoPool& pool, std::size_t n,
                                 std::optional<std::string_view> exclude_id = std::nullopt);

// Uniform sample without replacement. Throws PoolTooSmall.
SelectedDemos select_random(const DemoPool& pool, std::size_t n, std::uint64_t rng_seed,
                            std::optional<std::string_view> exclude_id = std::nullopt);

// Top n by (BM25 score desc, pool index asc) over the pool's SQL text.
// Throws PoolTooSmall.
SelectedDemos select_bm25(std::string_view test_sql, const DemoPool& pool, std::size_t n,
                          std::optional<std::string_view> exclude_id = std::nullopt);

enum class DemoOrder { SimilarLast, SimilarFirst, Random };

std::string_view demo_order_name(DemoOrder order);
std::optional<DemoOrder> parse_demo_order(std::string_view name);

// Arranges selected demos for the prompt. SimilarLast places the best-ranked
// demo next to the seed query.
std::vector<Demo> order_for_prompt(const SelectedDemos& selected, DemoOrder order,
                                   std::uint64_t seed = 0);

}  // namespace s2t
