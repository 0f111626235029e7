#include "s2t/demo_selection.hpp"

#include <algorithm>
#include <numeric>

#include "s2t/error.hpp"
#include "s2t/rng.hpp"

namespace s2t {
namespace {

constexpr int kIndexFormatVersion = 1;

std::vector<std::size_t> available_indices(const DemoPool& pool,
                                           std::optional<std::string_view> exclude_id) {
  std::vector<std::size_t> out;
  out.reserve(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (exclude_id && pool.records[i].id == *exclude_id) continue;
    out.push_back(i);
  }
  return out;
}

Demo make_demo(const DemoPool& pool, std::size_t i, std::optional<double> score) {
  const auto& r = pool.records[i];
  return Demo{i, r.id, r.sql, primary_reference(r).value_or(""), score};
}

// Moves `count` uniformly chosen elements of `items` to its front (partial
// Fisher-Yates) and returns them in draw order.
std::vector<std::size_t> sample_without_replacement(std::vector<std::size_t> items,
                                                    std::size_t count, Rng& rng) {
  count = std::min(count, items.size());
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + rng.uniform_index(items.size() - i);
    std::swap(items[i], items[j]);
  }
  items.resize(count);
  return items;
}

}  // namespace

std::string_view strategy_name(Strategy strategy) {
  switch (strategy) {
    case Strategy::ZeroShot:
      return "zero_shot";
    case Strategy::Random:
      return "random";
    case Strategy::Bm25:
      return "bm25";
    case Strategy::AstIcl:
      return "ast_icl";
    case Strategy::AstIclTop:
      return "ast_icl_top";
  }
  return "zero_shot";
}

std::optional<Strategy> parse_strategy(std::string_view name) {
  for (auto s : {Strategy::ZeroShot, Strategy::Random, Strategy::Bm25, Strategy::AstIcl,
                 Strategy::AstIclTop}) {
    if (strategy_name(s) == name) return s;
  }
  return std::nullopt;
}

DemoPool DemoPool::build(std::vector<QueryRecord> records, std::vector<EmbeddingVector> embeddings,
                         Bm25Params bm25_params) {
  if (records.size() != embeddings.size()) {
    throw DimensionMismatch("pool has " + std::to_string(records.size()) + " records but " +
                            std::to_string(embeddings.size()) + " embeddings");
  }
  std::vector<std::string> docs;
  docs.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!primary_reference(records[i])) {
      throw SchemaError(i + 1, "utterance", "pool record " + records[i].id + " has no reference");
    }
    docs.push_back(records[i].sql);
  }
  DemoPool pool;
  pool.bm25 = Bm25Index::build(docs, bm25_params);
  pool.records = std::move(records);
  pool.embeddings = std::move(embeddings);
  return pool;
}

std::optional<std::size_t> DemoPool::index_of(std::string_view id) const {
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].id == id) return i;
  }
  return std::nullopt;
}

nlohmann::ordered_json SelectionIndex::to_json() const {
  nlohmann::ordered_json j;
  j["format"] = "s2t-selection-index";
  j["version"] = kIndexFormatVersion;
  j["k"] = k;
  j["seed"] = rng_seed;
  j["params_hash"] = params_hash;
  j["inertia"] = inertia;
  auto& c = j["centroids"] = nlohmann::ordered_json::array();
  for (const auto& e : centroids) c.push_back({e[0], e[1]});
  j["assignments"] = assignments;
  return j;
}

SelectionIndex SelectionIndex::from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "s2t-selection-index") throw Error("not a selection index file");
  if (j.at("version").get<int>() != kIndexFormatVersion) {
    throw Error("unsupported selection index version");
  }
  SelectionIndex index;
  index.k = j.at("k").get<std::size_t>();
  index.rng_seed = j.at("seed").get<std::uint64_t>();
  index.params_hash = j.at("params_hash").get<std::string>();
  index.inertia = j.at("inertia").get<double>();
  for (const auto& c : j.at("centroids")) {
    index.centroids.push_back(EmbeddingVector{{c.at(0).get<double>(), c.at(1).get<double>()}});
  }
  index.assignments = j.at("assignments").get<std::vector<std::size_t>>();
  if (index.centroids.size() != index.k) throw Error("centroid count differs from k");
  for (auto a : index.assignments) {
    if (a >= index.k) throw Error("assignment outside [0, k)");
  }
  return index;
}

SelectionIndex build_index(const DemoPool& pool, const IndexOptions& options,
                           std::string params_hash) {
  if (pool.size() < options.k) throw PoolTooSmall(pool.size(), options.k);
  KMeansOptions km;
  km.k = options.k;
  km.seed = options.seed;
  km.max_iters = options.max_iters;
  km.tol = options.tol;
  km.n_init = options.n_init;
  auto result = kmeans(pool.embeddings, km);
  SelectionIndex index;
  index.centroids = std::move(result.centroids);
  index.assignments = std::move(result.assignments);
  index.k = options.k;
  index.rng_seed = options.seed;
  index.params_hash = std::move(params_hash);
  index.inertia = result.inertia;
  return index;
}

double silhouette(const DemoPool& pool, const SelectionIndex& index) {
  return silhouette(pool.embeddings, index.assignments, index.k);
}

TuneKResult tune_k(const DemoPool& pool, std::size_t k_min, std::size_t k_max,
                   const IndexOptions& options) {
  TuneKResult out;
  if (pool.size() < 3) throw PoolTooSmall(pool.size(), 3);
  k_min = std::max<std::size_t>(2, k_min);
  k_max = std::min(k_max, pool.size() - 1);
  double best = -2.0;
  for (std::size_t k = k_min; k <= k_max; ++k) {
    IndexOptions o = options;
    o.k = k;
    const auto index = build_index(pool, o);
    double score = -1.0;
    try {
      score = silhouette(pool, index);
    } catch (const DegenerateClustering&) {
      // Coincident points can leave a cluster empty; such k never wins.
    }
    out.scores.push_back({k, score});
    if (score > best) {
      best = score;
      out.best_k = k;
    }
  }
  return out;
}

SelectedDemos select_ast_icl(const EmbeddingVector& test, const SelectionIndex& index,
                             const DemoPool& pool, std::size_t n, std::uint64_t rng_seed,
                             std::optional<std::string_view> exclude_id) {
  if (pool.size() == 0) throw EmptyPool();
  if (index.assignments.size() != pool.size()) {
    throw DimensionMismatch("selection index does not match the pool");
  }
  SelectedDemos out{Strategy::AstIcl, {}};
  if (n == 0) return out;

  std::vector<std::size_t> cluster_order(index.centroids.size());
  std::iota(cluster_order.begin(), cluster_order.end(), std::size_t{0});
  std::vector<double> centroid_dist(index.centroids.size());
  for (std::size_t c = 0; c < index.centroids.size(); ++c) {
    centroid_dist[c] = euclidean_distance(test, index.centroids[c]);
  }
  std::stable_sort(cluster_order.begin(), cluster_order.end(),
                   [&](std::size_t a, std::size_t b) { return centroid_dist[a] < centroid_dist[b]; });

  std::vector<std::vector<std::size_t>> members(index.centroids.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (exclude_id && pool.records[i].id == *exclude_id) continue;
    members[index.assignments[i]].push_back(i);
  }

  Rng rng(rng_seed);
  for (const std::size_t c : cluster_order) {
    if (out.demos.size() >= n) break;
    const auto picked = sample_without_replacement(members[c], n - out.demos.size(), rng);
    for (const auto i : picked) {
      out.demos.push_back(make_demo(pool, i, euclidean_distance(test, pool.embeddings[i])));
    }
  }
  return out;
}

SelectedDemos select_ast_icl_top(const EmbeddingVector& test, const DemoPool& pool, std::size_t n,
                                 std::optional<std::string_view> exclude_id) {
  auto candidates = available_indices(pool, exclude_id);
  if (n > candidates.size()) throw PoolTooSmall(candidates.size(), n);
  std::vector<double> dist(pool.size());
  for (const auto i : candidates) dist[i] = euclidean_distance(test, pool.embeddings[i]);
  const auto less = [&](std::size_t a, std::size_t b) {
    return dist[a] < dist[b] || (dist[a] == dist[b] && a < b);
  };
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(n),
                    candidates.end(), less);
  SelectedDemos out{Strategy::AstIclTop, {}};
  for (std::size_t r = 0; r < n; ++r) {
    out.demos.push_back(make_demo(pool, candidates[r], dist[candidates[r]]));
  }
  return out;
}

SelectedDemos select_random(const DemoPool& pool, std::size_t n, std::uint64_t rng_seed,
                            std::optional<std::string_view> exclude_id) {
  auto candidates = available_indices(pool, exclude_id);
  if (n > candidates.size()) throw PoolTooSmall(candidates.size(), n);
  Rng rng(rng_seed);
  SelectedDemos out{Strategy::Random, {}};
  for (const auto i : sample_without_replacement(std::move(candidates), n, rng)) {
    out.demos.push_back(make_demo(pool, i, std::nullopt));
  }
  return out;
}

SelectedDemos select_bm25(std::string_view test_sql, const DemoPool& pool, std::size_t n,
                          std::optional<std::string_view> exclude_id) {
  auto candidates = available_indices(pool, exclude_id);
  if (n > candidates.size()) throw PoolTooSmall(candidates.size(), n);
  const auto scores = pool.bm25.score_all(test_sql);
  const auto better = [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b] || (scores[a] == scores[b] && a < b);
  };
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(n),
                    candidates.end(), better);
  SelectedDemos out{Strategy::Bm25, {}};
  for (std::size_t r = 0; r < n; ++r) {
    out.demos.push_back(make_demo(pool, candidates[r], scores[candidates[r]]));
  }
  return out;
}

std::string_view demo_order_name(DemoOrder order) {
  switch (order) {
    case DemoOrder::SimilarLast:
      return "similar_last";
    case DemoOrder::SimilarFirst:
      return "similar_first";
    case DemoOrder::Random:
      return "random";
  }
  return "similar_last";
}

std::optional<DemoOrder> parse_demo_order(std::string_view name) {
  for (auto o : {DemoOrder::SimilarLast, DemoOrder::SimilarFirst, DemoOrder::Random}) {
    if (demo_order_name(o) == name) return o;
  }
  return std::nullopt;
}

std::vector<Demo> order_for_prompt(const SelectedDemos& selected, DemoOrder order,
                                   std::uint64_t seed) {
  std::vector<Demo> demos = selected.demos;
  switch (order) {
    case DemoOrder::SimilarLast:
      std::reverse(demos.begin(), demos.end());
      break;
    case DemoOrder::SimilarFirst:
      break;
    case DemoOrder::Random: {
      Rng rng(seed);
      for (std::size_t i = demos.size(); i > 1; --i) {
        std::swap(demos[i - 1], demos[rng.uniform_index(i)]);
      }
      break;
    }
  }
  return demos;
}

}  // namespace s2t
