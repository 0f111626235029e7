#include <benchmark/benchmark.h>

#include "s2t/bm25.hpp"
#include "s2t/demo_selection.hpp"
#include "s2t/kmeans.hpp"
#include "s2t/rng.hpp"
#include "synthetic.hpp"

namespace {

void BM_KMeans(benchmark::State& state) {
  s2t::Rng rng(5);
  const auto points = s2t::testdata::random_points(rng, 2159);
  const auto k = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(s2t::kmeans(points, s2t::KMeansOptions{.k = k, .seed = 1}));
}
BENCHMARK(BM_KMeans)->Arg(5)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_AstIclTop(benchmark::State& state) {
  s2t::Rng rng(6);
  const auto pool = s2t::testdata::random_pool(rng, 2159);
  const auto queries = s2t::testdata::random_points(rng, 64);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(s2t::select_ast_icl_top(queries[i++ % queries.size()], pool, 8));
  }
}
BENCHMARK(BM_AstIclTop);

void BM_Bm25Score(benchmark::State& state) {
  const auto records = s2t::testdata::synthetic_records({.count = 2159, .seed = 8});
  std::vector<std::string> docs;
  for (const auto& r : records) docs.push_back(r.sql);
  const auto index = s2t::Bm25Index::build(docs);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(index.score_all(docs[i++ % docs.size()]));
}
BENCHMARK(BM_Bm25Score)->Unit(benchmark::kMicrosecond);

}  // namespace
