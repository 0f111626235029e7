#include <benchmark/benchmark.h>

#include "s2t/graph_encoder.hpp"
#include "s2t/rng.hpp"
#include "synthetic.hpp"

namespace {

constexpr std::size_t kVocab = 256;

void BM_EncodeTree(benchmark::State& state) {
  s2t::Rng rng(1);
  const auto params = s2t::init_params(kVocab, 42);
  std::vector<s2t::AstGraph> graphs;
  for (int i = 0; i < 64; ++i) {
    graphs.push_back(s2t::testdata::random_tree(rng, static_cast<std::size_t>(state.range(0)), kVocab));
  }
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(s2t::encode(graphs[i++ % graphs.size()], params));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_EncodeTree)->Arg(8)->Arg(32)->Arg(128);

void BM_EncodeAll(benchmark::State& state) {
  s2t::Rng rng(2);
  const auto params = s2t::init_params(kVocab, 42);
  std::vector<s2t::AstGraph> graphs;
  for (int i = 0; i < 2159; ++i) graphs.push_back(s2t::testdata::random_tree(rng, 40, kVocab));
  for (auto _ : state) {
    benchmark::DoNotOptimize(s2t::encode_all(graphs, params, static_cast<std::size_t>(state.range(0))));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(graphs.size()));
}
BENCHMARK(BM_EncodeAll)->Arg(1)->Arg(4)->UseRealTime()->Unit(benchmark::kMillisecond);

}  // namespace
