#include <benchmark/benchmark.h>

#include "s2t/metrics.hpp"
#include "s2t/rng.hpp"
#include "synthetic.hpp"

namespace {

void BM_Bleu4(benchmark::State& state) {
  s2t::Rng rng(9);
  std::vector<std::string> candidates;
  std::vector<std::vector<std::string>> refs;
  for (int i = 0; i < 128; ++i) {
    candidates.push_back(s2t::testdata::random_sentence(rng, 6, 18));
    refs.push_back({s2t::testdata::random_sentence(rng, 6, 18), s2t::testdata::random_sentence(rng, 6, 18),
                    s2t::testdata::random_sentence(rng, 6, 18)});
  }
  std::size_t i = 0;
  for (auto _ : state) {
    const std::size_t k = i++ % candidates.size();
    benchmark::DoNotOptimize(s2t::bleu4(candidates[k], refs[k]));
  }
}
BENCHMARK(BM_Bleu4);

void BM_PairedTTest(benchmark::State& state) {
  s2t::Rng rng(10);
  std::vector<double> a(static_cast<std::size_t>(state.range(0)));
  std::vector<double> b(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = rng.uniform01();
    b[i] = rng.uniform01();
  }
  for (auto _ : state) benchmark::DoNotOptimize(s2t::paired_t_test(a, b));
}
BENCHMARK(BM_PairedTTest)->Arg(290)->Arg(1000);

}  // namespace
