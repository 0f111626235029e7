#include <benchmark/benchmark.h>

#include "s2t/sql_ast.hpp"
#include "s2t/token_vocab.hpp"
#include "synthetic.hpp"

namespace {

const std::vector<s2t::QueryRecord>& corpus() {
  static const auto records = s2t::testdata::synthetic_records({.count = 512, .seed = 3});
  return records;
}

void BM_ParseSql(benchmark::State& state) {
  const auto& records = corpus();
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(s2t::parse_sql(records[i++ % records.size()].sql));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ParseSql);

void BM_ParseNested(benchmark::State& state) {
  const std::string sql =
      "SELECT T1.name FROM singer AS T1 JOIN concert AS T2 ON T1.singer_id = T2.singer_id "
      "WHERE T1.age > (SELECT avg(age) FROM singer) AND T2.year NOT IN (SELECT year FROM concert "
      "WHERE stadium_id = 3) GROUP BY T1.name HAVING count(*) > 1 ORDER BY T1.name LIMIT 5";
  for (auto _ : state) benchmark::DoNotOptimize(s2t::parse_sql(sql));
}
BENCHMARK(BM_ParseNested);

void BM_BuildVocab(benchmark::State& state) {
  std::vector<s2t::AstGraph> graphs;
  for (const auto& r : corpus()) graphs.push_back(s2t::parse_sql(r.sql));
  for (auto _ : state) benchmark::DoNotOptimize(s2t::TokenVocab::build(graphs));
}
BENCHMARK(BM_BuildVocab);

}  // namespace
