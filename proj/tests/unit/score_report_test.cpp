#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "s2t/experiment.hpp"
#include "s2t/score_report.hpp"

namespace s2t {
namespace {

MethodScores method(std::string strategy, std::size_t n, std::span<const double> bleu) {
  MethodScores m;
  m.strategy = std::move(strategy);
  m.n_demos = n;
  for (std::size_t i = 0; i < bleu.size(); ++i) {
    SampleScore s;
    s.id = "q" + std::to_string(i);
    s.generation_id = m.strategy + "/" + s.id;
    s.query_type = static_cast<QueryType>(i % 3);
    s.bleu = bleu[i];
    m.samples.push_back(s);
  }
  return m;
}

const Significance* find_sig(const MethodScores& m, const std::string& baseline) {
  for (const auto& s : m.significance) {
    if (s.baseline == baseline && s.metric == "bleu") return &s;
  }
  return nullptr;
}

TEST(ScoreReport, MarkersFollowTheOfflineOracle) {
  ScoreReport report;
  report.methods.push_back(method("random", 2, testdata::kScoresB));
  report.methods.push_back(method("bm25", 2, testdata::kScoresC));
  report.methods.push_back(method("ast_icl_top", 2, testdata::kScoresA));
  finalize_report(report);
  const auto& top = report.methods[2];
  const auto* vs_random = find_sig(top, "random-2");
  const auto* vs_bm25 = find_sig(top, "bm25-2");
  ASSERT_TRUE(vs_random && vs_bm25);
  EXPECT_NEAR(vs_random->test.t, testdata::kTAB, 1e-9);
  EXPECT_NEAR(vs_random->test.p, testdata::kPAB, 1e-9);
  EXPECT_TRUE(vs_random->marker);
  EXPECT_NEAR(vs_bm25->test.p, testdata::kPAC, 1e-9);
  EXPECT_FALSE(vs_bm25->marker);
  // bm25 is worse than ast_icl_top but the baseline is only ever random/bm25.
  EXPECT_EQ(find_sig(report.methods[0], "random-2"), nullptr);

  const std::string table = render_table(report);
  EXPECT_NE(table.find("ast_icl_top  2  0.3130†\n"), std::string::npos) << table;
  EXPECT_EQ(table.find("‡\n"), std::string::npos);
}

TEST(ScoreReport, LossesGetNoMarker) {
  ScoreReport report;
  report.methods.push_back(method("random", 4, testdata::kScoresA));
  report.methods.push_back(method("ast_icl", 4, testdata::kScoresB));
  finalize_report(report);
  const auto* s = find_sig(report.methods[1], "random-4");
  ASSERT_NE(s, nullptr);
  EXPECT_TRUE(s->test.significant);
  EXPECT_FALSE(s->marker);
}

TEST(ScoreReport, IdenticalOutputsHaveNoMarkers) {
  ScoreReport report;
  report.methods.push_back(method("random", 2, testdata::kScoresA));
  report.methods.push_back(method("ast_icl_top", 2, testdata::kScoresA));
  finalize_report(report);
  const auto* s = find_sig(report.methods[1], "random-2");
  ASSERT_NE(s, nullptr);
  EXPECT_EQ(s->test.p, 1.0);
  EXPECT_FALSE(s->marker);
  EXPECT_EQ(render_table(report).find("†\n"), std::string::npos);
}

TEST(ScoreReport, MeansAndJsonRoundTrip) {
  ScoreReport report;
  report.dataset = "toy";
  report.methods.push_back(method("random", 2, testdata::kScoresB));
  report.methods.push_back(method("ast_icl_top", 2, testdata::kScoresA));
  report.methods[1].samples[0].embed_sim = 0.5;
  finalize_report(report);
  double sum = 0.0;
  for (const double x : testdata::kScoresA) sum += x;
  EXPECT_NEAR(report.methods[1].overall.bleu, sum / 10.0, 1e-12);
  EXPECT_EQ(report.methods[1].overall.embed_sim, 0.5);
  EXPECT_EQ(report.methods[1].by_type.at(QueryType::Simple).count, 4u);

  const auto j = report_to_json(report);
  const ScoreReport back = report_from_json(j);
  ASSERT_EQ(back.methods.size(), 2u);
  EXPECT_EQ(report_to_json(back).dump(), j.dump());
  EXPECT_EQ(render_table(back), render_table(report));
}

TEST(ScoreReport, InfiniteStatisticSerialises) {
  const std::array<double, 3> lo = {0.25, 0.5, 0.75};
  const std::array<double, 3> hi = {0.5, 0.75, 1.0};
  ScoreReport report;
  report.methods.push_back(method("random", 2, lo));
  report.methods.push_back(method("ast_icl_top", 2, hi));
  finalize_report(report);
  const auto j = report_to_json(report);
  EXPECT_EQ(j["methods"][1]["significance"][0]["t"], "inf");
  EXPECT_EQ(report_to_json(report_from_json(j)).dump(), j.dump());
}

}  // namespace
}  // namespace s2t
