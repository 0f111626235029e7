#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "s2t/metrics.hpp"
#include "s2t/sql_ast.hpp"

namespace s2t {

struct SampleScore {
  std::string id;
  std::string generation_id;  // request id of the scored generation
  std::optional<QueryType> query_type;
  double bleu = 0.0;
  std::optional<double> embed_sim;
  std::optional<double> align;
};

struct MetricMeans {
  std::size_t count = 0;
  double bleu = 0.0;
  std::optional<double> embed_sim;  // over samples where it is present
  std::optional<double> align;
};

MetricMeans compute_means(std::span<const SampleScore> samples);

struct Significance {
  std::string baseline;  // method label
  std::string metric;    // bleu, embed_sim, align
  TTestResult test;
  bool marker = false;   // significant and better than the baseline
};

// One row of the results table: a strategy at a demo count.
struct MethodScores {
  std::string strategy;
  std::size_t n_demos = 0;
  std::vector<SampleScore> samples;
  MetricMeans overall;
  std::map<QueryType, MetricMeans> by_type;
  std::vector<Significance> significance;

  std::string label() const;  // e.g. "ast_icl_top-2"
};

struct ScoreReport {
  std::string dataset;
  std::string bleu_mode = "sentence-level BLEU-4, averaged over samples";
  std::string reference_mode = "multi";
  double alpha = 0.05;
  std::vector<MethodScores> methods;
};

// Fills means and per-type means, then tests every method against the random
// and bm25 rows with the same demo count (paired by sample id).
void finalize_report(ScoreReport& report);

nlohmann::ordered_json report_to_json(const ScoreReport& report);

// Methods x metrics text table. A dagger marks a significant gain over random
// and a double dagger over bm25 at the same demo count.
std::string render_table(const ScoreReport& report);

}  // namespace s2t
