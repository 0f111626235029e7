#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace s2t {

// Lower-cases, puts spaces around ASCII punctuation, splits on whitespace.
std::vector<std::string> bleu_tokenize(std::string_view text);

// Sentence-level BLEU-4 with clipped n-gram counts against the max over
// references and brevity penalty from the closest reference length.
//
// Smoothing: a zero p_n (n >= 2) becomes 1 / (2c). A zero unigram precision
// scores 0 outright, since nothing in the candidate matches. Candidates shorter
// than four tokens use the orders they actually have, so bleu4(x, {x}) == 1 for
// any non-empty x. Throws EmptyCandidate, EmptyReferences.
double bleu4(std::string_view candidate, std::span<const std::string> references);

struct TTestResult {
  double t = 0.0;
  double p = 1.0;
  bool significant = false;
};

// Two-sided paired t-test on a - b. When every difference is equal the
// statistic is degenerate: zero mean gives t = 0, p = 1; otherwise t = +-inf,
// p = 0 and the result is significant. Throws LengthMismatch, TooFewSamples.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b,
                          double alpha = 0.05);

// Rows are items, columns categories, cells rater counts. Every row must sum
// to the same n >= 2 (RaggedMatrix otherwise). Returns 1 when all ratings fall
// in a single category.
double fleiss_kappa(const std::vector<std::vector<int>>& ratings);

double cosine_similarity(std::span<const double> a, std::span<const double> b);

// Returns nullopt when the score is unavailable (provider down, no scorer).
using PairScorer = std::function<std::optional<double>(std::string_view reference,
                                                       std::string_view candidate)>;

struct QualityScorers {
  PairScorer embed;
  PairScorer align;  // optional
};

struct QualityFilterResult {
  std::vector<std::size_t> indices;  // into the input, best first
  std::vector<std::string> texts;
  std::vector<double> scores;
  bool align_used = false;
};

// Ranks candidates by the mean of their available scores against the
// original utterance and keeps the top three; ties keep input order.
// Throws TooFewCandidates.
QualityFilterResult quality_filter(std::string_view original, std::span<const std::string> generated,
                                   const QualityScorers& scorers);

}  // namespace s2t
