#include "s2t/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "s2t/error.hpp"

namespace s2t {
namespace {

using NgramCounts = std::map<std::vector<std::string_view>, int>;

NgramCounts count_ngrams(const std::vector<std::string>& tokens, std::size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::vector<std::string_view> gram(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                       tokens.begin() + static_cast<std::ptrdiff_t>(i + n));
    ++counts[gram];
  }
  return counts;
}

}  // namespace

std::vector<std::string> bleu_tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  for (const char raw : text) {
    const auto c = static_cast<unsigned char>(raw);
    if (std::isspace(c)) {
      flush();
    } else if (std::ispunct(c)) {
      flush();
      tokens.emplace_back(1, raw);
    } else {
      current.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  flush();
  return tokens;
}

double bleu4(std::string_view candidate, std::span<const std::string> references) {
  if (references.empty()) throw EmptyReferences();
  const auto cand = bleu_tokenize(candidate);
  if (cand.empty()) throw EmptyCandidate();
  std::vector<std::vector<std::string>> refs;
  refs.reserve(references.size());
  for (const auto& r : references) refs.push_back(bleu_tokenize(r));

  const std::size_t c = cand.size();
  const std::size_t max_order = std::min<std::size_t>(4, c);
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= max_order; ++n) {
    const auto cand_counts = count_ngrams(cand, n);
    NgramCounts max_ref;
    for (const auto& r : refs) {
      for (const auto& [gram, count] : count_ngrams(r, n)) {
        auto& slot = max_ref[gram];
        slot = std::max(slot, count);
      }
    }
    int clipped = 0;
    for (const auto& [gram, count] : cand_counts) {
      const auto it = max_ref.find(gram);
      if (it != max_ref.end()) clipped += std::min(count, it->second);
    }
    const double total = static_cast<double>(c - n + 1);
    if (clipped == 0 && n == 1) return 0.0;
    const double p = clipped == 0 ? 1.0 / (2.0 * static_cast<double>(c)) : clipped / total;
    log_sum += std::log(p);
  }

  // Closest reference length; the shorter one wins a tie.
  std::size_t r = refs.front().size();
  for (const auto& ref : refs) {
    const auto d = [&](std::size_t len) { return len > c ? len - c : c - len; };
    if (d(ref.size()) < d(r) || (d(ref.size()) == d(r) && ref.size() < r)) r = ref.size();
  }
  const double bp = r <= c ? 1.0 : std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c));
  const double score = bp * std::exp(log_sum / static_cast<double>(max_order));
  return std::clamp(score, 0.0, 1.0);
}

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b, double alpha) {
  if (a.size() != b.size()) throw LengthMismatch(a.size(), b.size());
  const std::size_t n = a.size();
  if (n < 2) throw TooFewSamples(n);

  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
  double sum = 0.0;
  for (const double x : d) sum += x;
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (const double x : d) ss += (x - mean) * (x - mean);
  const double var = ss / static_cast<double>(n - 1);

  TTestResult out;
  if (var == 0.0) {
    if (mean == 0.0) return out;
    out.t = mean > 0 ? std::numeric_limits<double>::infinity()
                     : -std::numeric_limits<double>::infinity();
    out.p = 0.0;
    out.significant = true;
    return out;
  }
  out.t = mean / std::sqrt(var / static_cast<double>(n));
  const boost::math::students_t dist(static_cast<double>(n - 1));
  out.p = std::min(1.0, 2.0 * boost::math::cdf(dist, -std::abs(out.t)));
  out.significant = out.p < alpha;
  return out;
}

double fleiss_kappa(const std::vector<std::vector<int>>& ratings) {
  if (ratings.empty() || ratings.front().empty()) throw RaggedMatrix("rating matrix is empty");
  const std::size_t k = ratings.front().size();
  long raters = -1;
  for (std::size_t i = 0; i < ratings.size(); ++i) {
    const auto& row = ratings[i];
    if (row.size() != k) throw RaggedMatrix("row " + std::to_string(i) + " has a different category count");
    long sum = 0;
    for (const int v : row) {
      if (v < 0) throw RaggedMatrix("row " + std::to_string(i) + " has a negative count");
      sum += v;
    }
    if (raters < 0) raters = sum;
    if (sum != raters) throw RaggedMatrix("row " + std::to_string(i) + " sums to " + std::to_string(sum) +
                                          ", expected " + std::to_string(raters));
  }
  if (raters < 2) throw RaggedMatrix("need at least 2 raters per item");

  const double n = static_cast<double>(raters);
  const double items = static_cast<double>(ratings.size());
  std::vector<double> column(k, 0.0);
  double p_bar = 0.0;
  for (const auto& row : ratings) {
    double sq = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      sq += static_cast<double>(row[j]) * row[j];
      column[j] += row[j];
    }
    p_bar += (sq - n) / (n * (n - 1.0));
  }
  p_bar /= items;
  double p_e = 0.0;
  for (const double total : column) {
    const double pj = total / (items * n);
    p_e += pj * pj;
  }
  if (p_e >= 1.0) return 1.0;
  return (p_bar - p_e) / (1.0 - p_e);
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionMismatch("cosine of vectors with different lengths");
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

QualityFilterResult quality_filter(std::string_view original, std::span<const std::string> generated,
                                   const QualityScorers& scorers) {
  if (generated.size() < 3) throw TooFewCandidates(generated.size());
  QualityFilterResult out;
  std::vector<double> score(generated.size(), 0.0);
  for (std::size_t i = 0; i < generated.size(); ++i) {
    double sum = 0.0;
    int parts = 0;
    if (scorers.embed) {
      if (const auto s = scorers.embed(original, generated[i])) {
        sum += *s;
        ++parts;
      }
    }
    if (scorers.align) {
      if (const auto s = scorers.align(original, generated[i])) {
        sum += *s;
        ++parts;
        out.align_used = true;
      }
    }
    score[i] = parts > 0 ? sum / parts : 0.0;
  }
  std::vector<std::size_t> order(generated.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
  for (std::size_t r = 0; r < 3; ++r) {
    out.indices.push_back(order[r]);
    out.texts.push_back(generated[order[r]]);
    out.scores.push_back(score[order[r]]);
  }
  return out;
}

}  // namespace s2t
