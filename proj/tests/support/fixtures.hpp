#pragma once

// Frozen oracle values. Each block names the script under tests/oracles that
// produced it; rerun the script to audit a number.

#include <array>
#include <cmath>
#include <string_view>
#include <vector>

namespace s2t::testdata {

// bleu_golden.py
struct BleuCase {
  std::string_view candidate;
  std::vector<std::string_view> references;
  double expected;
};
inline const std::vector<BleuCase> kBleuGolden = {
    {"the cat sat on the mat", {"the cat sat on a mat"}, 0.537284965911771},
    {"how many dogs are there", {"how many dogs do we have in total", "count the dogs"}, 0.3162277660168379},
    {"list the singers", {"show all singer names", "list the singers from france please"}, 0.7165313105737893},
};

// ttest_fixtures.py (scipy.stats.ttest_rel)
inline constexpr std::array<double, 10> kScoresA = {0.31, 0.28, 0.35, 0.40, 0.22, 0.30, 0.33, 0.29, 0.38, 0.27};
inline constexpr std::array<double, 10> kScoresB = {0.25, 0.27, 0.30, 0.31, 0.24, 0.26, 0.28, 0.22, 0.33, 0.25};
inline constexpr std::array<double, 10> kScoresC = {0.30, 0.29, 0.33, 0.41, 0.21, 0.31, 0.31, 0.30, 0.37, 0.28};
inline constexpr double kTAB = 4.209364560120684;
inline constexpr double kPAB = 0.002274943628309312;
inline constexpr double kTAC = 0.4803844614152634;
inline constexpr double kPAC = 0.6424151377207878;

// Two-sided Student t critical values at df = 9, as printed in standard tables.
struct TableRow {
  double p;
  double t;
};
inline constexpr std::array<TableRow, 5> kTTableDf9 = {
    {{0.10, 1.833}, {0.05, 2.262}, {0.02, 2.821}, {0.01, 3.250}, {0.001, 4.781}}};

// fleiss_fixture.py (statsmodels fleiss_kappa agrees with the direct formula)
inline const std::vector<std::vector<int>> kFleissTable = {
    {0, 0, 0, 0, 14}, {0, 2, 6, 4, 2}, {0, 0, 3, 5, 6}, {0, 3, 9, 2, 0}, {2, 2, 8, 1, 1},
    {7, 7, 0, 0, 0},  {3, 2, 6, 3, 0}, {2, 5, 3, 2, 2}, {6, 5, 2, 1, 0}, {0, 2, 2, 3, 7}};
inline constexpr double kFleissKappa = 0.20993070442195522;

// Paired samples of size 10 whose t statistic equals `t` exactly up to rounding.
inline std::array<double, 10> differences_with_t(double t) {
  constexpr std::array<double, 10> e = {-0.9, 1.3, -0.4, 0.2, 0.8, -1.1, 0.5, -0.6, 1.0, -0.8};
  // e has mean 0; its sample standard deviation:
  double ss = 0.0;
  for (const double x : e) ss += x * x;
  const double sd = std::sqrt(ss / 9.0);
  const double m = t * sd / std::sqrt(10.0);
  std::array<double, 10> d{};
  for (std::size_t i = 0; i < 10; ++i) d[i] = m + e[i];
  return d;
}

}  // namespace s2t::testdata
