#include "s2t/score_report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>

namespace s2t {
namespace {

using Getter = std::function<std::optional<double>(const SampleScore&)>;

const std::vector<std::pair<std::string, Getter>>& metric_getters() {
  static const std::vector<std::pair<std::string, Getter>> getters = {
      {"bleu", [](const SampleScore& s) { return std::optional<double>(s.bleu); }},
      {"embed_sim", [](const SampleScore& s) { return s.embed_sim; }},
      {"align", [](const SampleScore& s) { return s.align; }},
  };
  return getters;
}

std::optional<double> mean_of(std::span<const SampleScore> samples, const Getter& get) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& s : samples) {
    if (const auto v = get(s)) {
      sum += *v;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

void test_against(MethodScores& method, const MethodScores& baseline, double alpha) {
  std::map<std::string, const SampleScore*> by_id;
  for (const auto& s : baseline.samples) by_id[s.id] = &s;
  for (const auto& [metric, get] : metric_getters()) {
    std::vector<double> a;
    std::vector<double> b;
    for (const auto& s : method.samples) {
      const auto it = by_id.find(s.id);
      if (it == by_id.end()) continue;
      const auto va = get(s);
      const auto vb = get(*it->second);
      if (!va || !vb) continue;
      a.push_back(*va);
      b.push_back(*vb);
    }
    if (a.size() < 2) continue;
    Significance sig;
    sig.baseline = baseline.label();
    sig.metric = metric;
    sig.test = paired_t_test(a, b, alpha);
    sig.marker = sig.test.significant && sig.test.t > 0.0;
    method.significance.push_back(std::move(sig));
  }
}

nlohmann::ordered_json means_json(const MetricMeans& m) {
  nlohmann::ordered_json j;
  j["count"] = m.count;
  j["bleu"] = m.bleu;
  if (m.embed_sim) j["embed_sim"] = *m.embed_sim;
  if (m.align) j["align"] = *m.align;
  return j;
}

std::string fmt4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

bool has_marker(const MethodScores& m, std::string_view metric, std::string_view baseline_strategy) {
  const std::string baseline = std::string(baseline_strategy) + "-" + std::to_string(m.n_demos);
  return std::any_of(m.significance.begin(), m.significance.end(), [&](const Significance& s) {
    return s.marker && s.metric == metric && s.baseline == baseline;
  });
}

// Width in code points so the dagger glyphs do not skew alignment.
std::size_t display_width(const std::string& s) {
  return static_cast<std::size_t>(
      std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

void emit_table(std::ostringstream& out, const std::vector<std::string>& header,
                const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> widths(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    widths[c] = display_width(header[c]);
    for (const auto& r : rows) widths[c] = std::max(widths[c], display_width(r[c]));
  }
  auto emit = [&](const std::vector<std::string>& r) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      out << r[c];
      if (c + 1 < r.size()) out << std::string(widths[c] - display_width(r[c]) + 2, ' ');
    }
    out << "\n";
  };
  emit(header);
  std::size_t total = 0;
  for (const auto w : widths) total += w + 2;
  out << std::string(total - 2, '-') << "\n";
  for (const auto& r : rows) emit(r);
}

}  // namespace

std::string MethodScores::label() const { return strategy + "-" + std::to_string(n_demos); }

MetricMeans compute_means(std::span<const SampleScore> samples) {
  MetricMeans m;
  m.count = samples.size();
  const auto& getters = metric_getters();
  m.bleu = mean_of(samples, getters[0].second).value_or(0.0);
  m.embed_sim = mean_of(samples, getters[1].second);
  m.align = mean_of(samples, getters[2].second);
  return m;
}

void finalize_report(ScoreReport& report) {
  for (auto& method : report.methods) {
    method.overall = compute_means(method.samples);
    method.by_type.clear();
    std::map<QueryType, std::vector<SampleScore>> groups;
    for (const auto& s : method.samples) {
      if (s.query_type) groups[*s.query_type].push_back(s);
    }
    for (const auto& [type, group] : groups) method.by_type[type] = compute_means(group);
    method.significance.clear();
  }
  for (auto& method : report.methods) {
    for (const char* baseline_name : {"random", "bm25"}) {
      if (method.strategy == baseline_name) continue;
      const auto it = std::find_if(report.methods.begin(), report.methods.end(), [&](const MethodScores& m) {
        return m.strategy == baseline_name && m.n_demos == method.n_demos;
      });
      if (it != report.methods.end()) test_against(method, *it, report.alpha);
    }
  }
}

nlohmann::ordered_json report_to_json(const ScoreReport& report) {
  nlohmann::ordered_json j;
  j["dataset"] = report.dataset;
  j["bleu_mode"] = report.bleu_mode;
  j["reference_mode"] = report.reference_mode;
  j["alpha"] = report.alpha;
  auto& methods = j["methods"] = nlohmann::ordered_json::array();
  for (const auto& m : report.methods) {
    nlohmann::ordered_json mj;
    mj["label"] = m.label();
    mj["strategy"] = m.strategy;
    mj["n_demos"] = m.n_demos;
    mj["overall"] = means_json(m.overall);
    auto& types = mj["by_query_type"] = nlohmann::ordered_json::object();
    for (const auto& [type, means] : m.by_type) types[std::string(query_type_name(type))] = means_json(means);
    auto& sig = mj["significance"] = nlohmann::ordered_json::array();
    for (const auto& s : m.significance) {
      nlohmann::ordered_json sj;
      sj["baseline"] = s.baseline;
      sj["metric"] = s.metric;
      sj["t"] = std::isfinite(s.test.t) ? nlohmann::ordered_json(s.test.t)
                                        : nlohmann::ordered_json(s.test.t > 0 ? "inf" : "-inf");
      sj["p"] = s.test.p;
      sj["significant"] = s.test.significant;
      sj["marker"] = s.marker;
      sig.push_back(std::move(sj));
    }
    auto& samples = mj["samples"] = nlohmann::ordered_json::array();
    for (const auto& s : m.samples) {
      nlohmann::ordered_json sj;
      sj["id"] = s.id;
      if (!s.generation_id.empty()) sj["generation_id"] = s.generation_id;
      if (s.query_type) sj["query_type"] = query_type_name(*s.query_type);
      sj["bleu"] = s.bleu;
      if (s.embed_sim) sj["embed_sim"] = *s.embed_sim;
      if (s.align) sj["align"] = *s.align;
      samples.push_back(std::move(sj));
    }
    methods.push_back(std::move(mj));
  }
  return j;
}

std::string render_table(const ScoreReport& report) {
  bool any_embed = false;
  bool any_align = false;
  for (const auto& m : report.methods) {
    any_embed = any_embed || m.overall.embed_sim.has_value();
    any_align = any_align || m.overall.align.has_value();
  }
  std::vector<std::string> header = {"method", "n", "bleu"};
  if (any_embed) header.push_back("embed_sim");
  if (any_align) header.push_back("align");

  std::vector<std::vector<std::string>> rows;
  for (const auto& m : report.methods) {
    auto cell = [&](const std::optional<double>& v, std::string_view metric) {
      if (!v) return std::string("-");
      std::string s = fmt4(*v);
      if (has_marker(m, metric, "random")) s += "†";
      if (has_marker(m, metric, "bm25")) s += "‡";
      return s;
    };
    std::vector<std::string> row = {m.strategy, std::to_string(m.n_demos), cell(m.overall.bleu, "bleu")};
    if (any_embed) row.push_back(cell(m.overall.embed_sim, "embed_sim"));
    if (any_align) row.push_back(cell(m.overall.align, "align"));
    rows.push_back(std::move(row));
  }

  std::ostringstream out;
  out << "# " << (report.dataset.empty() ? "results" : report.dataset) << ": " << report.bleu_mode
      << "; references: " << report.reference_mode << "\n";
  emit_table(out, header, rows);
  out << "† p < " << report.alpha << " vs random; ‡ p < " << report.alpha << " vs bm25 (paired t-test)\n";

  bool any_type = false;
  for (const auto& m : report.methods) any_type = any_type || !m.by_type.empty();
  if (any_type) {
    const QueryType types[] = {QueryType::Simple, QueryType::Nested, QueryType::Aggregate};
    std::vector<std::string> type_header = {"method", "n"};
    for (const auto t : types) type_header.emplace_back(query_type_name(t));
    std::vector<std::vector<std::string>> type_rows;
    for (const auto& m : report.methods) {
      std::vector<std::string> row = {m.strategy, std::to_string(m.n_demos)};
      for (const auto t : types) {
        const auto it = m.by_type.find(t);
        row.push_back(it == m.by_type.end() ? "-" : fmt4(it->second.bleu) + " (" + std::to_string(it->second.count) + ")");
      }
      type_rows.push_back(std::move(row));
    }
    out << "\n# bleu by query type (sample count)\n";
    emit_table(out, type_header, type_rows);
  }
  return out.str();
}

}  // namespace s2t
