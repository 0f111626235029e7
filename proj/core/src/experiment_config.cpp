#include "s2t/experiment_config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "s2t/error.hpp"

namespace s2t {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc{} || ptr != end) {
    throw ConfigError("bad value for " + std::string(key) + ": '" + std::string(value) + "'");
  }
  return out;
}

double parse_real(std::string_view key, std::string_view value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(std::string(value), &used);
    if (used == value.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("bad value for " + std::string(key) + ": '" + std::string(value) + "'");
}

std::string_view mock_rule_name(MockRule rule) { return rule == MockRule::Echo ? "echo" : "last_demo"; }

std::string_view format_name(DatasetFormat f) {
  return f == DatasetFormat::S2tJsonl ? "s2t-jsonl" : "text2sql-pairs";
}

DatasetFormat parse_format_or_throw(std::string_view key, std::string_view value) {
  const auto f = parse_dataset_format(value);
  if (!f) throw ConfigError(std::string(key) + " must be s2t-jsonl or text2sql-pairs");
  return *f;
}

std::string join_paths(const std::vector<std::filesystem::path>& paths) {
  std::string out;
  for (const auto& p : paths) {
    if (!out.empty()) out += ",";
    out += p.string();
  }
  return out;
}

std::string real_text(double v) {
  std::ostringstream ss;
  ss.precision(17);
  ss << v;
  return ss.str();
}

}  // namespace

void ExperimentConfig::validate() const {
  if (strategy == Strategy::ZeroShot && n_demos != 0) {
    throw ConfigError("zero_shot uses no demonstrations; n_demos must be 0");
  }
  if (strategy != Strategy::ZeroShot && n_demos != 2 && n_demos != 4 && n_demos != 8) {
    throw ConfigError("n_demos must be one of 2, 4, 8 for strategy " + std::string(strategy_name(strategy)));
  }
  if (k == 0) throw ConfigError("k must be positive");
  if (tune_k_min < 2 || tune_k_max < tune_k_min) throw ConfigError("need 2 <= tune_k_min <= tune_k_max");
  if (backend != "mock" && backend != "remote") throw ConfigError("backend must be mock or remote");
  if (embed_provider != "hashing" && embed_provider != "http") {
    throw ConfigError("embed_provider must be hashing or http");
  }
  if (reference_mode != "multi" && reference_mode != "single") {
    throw ConfigError("reference_mode must be multi or single");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (temperature < 0.0) throw ConfigError("temperature must be >= 0");
  if (concurrency == 0) throw ConfigError("concurrency must be positive");
  if (out_dir.empty()) throw ConfigError("out_dir is empty");
}

void apply_setting(ExperimentConfig& c, std::string_view key, std::string_view raw) {
  const std::string value = trim(raw);
  static const std::map<std::string, std::function<void(ExperimentConfig&, const std::string&, std::string_view)>,
                        std::less<>>
      setters = {
          {"dataset_name", [](auto& c, const auto& v, auto) { c.dataset_name = v; }},
          {"train", [](auto& c, const auto& v, auto) { c.train_path = v; }},
          {"test", [](auto& c, const auto& v, auto) { c.test_path = v; }},
          {"dataset_format", [](auto& c, const auto& v, auto k) { c.dataset_format = parse_format_or_throw(k, v); }},
          {"strategy",
           [](auto& c, const auto& v, auto) {
             const auto s = parse_strategy(v);
             if (!s) throw ConfigError("unknown strategy '" + v + "'");
             c.strategy = *s;
             // A later n_demos setting still applies and is then validated.
             if (*s == Strategy::ZeroShot) c.n_demos = 0;
           }},
          {"n_demos", [](auto& c, const auto& v, auto k) { c.n_demos = parse_number<std::size_t>(k, v); }},
          {"demo_order",
           [](auto& c, const auto& v, auto) {
             const auto o = parse_demo_order(v);
             if (!o) throw ConfigError("demo_order must be similar_last, similar_first or random");
             c.demo_order = *o;
           }},
          {"seed", [](auto& c, const auto& v, auto k) { c.seed = parse_number<std::uint64_t>(k, v); }},
          {"encoder_seed", [](auto& c, const auto& v, auto k) { c.encoder_seed = parse_number<std::uint64_t>(k, v); }},
          {"k", [](auto& c, const auto& v, auto k) { c.k = parse_number<std::size_t>(k, v); }},
          {"kmeans_restarts",
           [](auto& c, const auto& v, auto k) { c.kmeans_restarts = parse_number<std::size_t>(k, v); }},
          {"tune_k_min", [](auto& c, const auto& v, auto k) { c.tune_k_min = parse_number<std::size_t>(k, v); }},
          {"tune_k_max", [](auto& c, const auto& v, auto k) { c.tune_k_max = parse_number<std::size_t>(k, v); }},
          {"backend", [](auto& c, const auto& v, auto) { c.backend = v; }},
          {"model", [](auto& c, const auto& v, auto) { c.model = v; }},
          {"mock_rule",
           [](auto& c, const auto& v, auto) {
             if (v == "echo") {
               c.mock_rule = MockRule::Echo;
             } else if (v == "last_demo") {
               c.mock_rule = MockRule::LastDemo;
             } else {
               throw ConfigError("mock_rule must be echo or last_demo");
             }
           }},
          {"mock_responses", [](auto& c, const auto& v, auto) { c.mock_responses = v; }},
          {"max_tokens", [](auto& c, const auto& v, auto k) { c.max_tokens = parse_number<int>(k, v); }},
          {"temperature", [](auto& c, const auto& v, auto k) { c.temperature = parse_real(k, v); }},
          {"concurrency", [](auto& c, const auto& v, auto k) { c.concurrency = parse_number<std::size_t>(k, v); }},
          {"template", [](auto& c, const auto& v, auto) { c.template_id = v; }},
          {"instruction", [](auto& c, const auto& v, auto) { c.instruction = v; }},
          {"template_dir", [](auto& c, const auto& v, auto) { c.template_dir = v; }},
          {"context_budget",
           [](auto& c, const auto& v, auto k) { c.context_budget = parse_number<std::size_t>(k, v); }},
          {"embed_provider", [](auto& c, const auto& v, auto) { c.embed_provider = v; }},
          {"embed_model", [](auto& c, const auto& v, auto) { c.embed_model = v; }},
          {"align_url", [](auto& c, const auto& v, auto) { c.align_url = v; }},
          {"reference_mode", [](auto& c, const auto& v, auto) { c.reference_mode = v; }},
          {"alpha", [](auto& c, const auto& v, auto k) { c.alpha = parse_real(k, v); }},
          {"generations",
           [](auto& c, const auto& v, auto) {
             c.generations.clear();
             std::stringstream ss(v);
             std::string item;
             while (std::getline(ss, item, ',')) {
               if (auto t = trim(item); !t.empty()) c.generations.emplace_back(t);
             }
           }},
          {"repurpose_input", [](auto& c, const auto& v, auto) { c.repurpose_input = v; }},
          {"repurpose_format",
           [](auto& c, const auto& v, auto k) { c.repurpose_format = parse_format_or_throw(k, v); }},
          {"out", [](auto& c, const auto& v, auto) { c.out_dir = v; }},
      };
  const auto it = setters.find(key);
  if (it == setters.end()) throw ConfigError("unknown config key '" + std::string(key) + "'");
  it->second(c, value, key);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  ExperimentConfig config;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected key = value");
    }
    try {
      apply_setting(config, trim(std::string_view(line).substr(0, eq)), std::string_view(line).substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  const auto base = path.parent_path();
  auto resolve = [&](std::filesystem::path& p) {
    if (!p.empty() && p.is_relative()) p = base / p;
  };
  resolve(config.train_path);
  resolve(config.test_path);
  resolve(config.mock_responses);
  resolve(config.template_dir);
  resolve(config.repurpose_input);
  resolve(config.out_dir);
  for (auto& g : config.generations) resolve(g);
  return config;
}

std::vector<std::pair<std::string, std::string>> config_entries(const ExperimentConfig& c) {
  return {
      {"dataset_name", c.dataset_name},
      {"train", c.train_path.string()},
      {"test", c.test_path.string()},
      {"dataset_format", std::string(format_name(c.dataset_format))},
      {"strategy", std::string(strategy_name(c.strategy))},
      {"n_demos", std::to_string(c.n_demos)},
      {"demo_order", std::string(demo_order_name(c.demo_order))},
      {"seed", std::to_string(c.seed)},
      {"encoder_seed", std::to_string(c.encoder_seed)},
      {"k", std::to_string(c.k)},
      {"kmeans_restarts", std::to_string(c.kmeans_restarts)},
      {"tune_k_min", std::to_string(c.tune_k_min)},
      {"tune_k_max", std::to_string(c.tune_k_max)},
      {"backend", c.backend},
      {"model", c.model},
      {"mock_rule", std::string(mock_rule_name(c.mock_rule))},
      {"mock_responses", c.mock_responses.string()},
      {"max_tokens", std::to_string(c.max_tokens)},
      {"temperature", real_text(c.temperature)},
      {"concurrency", std::to_string(c.concurrency)},
      {"template", c.template_id},
      {"instruction", c.instruction},
      {"template_dir", c.template_dir.string()},
      {"context_budget", std::to_string(c.context_budget)},
      {"embed_provider", c.embed_provider},
      {"embed_model", c.embed_model},
      {"align_url", c.align_url},
      {"reference_mode", c.reference_mode},
      {"alpha", real_text(c.alpha)},
      {"generations", join_paths(c.generations)},
      {"repurpose_input", c.repurpose_input.string()},
      {"repurpose_format", std::string(format_name(c.repurpose_format))},
      {"out", c.out_dir.string()},
  };
}

std::string render_config(const ExperimentConfig& config) {
  std::string out = "# resolved configuration\n";
  for (const auto& [key, value] : config_entries(config)) out += key + " = " + value + "\n";
  return out;
}

}  // namespace s2t
