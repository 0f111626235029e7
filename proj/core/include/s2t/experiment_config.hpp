#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "s2t/dataset_io.hpp"
#include "s2t/demo_selection.hpp"
#include "s2t/llm_gateway.hpp"

namespace s2t {

// Every experiment knob. Loaded from a key = value file (# starts a comment),
// then overridden from the command line. See config/example.conf.
struct ExperimentConfig {
  std::string dataset_name = "dataset";
  std::filesystem::path train_path;
  std::filesystem::path test_path;
  DatasetFormat dataset_format = DatasetFormat::S2tJsonl;

  Strategy strategy = Strategy::AstIclTop;
  std::size_t n_demos = 2;
  DemoOrder demo_order = DemoOrder::SimilarLast;
  std::uint64_t seed = 7;           // demo sampling
  std::uint64_t encoder_seed = 42;  // encoder weights
  std::size_t k = 20;
  std::size_t kmeans_restarts = 4;
  std::size_t tune_k_min = 2;
  std::size_t tune_k_max = 30;

  std::string backend = "mock";  // mock | remote
  std::string model = "gpt-4o";
  MockRule mock_rule = MockRule::LastDemo;
  std::filesystem::path mock_responses;  // optional JSONL of {sql, response}
  int max_tokens = 256;
  double temperature = 0.0;
  std::size_t concurrency = 4;

  std::string template_id = "prefix";
  std::string instruction = "default";  // instruction_<name> template
  std::filesystem::path template_dir;   // optional overrides
  std::size_t context_budget = 2048;

  std::string embed_provider = "hashing";  // hashing | http
  std::string embed_model = "text-embedding-3-small";
  std::string align_url;                   // empty disables the align column
  std::string reference_mode = "multi";    // multi | single
  double alpha = 0.05;
  std::vector<std::filesystem::path> generations;  // evaluate inputs; default: all in out_dir

  std::filesystem::path repurpose_input;
  DatasetFormat repurpose_format = DatasetFormat::S2tJsonl;

  std::filesystem::path out_dir = "runs/default";

  // Enforces the cross-field rules; throws ConfigError.
  void validate() const;
};

// Applies one key = value pair; throws ConfigError for unknown keys or bad
// values.
void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value);

// Parses a config file. Relative paths resolve against the file's directory.
// Throws ConfigError.
ExperimentConfig load_config(const std::filesystem::path& path);

// Keys in declaration order with their current values.
std::vector<std::pair<std::string, std::string>> config_entries(const ExperimentConfig& config);

// The frozen copy written next to every run's outputs.
std::string render_config(const ExperimentConfig& config);

}  // namespace s2t
