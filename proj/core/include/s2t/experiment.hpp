#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "s2t/embedding_provider.hpp"
#include "s2t/experiment_config.hpp"
#include "s2t/graph_encoder.hpp"
#include "s2t/llm_gateway.hpp"
#include "s2t/metrics.hpp"
#include "s2t/score_report.hpp"
#include "s2t/token_vocab.hpp"

namespace s2t {

// External collaborators of a run. make_services builds them from the config;
// tests substitute their own.
struct Services {
  std::shared_ptr<ChatBackend> backend;
  std::shared_ptr<EmbeddingProvider> embedder;
  PairScorer align;  // empty when no alignment scorer is configured
  PriceTable prices = PriceTable::defaults();
};

// Throws ConfigError for an unusable backend setting.
Services make_services(const ExperimentConfig& config);

struct RunSummary {
  std::string command;
  std::size_t processed = 0;
  std::size_t failures = 0;  // per-record failures recorded in the outputs
  std::vector<std::filesystem::path> outputs;
  std::string message;

  // 0 on success, 2 when some records failed.
  int exit_code() const { return failures == 0 ? 0 : 2; }
};

// Exclusive "<out>/.lock" for the lifetime of the object. Throws ConfigError
// when another run holds it.
class OutputLock {
 public:
  explicit OutputLock(const std::filesystem::path& out_dir);
  ~OutputLock();
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

 private:
  std::filesystem::path path_;
};

// Encoder, vocabulary and clustered pool built from the training split.
struct PreparedPool {
  TokenVocab vocab;
  EncoderParams params;
  DemoPool pool;
  SelectionIndex index;
  std::size_t skipped = 0;  // training records without parseable SQL or a reference
};

// Writes encoder.json, index.json and timings.json.
RunSummary cmd_index(const ExperimentConfig& config, const Services& services);

// Writes generations-<strategy>-<n>.jsonl and calls-<strategy>-<n>.jsonl.
RunSummary cmd_generate(const ExperimentConfig& config, const Services& services);

// Writes repurposed.jsonl (+ manifest), rejects.jsonl, quality_report.json and
// calls-repurpose.jsonl.
RunSummary cmd_repurpose(const ExperimentConfig& config, const Services& services);

// Scores generation files against the test split; writes report.json and
// report.txt. Throws MissingReference.
RunSummary cmd_evaluate(const ExperimentConfig& config, const Services& services);

// Re-renders report.txt from report.json after checking its stored means.
RunSummary cmd_report(const ExperimentConfig& config);

// Silhouette sweep over k; writes tune_k.json.
RunSummary cmd_tune_k(const ExperimentConfig& config, const Services& services);

// Loads the pool from a matching index.json/encoder.json pair in out_dir, or
// builds (and writes) it.
PreparedPool prepare_pool(const ExperimentConfig& config, bool write_files = true);

std::filesystem::path generations_path(const ExperimentConfig& config);

// First non-empty line of a model reply with any "Question:" prefix removed.
std::string clean_generation(std::string_view text);

ScoreReport report_from_json(const nlohmann::json& j);

}  // namespace s2t
