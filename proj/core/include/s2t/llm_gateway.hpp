#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "s2t/http_client.hpp"

namespace s2t {

struct GenerationRequest {
  std::string model;
  std::string system_text;
  std::string user_text;
  int max_tokens = 256;
  double temperature = 0.0;
  std::string request_id;  // doubles as the idempotency key
};

struct TokenUsage {
  std::int64_t prompt = 0;
  std::int64_t completion = 0;

  bool operator==(const TokenUsage&) const = default;
};

struct GenerationResult {
  std::string request_id;
  std::string model;
  std::string text;
  TokenUsage usage;
  double latency_ms = 0.0;
  double cost_usd = 0.0;
  int attempts = 1;
};

struct ModelPrice {
  double input_per_million = 0.0;
  double output_per_million = 0.0;
};

// USD per million tokens, keyed by model name. Unknown models cost 0.
class PriceTable {
 public:
  // gpt-4o ($5 / $15) and gpt-4 ($30 / $60) list prices.
  static PriceTable defaults();

  void set(std::string model, ModelPrice price);
  std::optional<ModelPrice> find(std::string_view model) const;
  double cost(std::string_view model, const TokenUsage& usage) const;

 private:
  std::map<std::string, ModelPrice, std::less<>> prices_;
};

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::string name() const = 0;
  // Fills text, usage, latency and attempts; cost is added by the gateway.
  virtual GenerationResult complete(const GenerationRequest& request) = 0;
};

// Seed query of an ICL prompt: the text after the last "SQL: " marker.
std::string extract_seed_sql(std::string_view prompt);

enum class MockRule {
  Echo,      // "Describe the query: <seed sql>"
  LastDemo,  // the Question line of the demo nearest the seed; Echo when zero-shot
};

// Offline backend. Lookup order: explicit responder, response table keyed by
// mock_key(seed SQL), synthetic three-step reply for iterative prompts, then
// the configured rule. Output depends only on the request.
class MockBackend final : public ChatBackend {
 public:
  struct Options {
    std::map<std::string, std::string> responses{};
    MockRule rule = MockRule::LastDemo;
    std::chrono::milliseconds latency{0};   // slept and reported as latency
    std::set<std::string> fail_request_ids{};  // raise TransportError for these
    std::function<std::optional<std::string>(const GenerationRequest&)> responder{};
  };

  MockBackend() = default;
  explicit MockBackend(Options options) : options_(std::move(options)) {}

  static std::string mock_key(std::string_view sql);

  std::string name() const override { return "mock"; }
  GenerationResult complete(const GenerationRequest& request) override;

 private:
  Options options_;
};

struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{500};
  double multiplier = 2.0;
  // Injected in tests; defaults to std::this_thread::sleep_for.
  std::function<void(std::chrono::milliseconds)> sleep;
};

struct RemoteConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string api_key;
  double timeout_seconds = 120.0;
  RetryPolicy retry;

  // S2T_API_BASE, S2T_API_KEY (falls back to OPENAI_API_KEY).
  static RemoteConfig from_env();
};

// OpenAI-compatible chat-completions client. Retries 429, 5xx and transport
// failures with exponential backoff; 401/403 fail immediately with AuthError.
// Exhausted retries raise RateLimited (429) or TransportError.
class RemoteBackend final : public ChatBackend {
 public:
  explicit RemoteBackend(RemoteConfig config);

  std::string name() const override { return "remote"; }
  GenerationResult complete(const GenerationRequest& request) override;

  static nlohmann::json build_payload(const GenerationRequest& request);
  // Throws ResponseSchemaError when there is no message content.
  static GenerationResult parse_response(const std::string& body);

 private:
  RemoteConfig config_;
  HttpEndpoint endpoint_;
};

// One call through a backend with the cost filled in from the price table.
// Throws Error for a negative temperature.
GenerationResult complete(const GenerationRequest& request, ChatBackend& backend,
                          const PriceTable& prices);

struct BatchEntry {
  std::optional<GenerationResult> result;
  std::string error_kind;  // AuthError, RateLimited, TransportError, ...
  std::string error;

  bool ok() const { return result.has_value(); }
};

// Runs requests with at most `concurrency_limit` in flight. Results keep
// request order; failures are recorded per entry and never abort the batch.
std::vector<BatchEntry> run_batch(ChatBackend& backend, std::span<const GenerationRequest> requests,
                                  std::size_t concurrency_limit, const PriceTable& prices);

// JSONL log record: request id, model, usage, latency, cost, prompt hash.
nlohmann::ordered_json call_log_record(const GenerationRequest& request, const BatchEntry& entry);

class CostLedger {
 public:
  void add(std::string request_id, double cost_usd);
  double total() const;
  std::size_t size() const noexcept { return entries_.size(); }
  const std::vector<std::pair<std::string, double>>& entries() const noexcept { return entries_; }

  // Re-prices a JSONL call log ("model", "usage": {"prompt", "completion"}).
  static CostLedger replay(const std::filesystem::path& log, const PriceTable& prices);

 private:
  std::vector<std::pair<std::string, double>> entries_;
};

}  // namespace s2t
