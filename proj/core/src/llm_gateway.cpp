#include "s2t/llm_gateway.hpp"

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "s2t/error.hpp"
#include "s2t/hash.hpp"
#include "s2t/prompt_builder.hpp"

namespace s2t {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::int64_t word_count(std::string_view text) {
  std::int64_t n = 0;
  bool in_word = false;
  for (const char c : text) {
    const bool space = c == ' ' || c == '\n' || c == '\t' || c == '\r';
    if (!space && !in_word) ++n;
    in_word = !space;
  }
  return n;
}

std::string synthetic_iterative_reply(std::string_view sql) {
  const std::string q = trim(sql);
  IterativeResponse r;
  r.initial = {"What does the query " + q + " return?", "Which rows are selected by " + q + "?",
               "Show the result of running " + q + "."};
  r.feedback = {"Clear, but could name the returned columns.",
                "Accurate; could mention the filtering conditions.",
                "Concise. No changes needed."};
  r.final_variations = {"What results does the query " + q + " return?",
                        "Which rows does the query " + q + " select?",
                        "Show the result of running " + q + "."};
  return render_iterative_response(r);
}

std::string last_demo_question(std::string_view prompt) {
  // Demo blocks end with "Question: <text>\n"; the seed block ends with a bare
  // "Question:".
  std::string found;
  std::size_t pos = 0;
  while ((pos = prompt.find("Question: ", pos)) != std::string_view::npos) {
    const auto line_end = prompt.find('\n', pos);
    if (line_end == std::string_view::npos) break;
    auto text = trim(prompt.substr(pos + 10, line_end - pos - 10));
    if (!text.empty()) found = std::move(text);
    pos = line_end;
  }
  return found;
}

std::string error_kind(const std::exception& e) {
  if (dynamic_cast<const AuthError*>(&e)) return "AuthError";
  if (dynamic_cast<const RateLimited*>(&e)) return "RateLimited";
  if (dynamic_cast<const TransportError*>(&e)) return "TransportError";
  if (dynamic_cast<const ResponseSchemaError*>(&e)) return "ResponseSchemaError";
  if (dynamic_cast<const Error*>(&e)) return "Error";
  return "Exception";
}

}  // namespace

PriceTable PriceTable::defaults() {
  PriceTable t;
  t.set("gpt-4o", {5.0, 15.0});
  t.set("gpt-4o-2024-05-13", {5.0, 15.0});
  t.set("gpt-4", {30.0, 60.0});
  return t;
}

void PriceTable::set(std::string model, ModelPrice price) { prices_[std::move(model)] = price; }

std::optional<ModelPrice> PriceTable::find(std::string_view model) const {
  const auto it = prices_.find(model);
  if (it == prices_.end()) return std::nullopt;
  return it->second;
}

double PriceTable::cost(std::string_view model, const TokenUsage& usage) const {
  const auto price = find(model);
  if (!price) return 0.0;
  return (static_cast<double>(usage.prompt) * price->input_per_million +
          static_cast<double>(usage.completion) * price->output_per_million) /
         1e6;
}

std::string extract_seed_sql(std::string_view prompt) {
  const auto marker = prompt.rfind("SQL: ");
  if (marker == std::string_view::npos) return trim(prompt);
  auto rest = prompt.substr(marker + 5);
  const auto end = rest.find("\nQuestion:");
  return trim(rest.substr(0, end));
}

std::string MockBackend::mock_key(std::string_view sql) { return text_hash(trim(sql)); }

GenerationResult MockBackend::complete(const GenerationRequest& request) {
  if (options_.latency.count() > 0) std::this_thread::sleep_for(options_.latency);
  if (options_.fail_request_ids.contains(request.request_id)) {
    throw TransportError("mock failure for request " + request.request_id);
  }
  const bool iterative = request.system_text.find("Final Refined Variations") != std::string::npos;
  const std::string seed = iterative ? trim(request.user_text) : extract_seed_sql(request.user_text);

  std::optional<std::string> text;
  if (options_.responder) text = options_.responder(request);
  if (!text) {
    if (const auto it = options_.responses.find(mock_key(seed)); it != options_.responses.end()) {
      text = it->second;
    }
  }
  if (!text && iterative) text = synthetic_iterative_reply(seed);
  if (!text && options_.rule == MockRule::LastDemo) {
    auto q = last_demo_question(request.user_text);
    if (!q.empty()) text = std::move(q);
  }
  if (!text) text = "Describe the query: " + seed;

  GenerationResult out;
  out.request_id = request.request_id;
  out.model = request.model;
  out.text = std::move(*text);
  out.usage = {word_count(request.system_text) + word_count(request.user_text), word_count(out.text)};
  out.latency_ms = static_cast<double>(options_.latency.count());
  return out;
}

RemoteConfig RemoteConfig::from_env() {
  RemoteConfig c;
  if (const char* base = std::getenv("S2T_API_BASE"); base && *base) c.base_url = base;
  if (const char* key = std::getenv("S2T_API_KEY"); key && *key) {
    c.api_key = key;
  } else if (const char* openai = std::getenv("OPENAI_API_KEY"); openai && *openai) {
    c.api_key = openai;
  }
  return c;
}

RemoteBackend::RemoteBackend(RemoteConfig config)
    : config_(std::move(config)), endpoint_(HttpEndpoint::parse(config_.base_url)) {}

nlohmann::json RemoteBackend::build_payload(const GenerationRequest& request) {
  nlohmann::json messages = nlohmann::json::array();
  if (!request.system_text.empty()) {
    messages.push_back({{"role", "system"}, {"content", request.system_text}});
  }
  messages.push_back({{"role", "user"}, {"content", request.user_text}});
  return {{"model", request.model},
          {"messages", messages},
          {"temperature", request.temperature},
          {"max_tokens", request.max_tokens}};
}

GenerationResult RemoteBackend::parse_response(const std::string& body) {
  const auto j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ResponseSchemaError("response is not a JSON object");
  const auto choices = j.find("choices");
  if (choices == j.end() || !choices->is_array() || choices->empty()) {
    throw ResponseSchemaError("response has no choices");
  }
  const auto& first = (*choices)[0];
  if (!first.contains("message") || !first["message"].contains("content") ||
      !first["message"]["content"].is_string()) {
    throw ResponseSchemaError("first choice has no message content");
  }
  GenerationResult out;
  out.text = first["message"]["content"].get<std::string>();
  if (const auto usage = j.find("usage"); usage != j.end() && usage->is_object()) {
    out.usage.prompt = usage->value("prompt_tokens", std::int64_t{0});
    out.usage.completion = usage->value("completion_tokens", std::int64_t{0});
  }
  if (j.contains("model") && j["model"].is_string()) out.model = j["model"].get<std::string>();
  return out;
}

GenerationResult RemoteBackend::complete(const GenerationRequest& request) {
  if (config_.api_key.empty()) throw AuthError("no API key configured (set S2T_API_KEY)");
  const std::string body = build_payload(request).dump();
  const HttpHeaders headers = {{"Authorization", "Bearer " + config_.api_key},
                               {"Idempotency-Key", request.request_id}};
  const auto sleep = config_.retry.sleep
                         ? config_.retry.sleep
                         : [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };

  auto backoff = config_.retry.initial_backoff;
  const auto started = std::chrono::steady_clock::now();
  for (int attempt = 1;; ++attempt) {
    const bool last = attempt > config_.retry.max_retries;
    std::string failure;
    bool rate_limited = false;
    try {
      const auto res = http_post_json(endpoint_, "/chat/completions", body, headers,
                                      config_.timeout_seconds);
      if (res.status == 200) {
        auto out = parse_response(res.body);
        out.request_id = request.request_id;
        if (out.model.empty()) out.model = request.model;
        out.attempts = attempt;
        out.latency_ms = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - started)
                             .count();
        return out;
      }
      if (res.status == 401 || res.status == 403) {
        throw AuthError("endpoint rejected credentials (HTTP " + std::to_string(res.status) + ")");
      }
      if (res.status != 429 && res.status < 500) {
        throw TransportError("HTTP " + std::to_string(res.status) + ": " + res.body.substr(0, 200));
      }
      rate_limited = res.status == 429;
      failure = "HTTP " + std::to_string(res.status);
    } catch (const TransportError& e) {
      if (std::string_view(e.what()).starts_with("HTTP ")) throw;
      failure = e.what();
    }
    if (last) {
      const std::string msg = failure + " after " + std::to_string(attempt) + " attempts";
      if (rate_limited) throw RateLimited(msg);
      throw TransportError(msg);
    }
    sleep(backoff);
    backoff = std::chrono::milliseconds(
        static_cast<std::int64_t>(static_cast<double>(backoff.count()) * config_.retry.multiplier));
  }
}

GenerationResult complete(const GenerationRequest& request, ChatBackend& backend,
                          const PriceTable& prices) {
  if (request.temperature < 0.0) throw Error("temperature must be >= 0");
  auto out = backend.complete(request);
  out.cost_usd = prices.cost(out.model.empty() ? request.model : out.model, out.usage);
  return out;
}

std::vector<BatchEntry> run_batch(ChatBackend& backend, std::span<const GenerationRequest> requests,
                                  std::size_t concurrency_limit, const PriceTable& prices) {
  std::vector<BatchEntry> results(requests.size());
  const std::size_t workers =
      std::min(std::max<std::size_t>(1, concurrency_limit), std::max<std::size_t>(1, requests.size()));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < requests.size(); i = next++) {
      try {
        results[i].result = complete(requests[i], backend, prices);
      } catch (const std::exception& e) {
        results[i].error_kind = error_kind(e);
        results[i].error = e.what();
      }
    }
  };
  if (workers == 1) {
    work();
    return results;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  return results;
}

nlohmann::ordered_json call_log_record(const GenerationRequest& request, const BatchEntry& entry) {
  nlohmann::ordered_json j;
  j["request_id"] = request.request_id;
  j["model"] = entry.ok() && !entry.result->model.empty() ? entry.result->model : request.model;
  j["prompt_hash"] = text_hash(request.system_text + "\x1f" + request.user_text);
  if (entry.ok()) {
    j["usage"] = {{"prompt", entry.result->usage.prompt}, {"completion", entry.result->usage.completion}};
    j["latency_ms"] = entry.result->latency_ms;
    j["cost_usd"] = entry.result->cost_usd;
    j["attempts"] = entry.result->attempts;
  } else {
    j["error_kind"] = entry.error_kind;
    j["error"] = entry.error;
  }
  return j;
}

void CostLedger::add(std::string request_id, double cost_usd) {
  if (cost_usd < 0.0) throw Error("negative cost for " + request_id);
  entries_.emplace_back(std::move(request_id), cost_usd);
}

double CostLedger::total() const {
  double sum = 0.0;
  for (const auto& [_, cost] : entries_) sum += cost;
  return sum;
}

CostLedger CostLedger::replay(const std::filesystem::path& log, const PriceTable& prices) {
  std::ifstream in(log);
  if (!in) throw IoError("cannot open usage log " + log.string());
  CostLedger ledger;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) throw SchemaError(line_no, "<line>", "not valid JSON");
    if (!j.contains("usage")) continue;
    TokenUsage usage{j["usage"].value("prompt", std::int64_t{0}),
                     j["usage"].value("completion", std::int64_t{0})};
    ledger.add(j.value("request_id", std::to_string(line_no)),
               prices.cost(j.value("model", std::string{}), usage));
  }
  return ledger;
}

}  // namespace s2t
