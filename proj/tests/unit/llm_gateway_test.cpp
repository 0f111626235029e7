#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <fstream>

#include "s2t/error.hpp"
#include "s2t/llm_gateway.hpp"
#include "s2t/prompt_builder.hpp"
// After Eigen: httplib pulls in <resolv.h>, whose _res macro breaks Eigen headers.
#include "fake_server.hpp"

namespace s2t {
namespace {

using namespace std::chrono_literals;

std::string chat_body(const std::string& content, int prompt = 11, int completion = 3) {
  return nlohmann::json{{"model", "gpt-4o-2024-05-13"},
                        {"choices", {{{"index", 0}, {"message", {{"role", "assistant"}, {"content", content}}}}}},
                        {"usage", {{"prompt_tokens", prompt}, {"completion_tokens", completion}}}}
      .dump();
}

RemoteConfig local_config(const std::string& url, std::vector<std::chrono::milliseconds>* sleeps = nullptr) {
  RemoteConfig c;
  c.base_url = url + "/v1";
  c.api_key = "test-key";
  c.timeout_seconds = 5.0;
  c.retry.initial_backoff = 10ms;
  c.retry.sleep = [sleeps](std::chrono::milliseconds d) {
    if (sleeps) sleeps->push_back(d);
  };
  return c;
}

GenerationRequest request(std::string id, std::string user = "SQL: SELECT 1\nQuestion:") {
  GenerationRequest r;
  r.model = "gpt-4o";
  r.user_text = std::move(user);
  r.request_id = std::move(id);
  return r;
}

TEST(MockBackend, DeterministicAndRuleBased) {
  MockBackend mock;
  const std::string prompt =
      "T\n\nSQL: SELECT a FROM t\nQuestion: What is a?\nSQL: SELECT b FROM u\nQuestion: What is b?\n"
      "SQL: SELECT c FROM v\nQuestion:";
  const auto a = mock.complete(request("r1", prompt));
  EXPECT_EQ(a.text, "What is b?");
  EXPECT_EQ(mock.complete(request("r1", prompt)).text, a.text);
  EXPECT_EQ(a.usage, mock.complete(request("r2", prompt)).usage);

  MockBackend echo(MockBackend::Options{.rule = MockRule::Echo});
  EXPECT_EQ(echo.complete(request("r", prompt)).text, "Describe the query: SELECT c FROM v");
  // Zero-shot prompts fall back to echo under LastDemo.
  EXPECT_EQ(mock.complete(request("z", "T\n\nSQL: SELECT 9\nQuestion:")).text, "Describe the query: SELECT 9");
}

TEST(MockBackend, ResponseTableBeatsRules) {
  MockBackend mock(MockBackend::Options{.responses = {{MockBackend::mock_key("SELECT c FROM v"), "canned"}}});
  EXPECT_EQ(mock.complete(request("r", "x\nSQL: SELECT c FROM v  \nQuestion:")).text, "canned");
}

TEST(MockBackend, IterativePromptsGetAWellFormedReply) {
  MockBackend mock;
  const auto p = build_iterative_prompt("SELECT name FROM singer");
  GenerationRequest r = request("it");
  r.system_text = p.system_text;
  r.user_text = p.user_text;
  const auto reply = parse_iterative_response(mock.complete(r).text);
  for (const auto& u : reply.final_variations) EXPECT_FALSE(u.empty());
}

TEST(MockBackend, ExtractSeed) {
  EXPECT_EQ(extract_seed_sql("SQL: a\nQuestion: q\nSQL: SELECT x\nQuestion:"), "SELECT x");
  EXPECT_EQ(extract_seed_sql("no marker"), "no marker");
}

TEST(Gateway, CostFromPriceTable) {
  const auto prices = PriceTable::defaults();
  EXPECT_DOUBLE_EQ(prices.cost("gpt-4o", {1'000'000, 1'000'000}), 20.0);
  EXPECT_DOUBLE_EQ(prices.cost("gpt-4", {1'000'000, 0}), 30.0);
  EXPECT_EQ(prices.cost("unknown-model", {5, 5}), 0.0);
  MockBackend mock;
  auto r = request("c");
  const auto out = complete(r, mock, prices);
  EXPECT_DOUBLE_EQ(out.cost_usd, prices.cost("gpt-4o", out.usage));
  r.temperature = -1;
  EXPECT_THROW(complete(r, mock, prices), Error);
}

class CountingBackend final : public ChatBackend {
 public:
  std::string name() const override { return "counting"; }
  GenerationResult complete(const GenerationRequest& r) override {
    const int now = ++in_flight;
    int seen = peak.load();
    while (now > seen && !peak.compare_exchange_weak(seen, now)) {
    }
    std::this_thread::sleep_for(2ms);
    --in_flight;
    if (r.request_id == "bad") throw RateLimited("slow down");
    return GenerationResult{r.request_id, r.model, "out-" + r.request_id, {1, 1}, 0.0, 0.0, 1};
  }
  std::atomic<int> in_flight{0};
  std::atomic<int> peak{0};
};

TEST(Gateway, BatchKeepsOrderAndRespectsLimit) {
  CountingBackend backend;
  std::vector<GenerationRequest> reqs;
  for (int i = 0; i < 40; ++i) reqs.push_back(request(i == 13 ? "bad" : std::to_string(i)));
  const auto results = run_batch(backend, reqs, 3, PriceTable::defaults());
  ASSERT_EQ(results.size(), reqs.size());
  for (std::size_t i = 0; i < reqs.size(); ++i) {
    if (i == 13) {
      EXPECT_FALSE(results[i].ok());
      EXPECT_EQ(results[i].error_kind, "RateLimited");
      const auto log = call_log_record(reqs[i], results[i]);
      EXPECT_EQ(log["error_kind"], "RateLimited");
      EXPECT_FALSE(log.contains("usage"));
    } else {
      ASSERT_TRUE(results[i].ok());
      EXPECT_EQ(results[i].result->text, "out-" + reqs[i].request_id);
    }
  }
  EXPECT_LE(backend.peak.load(), 3);
  EXPECT_GE(backend.peak.load(), 2);
}

TEST(CostLedger, TotalIsTheSumOfEntries) {
  CostLedger ledger;
  double expected = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double c = 0.0001 * ((i * 37) % 101);
    ledger.add(std::to_string(i), c);
    expected += c;
  }
  EXPECT_EQ(ledger.total(), expected);
  EXPECT_THROW(ledger.add("neg", -1.0), Error);
}

TEST(CostLedger, ExperimentTableAddsUp) {
  // GPT-4 experiment costs and the GPT-4o dataset generation, in USD.
  CostLedger ledger;
  ledger.add("gpt4-zero-shot", 1.51);
  ledger.add("gpt4-bm25-2", 1.79);
  ledger.add("gpt4-ast-icl-top-2", 1.68);
  ledger.add("gpt4-random-2", 1.89);
  ledger.add("gpt4o-generation", 6.86);
  EXPECT_NEAR(ledger.total(), 13.73, 1e-9);
}

TEST(CostLedger, ReplayOfAGenerationSizedLog) {
  // 879 iterative calls with usage typical of the three-step prompt: a
  // ~1.2k-token system prompt and a ~120-token JSON reply.
  const auto path = std::filesystem::temp_directory_path() / "s2t_replay_test.jsonl";
  {
    std::ofstream out(path);
    for (int i = 0; i < 879; ++i) {
      const int prompt = 1180 + (i % 41);
      const int completion = 100 + (i % 37);
      out << nlohmann::json{{"request_id", "repurpose/" + std::to_string(i)},
                            {"model", "gpt-4o"},
                            {"usage", {{"prompt", prompt}, {"completion", completion}}}}
                 .dump()
          << "\n";
    }
    out << R"({"request_id":"failed","model":"gpt-4o","error_kind":"TransportError"})" << "\n";
  }
  const auto ledger = CostLedger::replay(path, PriceTable::defaults());
  EXPECT_EQ(ledger.size(), 879u);
  double expected = 0.0;
  for (int i = 0; i < 879; ++i) expected += ((1180 + i % 41) * 5.0 + (100 + i % 37) * 15.0) / 1e6;
  EXPECT_NEAR(ledger.total(), expected, 1e-9);
  EXPECT_NEAR(ledger.total(), 6.86, 0.05);
  std::filesystem::remove(path);
}

TEST(RemoteBackend, PayloadShape) {
  GenerationRequest r = request("id-1", "hello");
  r.system_text = "sys";
  r.max_tokens = 64;
  const auto p = RemoteBackend::build_payload(r);
  EXPECT_EQ(p["model"], "gpt-4o");
  EXPECT_EQ(p["messages"].size(), 2u);
  EXPECT_EQ(p["messages"][0]["role"], "system");
  EXPECT_EQ(p["messages"][1]["content"], "hello");
  EXPECT_EQ(p["max_tokens"], 64);
  EXPECT_EQ(p["temperature"], 0.0);
  r.system_text.clear();
  EXPECT_EQ(RemoteBackend::build_payload(r)["messages"].size(), 1u);
}

TEST(RemoteBackend, RetriesRateLimitThenSucceeds) {
  testdata::FakeServer server([](const httplib::Request&, int call) {
    if (call <= 2) return testdata::FakeReply{429, R"({"error":"rate"})"};
    return testdata::FakeReply{200, chat_body("What is one?")};
  });
  std::vector<std::chrono::milliseconds> sleeps;
  RemoteBackend backend(local_config(server.url(), &sleeps));
  const auto out = backend.complete(request("req-7"));
  EXPECT_EQ(out.text, "What is one?");
  EXPECT_EQ(out.attempts, 3);
  EXPECT_EQ(out.usage, (TokenUsage{11, 3}));
  EXPECT_EQ(out.model, "gpt-4o-2024-05-13");
  EXPECT_EQ(sleeps, (std::vector<std::chrono::milliseconds>{10ms, 20ms}));
  const auto reqs = server.requests();
  ASSERT_EQ(reqs.size(), 3u);
  for (const auto& r : reqs) {
    EXPECT_EQ(r.path, "/v1/chat/completions");
    EXPECT_EQ(r.get_header_value("Authorization"), "Bearer test-key");
    EXPECT_EQ(r.get_header_value("Idempotency-Key"), "req-7");
  }
  EXPECT_EQ(nlohmann::json::parse(reqs[0].body)["messages"][0]["content"], "SQL: SELECT 1\nQuestion:");
  // Priced with the model the endpoint reports.
  EXPECT_GT(complete(request("req-8"), backend, PriceTable::defaults()).cost_usd, 0.0);
}

TEST(RemoteBackend, AuthFailureIsImmediate) {
  testdata::FakeServer server([](const httplib::Request&, int) { return testdata::FakeReply{401, "{}"}; });
  RemoteBackend backend(local_config(server.url()));
  EXPECT_THROW(backend.complete(request("a")), AuthError);
  EXPECT_EQ(server.requests().size(), 1u);
  RemoteConfig no_key = local_config(server.url());
  no_key.api_key.clear();
  EXPECT_THROW(RemoteBackend(no_key).complete(request("b")), AuthError);
  EXPECT_EQ(server.requests().size(), 1u);
}

TEST(RemoteBackend, ExhaustedRetries) {
  testdata::FakeServer limited([](const httplib::Request&, int) { return testdata::FakeReply{429, "{}"}; });
  EXPECT_THROW(RemoteBackend(local_config(limited.url())).complete(request("a")), RateLimited);
  EXPECT_EQ(limited.requests().size(), 4u);

  testdata::FakeServer broken([](const httplib::Request&, int) { return testdata::FakeReply{503, "{}"}; });
  EXPECT_THROW(RemoteBackend(local_config(broken.url())).complete(request("b")), TransportError);
  EXPECT_EQ(broken.requests().size(), 4u);
}

TEST(RemoteBackend, ClientErrorsAreNotRetried) {
  testdata::FakeServer server([](const httplib::Request&, int) { return testdata::FakeReply{400, "bad"}; });
  EXPECT_THROW(RemoteBackend(local_config(server.url())).complete(request("a")), TransportError);
  EXPECT_EQ(server.requests().size(), 1u);
}

TEST(RemoteBackend, SchemaErrors) {
  testdata::FakeServer server([](const httplib::Request&, int) {
    return testdata::FakeReply{200, R"({"choices": [{"message": {"role": "assistant"}}]})"};
  });
  EXPECT_THROW(RemoteBackend(local_config(server.url())).complete(request("a")), ResponseSchemaError);
  EXPECT_THROW(RemoteBackend::parse_response("not json"), ResponseSchemaError);
  EXPECT_THROW(RemoteBackend::parse_response(R"({"choices": []})"), ResponseSchemaError);
}

TEST(RemoteBackend, UnreachableEndpoint) {
  RemoteConfig c = local_config("http://127.0.0.1:1");
  c.timeout_seconds = 0.5;
  EXPECT_THROW(RemoteBackend(c).complete(request("a")), TransportError);
}

}  // namespace
}  // namespace s2t
