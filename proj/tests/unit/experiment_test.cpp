#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "pipeline.hpp"
#include "s2t/dataset_io.hpp"
#include "s2t/error.hpp"
#include "s2t/hash.hpp"
#include "s2t/prompt_builder.hpp"
// After Eigen: httplib pulls in <resolv.h>, whose _res macro breaks Eigen headers.
#include "fake_server.hpp"

namespace s2t {
namespace {

namespace fs = std::filesystem;

const std::vector<std::pair<Strategy, std::size_t>> kMethods = {
    {Strategy::ZeroShot, 0}, {Strategy::Random, 2}, {Strategy::Bm25, 2},
    {Strategy::AstIcl, 2},   {Strategy::AstIclTop, 2}, {Strategy::AstIclTop, 4}};

std::vector<nlohmann::json> read_rows(const fs::path& p) {
  std::vector<nlohmann::json> rows;
  std::ifstream in(p);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) rows.push_back(nlohmann::json::parse(line));
  }
  return rows;
}

TEST(Experiment, PipelineIsByteIdenticalAcrossRuns) {
  const auto ws = testdata::make_workspace("determinism", 120, 30);
  const auto config = testdata::workspace_config(ws);
  testdata::run_pipeline(config, kMethods);
  const auto first = testdata::snapshot(ws.out, {"timings.json"});
  fs::remove_all(ws.out);
  testdata::run_pipeline(config, kMethods);
  const auto second = testdata::snapshot(ws.out, {"timings.json"});
  EXPECT_EQ(first.size(), second.size());
  for (const auto& [name, body] : first) {
    ASSERT_TRUE(second.contains(name)) << name;
    EXPECT_EQ(body, second.at(name)) << name;
  }
  EXPECT_TRUE(first.contains("report.json"));
  EXPECT_TRUE(first.contains("generations-ast_icl_top-4.jsonl"));
  EXPECT_FALSE(fs::exists(ws.out / ".lock"));
}

TEST(Experiment, RowsAreTraceable) {
  const auto ws = testdata::make_workspace("trace", 80, 12);
  auto config = testdata::workspace_config(ws);
  testdata::run_pipeline(config, {{Strategy::AstIclTop, 2}, {Strategy::Random, 2}});
  const auto rows = read_rows(ws.out / "generations-ast_icl_top-2.jsonl");
  ASSERT_EQ(rows.size(), 12u);
  const auto report = nlohmann::json::parse(testdata::slurp(ws.out / "report.json"));
  std::set<std::string> reported;
  for (const auto& m : report["methods"]) {
    for (const auto& s : m["samples"]) reported.insert(s["generation_id"].get<std::string>());
  }
  const auto calls = read_rows(ws.out / "calls-ast_icl_top-2.jsonl");
  ASSERT_EQ(calls.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    EXPECT_TRUE(reported.contains(r["generation_id"].get<std::string>()));
    EXPECT_EQ(calls[i]["request_id"], r["generation_id"]);
    EXPECT_EQ(r["demo_ids"].size(), 2u);
    EXPECT_TRUE(r["selection_seed"].is_number_unsigned());
    EXPECT_EQ(r["prompt_hash"].get<std::string>().size(), 16u);
    EXPECT_FALSE(r["output"].get<std::string>().empty());
  }
  EXPECT_TRUE(fs::exists(ws.out / "config.resolved"));
}

TEST(Experiment, PromptHashMatchesRebuiltPrompt) {
  const auto ws = testdata::make_workspace("prompt_hash", 40, 4);
  auto config = testdata::workspace_config(ws);
  config.strategy = Strategy::ZeroShot;
  config.n_demos = 0;
  cmd_generate(config, make_services(config));
  const auto tests = load_dataset(ws.test, DatasetFormat::S2tJsonl, Split::Test).records;
  const auto rows = read_rows(generations_path(config));
  const auto registry = TemplateRegistry::builtin();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto prompt = build_icl_prompt(instruction_text(registry, "default"), {}, tests[i].sql, "prefix", registry);
    EXPECT_EQ(rows[i]["prompt_hash"], text_hash(prompt));
    // Zero-shot under the mock falls back to echoing the SQL.
    EXPECT_EQ(rows[i]["output"], "Describe the query: " + tests[i].sql);
  }
}

TEST(Experiment, ZeroShotNeedsNoTrainingData) {
  const auto ws = testdata::make_workspace("zero_shot", 10, 6);
  auto config = testdata::workspace_config(ws);
  config.train_path.clear();
  config.strategy = Strategy::ZeroShot;
  config.n_demos = 0;
  const auto services = make_services(config);
  EXPECT_EQ(cmd_generate(config, services).exit_code(), 0);
  const auto summary = cmd_evaluate(config, services);
  EXPECT_EQ(summary.exit_code(), 0);
  EXPECT_EQ(summary.processed, 6u);
}

TEST(Experiment, TestRecordIsNeverItsOwnDemo) {
  const auto ws = testdata::make_workspace("exclusion", 60, 1);
  auto config = testdata::workspace_config(ws);
  config.test_path = ws.train;  // every test id is also in the pool
  for (const auto& [strategy, n] : kMethods) {
    if (strategy == Strategy::ZeroShot) continue;
    config.strategy = strategy;
    config.n_demos = n;
    cmd_generate(config, make_services(config));
    for (const auto& row : read_rows(generations_path(config))) {
      for (const auto& d : row["demo_ids"]) EXPECT_NE(d, row["id"]) << strategy_name(strategy);
    }
  }
}

TEST(Experiment, FailedCallsAreRecordedAndScoredZero) {
  const auto ws = testdata::make_workspace("failures", 40, 8);
  auto config = testdata::workspace_config(ws);
  Services services = make_services(config);
  MockBackend::Options opts;
  opts.fail_request_ids = {"ast_icl_top-2/test-3"};
  services.backend = std::make_shared<MockBackend>(opts);
  const auto gen = cmd_generate(config, services);
  EXPECT_EQ(gen.failures, 1u);
  EXPECT_EQ(gen.exit_code(), 2);
  const auto rows = read_rows(generations_path(config));
  EXPECT_TRUE(rows[3]["output"].is_null());
  EXPECT_EQ(rows[3]["error_kind"], "TransportError");
  const auto eval = cmd_evaluate(config, services);
  EXPECT_EQ(eval.failures, 1u);
  const auto report = nlohmann::json::parse(testdata::slurp(ws.out / "report.json"));
  EXPECT_EQ(report["methods"][0]["samples"][3]["bleu"], 0.0);
  EXPECT_EQ(report["methods"][0]["overall"]["count"], 8);
}

TEST(Experiment, MissingReferenceIsFatal) {
  const auto ws = testdata::make_workspace("missing_ref", 40, 3);
  auto config = testdata::workspace_config(ws);
  fs::create_directories(ws.out);
  std::ofstream(ws.out / "generations-random-2.jsonl")
      << R"({"id":"nope","strategy":"random","n":2,"output":"x"})" << "\n";
  EXPECT_THROW(cmd_evaluate(config, make_services(config)), MissingReference);

  // A test record with no reference at all.
  std::ofstream(ws.test) << R"({"id":"bare","sql":"SELECT 1","split":"test"})" << "\n";
  std::ofstream(ws.out / "generations-random-2.jsonl")
      << R"({"id":"bare","strategy":"random","n":2,"output":"x"})" << "\n";
  EXPECT_THROW(cmd_evaluate(config, make_services(config)), MissingReference);
}

TEST(Experiment, SingleReferenceModeUsesOnlyTheGold) {
  const auto ws = testdata::make_workspace("single_ref", 40, 5);
  auto config = testdata::workspace_config(ws);
  config.strategy = Strategy::ZeroShot;
  config.n_demos = 0;
  fs::create_directories(ws.out);
  const auto tests = load_dataset(ws.test, DatasetFormat::S2tJsonl, Split::Test).records;
  {
    std::ofstream out(ws.out / "generations-zero_shot-0.jsonl");
    for (const auto& t : tests) {
      out << nlohmann::json{{"id", t.id}, {"strategy", "zero_shot"}, {"n", 0}, {"output", t.generated[0]}}.dump()
          << "\n";
    }
  }
  const auto services = make_services(config);
  cmd_evaluate(config, services);
  const auto multi = nlohmann::json::parse(testdata::slurp(ws.out / "report.json"));
  EXPECT_DOUBLE_EQ(multi["methods"][0]["overall"]["bleu"].get<double>(), 1.0);
  config.reference_mode = "single";
  cmd_evaluate(config, services);
  const auto single = nlohmann::json::parse(testdata::slurp(ws.out / "report.json"));
  EXPECT_LT(single["methods"][0]["overall"]["bleu"].get<double>(), 1.0);
  EXPECT_EQ(single["reference_mode"], "single");
}

TEST(Experiment, IdenticalMethodsGetNoMarkers) {
  const auto ws = testdata::make_workspace("identical", 60, 20);
  auto config = testdata::workspace_config(ws);
  Services services = make_services(config);
  services.backend = std::make_shared<MockBackend>(MockBackend::Options{.rule = MockRule::Echo});
  cmd_index(config, services);
  for (const auto s : {Strategy::Random, Strategy::AstIclTop}) {
    config.strategy = s;
    cmd_generate(config, services);
  }
  cmd_evaluate(config, services);
  const auto report = nlohmann::json::parse(testdata::slurp(ws.out / "report.json"));
  for (const auto& m : report["methods"]) {
    for (const auto& sig : m["significance"]) EXPECT_FALSE(sig["marker"].get<bool>());
  }
  EXPECT_EQ(testdata::slurp(ws.out / "report.txt").find("†\n"), std::string::npos);
}

TEST(Experiment, ReportRerendersAndDetectsTampering) {
  const auto ws = testdata::make_workspace("report", 60, 10);
  auto config = testdata::workspace_config(ws);
  testdata::run_pipeline(config, {{Strategy::Random, 2}, {Strategy::AstIclTop, 2}});
  const std::string table = testdata::slurp(ws.out / "report.txt");
  fs::remove(ws.out / "report.txt");
  EXPECT_EQ(cmd_report(config).exit_code(), 0);
  EXPECT_EQ(testdata::slurp(ws.out / "report.txt"), table);

  auto j = nlohmann::json::parse(testdata::slurp(ws.out / "report.json"));
  j["methods"][0]["overall"]["bleu"] = j["methods"][0]["overall"]["bleu"].get<double>() + 1e-6;
  std::ofstream(ws.out / "report.json") << j.dump(2);
  EXPECT_THROW(cmd_report(config), Error);
}

TEST(Experiment, IndexIsReusedWhenInputsMatch) {
  const auto ws = testdata::make_workspace("reuse", 60, 4);
  auto config = testdata::workspace_config(ws);
  cmd_index(config, make_services(config));
  const auto index_before = testdata::slurp(ws.out / "index.json");
  const auto a = prepare_pool(config, false);
  EXPECT_EQ(a.pool.size(), 60u);
  config.k = 6;  // a different build key forces a rebuild
  const auto b = prepare_pool(config, true);
  EXPECT_EQ(b.index.k, 6u);
  EXPECT_NE(testdata::slurp(ws.out / "index.json"), index_before);
}

TEST(Experiment, LockBlocksConcurrentRuns) {
  const auto ws = testdata::make_workspace("lock", 20, 2);
  auto config = testdata::workspace_config(ws);
  OutputLock held(config.out_dir);
  EXPECT_THROW(cmd_index(config, make_services(config)), ConfigError);
}

TEST(Experiment, RepurposeWithMock) {
  const auto ws = testdata::make_workspace("repurpose", 12, 2);
  auto config = testdata::workspace_config(ws);
  config.repurpose_input = ws.train;
  // One record gets a reply missing its refinement step.
  const auto train = load_dataset(ws.train, DatasetFormat::S2tJsonl).records;
  const auto responses = ws.root / "responses.jsonl";
  std::ofstream(responses) << nlohmann::json{{"sql", train[4].sql},
                                             {"response", R"({"Generated Variations": ["a", "b", "c"]})"}}
                                  .dump()
                           << "\n";
  config.mock_responses = responses;
  const auto services = make_services(config);
  const auto summary = cmd_repurpose(config, services);
  std::size_t same_sql = 0;
  for (const auto& r : train) same_sql += r.sql == train[4].sql;
  EXPECT_EQ(summary.failures, same_sql);
  EXPECT_EQ(summary.exit_code(), 2);

  const auto out = load_dataset(ws.out / "repurposed.jsonl", DatasetFormat::S2tJsonl).records;
  EXPECT_EQ(out.size(), train.size() - same_sql);
  for (const auto& r : out) EXPECT_EQ(r.generated.size(), 3u);
  const auto rejects = read_rows(ws.out / "rejects.jsonl");
  ASSERT_EQ(rejects.size(), same_sql);
  EXPECT_EQ(rejects[0]["stage"], "parse");
  EXPECT_EQ(rejects[0]["step"], 2);
  const auto quality = nlohmann::json::parse(testdata::slurp(ws.out / "quality_report.json"));
  EXPECT_EQ(quality["accepted"], out.size());
  EXPECT_EQ(quality["delta_metric"], "embed_sim");
  EXPECT_EQ(read_rows(ws.out / "calls-repurpose.jsonl").size(), train.size());
}

TEST(Experiment, RepurposeThroughRemoteBackend) {
  const auto ws = testdata::make_workspace("repurpose_remote", 10, 1);
  auto config = testdata::workspace_config(ws);
  config.repurpose_input = ws.train;
  const std::string reply = testdata::slurp(std::string(S2T_TEST_DATA_DIR) + "/flight_example.txt");
  testdata::FakeServer server([&](const httplib::Request&, int) {
    const nlohmann::json body = {{"choices", {{{"message", {{"role", "assistant"}, {"content", reply}}}}}},
                                 {"usage", {{"prompt_tokens", 900}, {"completion_tokens", 400}}}};
    return testdata::FakeReply{200, body.dump()};
  });
  Services services = make_services(config);
  RemoteConfig remote;
  remote.base_url = server.url();
  remote.api_key = "test-key";
  services.backend = std::make_shared<RemoteBackend>(remote);
  const auto summary = cmd_repurpose(config, services);
  EXPECT_EQ(summary.exit_code(), 0);

  const auto requests = server.requests();
  ASSERT_EQ(requests.size(), 10u);
  for (const auto& r : requests) {
    EXPECT_EQ(r.get_header_value("Authorization"), "Bearer test-key");
    EXPECT_TRUE(r.get_header_value("Idempotency-Key").starts_with("repurpose/"));
  }
  const auto quality = nlohmann::json::parse(testdata::slurp(ws.out / "quality_report.json"));
  EXPECT_EQ(quality["accepted"], 10);
  EXPECT_EQ(quality["utterances_generated"], 30);
  EXPECT_EQ(quality["utterances_kept"], 30);
  // gpt-4o list prices: 10 x (900 in + 400 out) tokens.
  EXPECT_NEAR(quality["cost_usd"].get<double>(), 10 * (900 * 5e-6 + 400 * 15e-6), 1e-12);
}

TEST(Experiment, TuneKWritesSweep) {
  const auto ws = testdata::make_workspace("tune_k", 50, 2);
  auto config = testdata::workspace_config(ws);
  config.tune_k_min = 2;
  config.tune_k_max = 6;
  cmd_tune_k(config, make_services(config));
  const auto j = nlohmann::json::parse(testdata::slurp(ws.out / "tune_k.json"));
  EXPECT_EQ(j["scores"].size(), 5u);
  EXPECT_GE(j["best_k"].get<int>(), 2);
}

TEST(CleanGeneration, FirstLineWithoutPrefix) {
  EXPECT_EQ(clean_generation("\n  Question: How many dogs?\nSQL: SELECT"), "How many dogs?");
  EXPECT_EQ(clean_generation("Plain answer  "), "Plain answer");
  EXPECT_EQ(clean_generation("Question:\n\n"), "");
}

TEST(Config, LoadApplyAndRender) {
  const auto dir = fs::temp_directory_path() / "s2t_config_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ofstream(dir / "run.conf") << "# comment\n"
                                     "train = data/train.jsonl\n"
                                     "test=data/test.jsonl  # trailing\n"
                                     "strategy = bm25\n"
                                     "n_demos = 4\n"
                                     "alpha = 0.01\n";
  auto c = load_config(dir / "run.conf");
  EXPECT_EQ(c.train_path, dir / "data/train.jsonl");
  EXPECT_EQ(c.strategy, Strategy::Bm25);
  EXPECT_EQ(c.n_demos, 4u);
  EXPECT_EQ(c.alpha, 0.01);
  EXPECT_NO_THROW(c.validate());

  std::ofstream(dir / "frozen.conf") << render_config(c);
  const auto back = load_config(dir / "frozen.conf");
  EXPECT_EQ(config_entries(back), config_entries(c));

  apply_setting(c, "strategy", "zero_shot");
  EXPECT_EQ(c.n_demos, 0u);
  EXPECT_NO_THROW(c.validate());
  EXPECT_THROW(apply_setting(c, "no_such_key", "1"), ConfigError);
  EXPECT_THROW(apply_setting(c, "n_demos", "two"), ConfigError);
  EXPECT_THROW(apply_setting(c, "strategy", "magic"), ConfigError);
  std::ofstream(dir / "bad.conf") << "just words\n";
  EXPECT_THROW(load_config(dir / "bad.conf"), ConfigError);
  EXPECT_THROW(load_config(dir / "absent.conf"), ConfigError);
  fs::remove_all(dir);
}

TEST(Config, ValidationRules) {
  ExperimentConfig c;
  EXPECT_NO_THROW(c.validate());
  c.n_demos = 3;
  EXPECT_THROW(c.validate(), ConfigError);
  c.n_demos = 8;
  EXPECT_NO_THROW(c.validate());
  c.strategy = Strategy::ZeroShot;
  EXPECT_THROW(c.validate(), ConfigError);
  ExperimentConfig d;
  d.backend = "carrier-pigeon";
  EXPECT_THROW(d.validate(), ConfigError);
  ExperimentConfig e;
  e.alpha = 1.5;
  EXPECT_THROW(e.validate(), ConfigError);
  EXPECT_THROW(make_services(d), ConfigError);
}

}  // namespace
}  // namespace s2t
