#include "s2t/experiment.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "s2t/dataset_io.hpp"
#include "s2t/error.hpp"
#include "s2t/hash.hpp"
#include "s2t/prompt_builder.hpp"
#include "s2t/rng.hpp"
#include "s2t/sql_ast.hpp"

namespace s2t {
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<nlohmann::json> read_jsonl(const fs::path& path) {
  std::vector<nlohmann::json> out;
  std::istringstream in(read_text(path));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) throw SchemaError(line_no, "<line>", "not valid JSON in " + path.string());
    out.push_back(std::move(j));
  }
  return out;
}

std::string jsonl(const std::vector<nlohmann::ordered_json>& rows) {
  std::string out;
  for (const auto& r : rows) {
    out += r.dump();
    out += '\n';
  }
  return out;
}

void write_resolved_config(const ExperimentConfig& config) {
  write_text(config.out_dir / "config.resolved", render_config(config));
}

std::string file_hash(const fs::path& path) { return text_hash(read_text(path)); }

TemplateRegistry make_registry(const ExperimentConfig& config) {
  return config.template_dir.empty() ? TemplateRegistry::builtin()
                                     : TemplateRegistry::from_directory(config.template_dir);
}

QueryType query_type_of(const QueryRecord& r) {
  if (r.query_type) return *r.query_type;
  try {
    return classify_query(parse_sql(r.sql));
  } catch (const Error&) {
    return QueryType::Simple;
  }
}

std::vector<QueryRecord> load_records(const fs::path& path, DatasetFormat format, Split split,
                                      std::string_view what) {
  if (path.empty()) throw ConfigError("no " + std::string(what) + " dataset configured");
  return load_dataset(path, format, split).records;
}

std::string index_key(const ExperimentConfig& config, const std::string& train_hash) {
  return text_hash(train_hash + "/" + std::to_string(config.encoder_seed) + "/" + std::to_string(config.k) +
                   "/" + std::to_string(config.seed) + "/" + std::to_string(config.kmeans_restarts));
}

PreparedPool build_pool(const ExperimentConfig& config, nlohmann::ordered_json& timings) {
  auto phase = Clock::now();
  auto records = load_records(config.train_path, config.dataset_format, Split::Train, "training");
  timings["load_s"] = seconds_since(phase);

  phase = Clock::now();
  PreparedPool out;
  std::vector<QueryRecord> kept;
  std::vector<AstGraph> graphs;
  for (auto& r : records) {
    if (!primary_reference(r)) {
      ++out.skipped;
      continue;
    }
    try {
      graphs.push_back(parse_sql(r.sql));
      kept.push_back(std::move(r));
    } catch (const Error&) {
      ++out.skipped;
    }
  }
  timings["parse_s"] = seconds_since(phase);

  phase = Clock::now();
  out.vocab = TokenVocab::build(graphs);
  for (auto& g : graphs) g = tokenize(std::move(g), out.vocab);
  out.params = init_params(out.vocab.size(), config.encoder_seed);
  auto embeddings = encode_all(graphs, out.params);
  timings["encode_s"] = seconds_since(phase);

  phase = Clock::now();
  out.pool = DemoPool::build(std::move(kept), std::move(embeddings));
  IndexOptions io;
  io.k = config.k;
  io.seed = config.seed;
  io.n_init = config.kmeans_restarts;
  out.index = build_index(out.pool, io, params_fingerprint(out.params, out.vocab));
  timings["cluster_s"] = seconds_since(phase);
  return out;
}

nlohmann::ordered_json index_file(const PreparedPool& p, const std::string& key) {
  auto j = p.index.to_json();
  j["build_key"] = key;
  j["skipped"] = p.skipped;
  auto& pool = j["pool"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < p.pool.size(); ++i) {
    pool.push_back({{"id", p.pool.records[i].id},
                    {"embedding", {p.pool.embeddings[i][0], p.pool.embeddings[i][1]}}});
  }
  return j;
}

std::optional<PreparedPool> try_load_pool(const ExperimentConfig& config, const std::string& key) {
  const auto index_path = config.out_dir / "index.json";
  const auto encoder_path = config.out_dir / "encoder.json";
  if (!fs::exists(index_path) || !fs::exists(encoder_path)) return std::nullopt;
  const auto ij = nlohmann::json::parse(read_text(index_path), nullptr, false);
  const auto ej = nlohmann::json::parse(read_text(encoder_path), nullptr, false);
  if (ij.is_discarded() || ej.is_discarded() || ij.value("build_key", "") != key) return std::nullopt;

  PreparedPool out;
  out.vocab = TokenVocab::from_json(ej.at("vocab"));
  out.params = params_from_json(ej, out.vocab);
  out.index = SelectionIndex::from_json(ij);
  if (out.index.params_hash != params_fingerprint(out.params, out.vocab)) return std::nullopt;
  out.skipped = ij.value("skipped", std::size_t{0});

  auto records = load_records(config.train_path, config.dataset_format, Split::Train, "training");
  std::map<std::string, QueryRecord*> by_id;
  for (auto& r : records) by_id[r.id] = &r;
  std::vector<QueryRecord> kept;
  std::vector<EmbeddingVector> embeddings;
  for (const auto& entry : ij.at("pool")) {
    const auto it = by_id.find(entry.at("id").get<std::string>());
    if (it == by_id.end()) return std::nullopt;
    kept.push_back(*it->second);
    const auto& e = entry.at("embedding");
    embeddings.push_back(EmbeddingVector{{e.at(0).get<double>(), e.at(1).get<double>()}});
  }
  out.pool = DemoPool::build(std::move(kept), std::move(embeddings));
  if (out.index.assignments.size() != out.pool.size()) return std::nullopt;
  return out;
}

std::string method_file_stem(const ExperimentConfig& config) {
  return std::string(strategy_name(config.strategy)) + "-" + std::to_string(config.n_demos);
}

SelectedDemos select_for(const ExperimentConfig& config, const PreparedPool* pool, const QueryRecord& test,
                         const std::optional<EmbeddingVector>& embedding, std::uint64_t seed) {
  if (config.strategy == Strategy::ZeroShot) return SelectedDemos{Strategy::ZeroShot, {}};
  const auto& p = *pool;
  const std::size_t n = config.n_demos;
  const std::optional<std::string_view> exclude = test.id;
  switch (config.strategy) {
    case Strategy::ZeroShot:
      break;
    case Strategy::Random:
      return select_random(p.pool, n, seed, exclude);
    case Strategy::Bm25:
      return select_bm25(test.sql, p.pool, n, exclude);
    case Strategy::AstIcl:
      if (!embedding) throw Error("query could not be encoded");
      return select_ast_icl(*embedding, p.index, p.pool, n, seed, exclude);
    case Strategy::AstIclTop:
      if (!embedding) throw Error("query could not be encoded");
      return select_ast_icl_top(*embedding, p.pool, n, exclude);
  }
  return SelectedDemos{};
}

std::string kind_of(const std::exception& e) {
  if (dynamic_cast<const PoolTooSmall*>(&e)) return "PoolTooSmall";
  if (dynamic_cast<const PromptTooLong*>(&e)) return "PromptTooLong";
  if (dynamic_cast<const ParseError*>(&e)) return "ParseError";
  if (dynamic_cast<const MalformedResponse*>(&e)) return "MalformedResponse";
  return "Error";
}

nlohmann::ordered_json usage_json(const TokenUsage& u) { return {{"prompt", u.prompt}, {"completion", u.completion}}; }

}  // namespace

OutputLock::OutputLock(const fs::path& out_dir) : path_(out_dir / ".lock") {
  fs::create_directories(out_dir);
  const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) {
    if (errno == EEXIST) throw ConfigError("output directory is in use (remove " + path_.string() + " if stale)");
    throw IoError("cannot create " + path_.string() + ": " + std::strerror(errno));
  }
  const std::string pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] const auto written = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

OutputLock::~OutputLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

Services make_services(const ExperimentConfig& config) {
  Services s;
  if (config.backend == "mock") {
    MockBackend::Options opts;
    opts.rule = config.mock_rule;
    if (!config.mock_responses.empty()) {
      for (const auto& j : read_jsonl(config.mock_responses)) {
        opts.responses[MockBackend::mock_key(j.at("sql").get<std::string>())] = j.at("response").get<std::string>();
      }
    }
    s.backend = std::make_shared<MockBackend>(std::move(opts));
  } else if (config.backend == "remote") {
    s.backend = std::make_shared<RemoteBackend>(RemoteConfig::from_env());
  } else {
    throw ConfigError("backend must be mock or remote");
  }
  if (config.embed_provider == "http") {
    const auto remote = RemoteConfig::from_env();
    s.embedder = std::make_shared<HttpEmbeddingProvider>(remote.base_url, config.embed_model, remote.api_key);
  } else {
    s.embedder = std::make_shared<HashingEmbeddingProvider>();
  }
  if (!config.align_url.empty()) {
    auto scorer = std::make_shared<HttpAlignScorer>(config.align_url);
    s.align = [scorer](std::string_view ref, std::string_view cand) { return scorer->score(ref, cand); };
  }
  return s;
}

fs::path generations_path(const ExperimentConfig& config) {
  return config.out_dir / ("generations-" + method_file_stem(config) + ".jsonl");
}

std::string clean_generation(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    std::string_view v(line);
    v.remove_prefix(b);
    if (v.starts_with("Question:")) v.remove_prefix(9);
    const auto s = v.find_first_not_of(" \t");
    if (s == std::string_view::npos) continue;
    v.remove_prefix(s);
    const auto e = v.find_last_not_of(" \t\r");
    return std::string(v.substr(0, e + 1));
  }
  return {};
}

PreparedPool prepare_pool(const ExperimentConfig& config, bool write_files) {
  const std::string key = index_key(config, file_hash(config.train_path));
  if (auto loaded = try_load_pool(config, key)) return std::move(*loaded);

  nlohmann::ordered_json timings;
  const auto start = Clock::now();
  auto pool = build_pool(config, timings);
  if (write_files) {
    const auto phase = Clock::now();
    write_text(config.out_dir / "encoder.json", params_to_json(pool.params, pool.vocab).dump(2) + "\n");
    write_text(config.out_dir / "index.json", index_file(pool, key).dump(2) + "\n");
    timings["write_s"] = seconds_since(phase);
    timings["total_s"] = seconds_since(start);
    timings["pool_size"] = pool.pool.size();
    timings["skipped"] = pool.skipped;
    timings["k"] = config.k;
    write_text(config.out_dir / "timings.json", timings.dump(2) + "\n");
  }
  return pool;
}

RunSummary cmd_index(const ExperimentConfig& config, const Services&) {
  config.validate();
  OutputLock lock(config.out_dir);
  write_resolved_config(config);
  // Always rebuild: index is the command that refreshes the files.
  std::error_code ec;
  fs::remove(config.out_dir / "index.json", ec);
  const auto pool = prepare_pool(config, true);
  RunSummary s;
  s.command = "index";
  s.processed = pool.pool.size();
  s.outputs = {config.out_dir / "encoder.json", config.out_dir / "index.json", config.out_dir / "timings.json"};
  s.message = "indexed " + std::to_string(pool.pool.size()) + " pool records into " + std::to_string(config.k) +
              " clusters (" + std::to_string(pool.skipped) + " skipped)";
  return s;
}

RunSummary cmd_generate(const ExperimentConfig& config, const Services& services) {
  config.validate();
  OutputLock lock(config.out_dir);
  write_resolved_config(config);
  const auto registry = make_registry(config);
  const auto& instruction = instruction_text(registry, config.instruction);
  registry.get(config.template_id);

  // Zero-shot prompts need no pool, so no training split either.
  std::optional<PreparedPool> pool;
  if (config.strategy != Strategy::ZeroShot) pool = prepare_pool(config, true);
  const auto tests = load_records(config.test_path, config.dataset_format, Split::Test, "test");

  struct Pending {
    nlohmann::ordered_json row;
    std::optional<std::size_t> request;
  };
  std::vector<Pending> rows;
  std::vector<GenerationRequest> requests;
  const std::string method = method_file_stem(config);
  for (const auto& test : tests) {
    nlohmann::ordered_json row;
    const std::uint64_t seed = derive_seed(config.seed, fnv1a64(test.id));
    row["id"] = test.id;
    row["generation_id"] = method + "/" + test.id;
    row["strategy"] = strategy_name(config.strategy);
    row["n"] = config.n_demos;
    row["selection_seed"] = seed;
    try {
      std::optional<EmbeddingVector> embedding;
      if (config.strategy == Strategy::AstIcl || config.strategy == Strategy::AstIclTop) {
        embedding = encode(tokenize(parse_sql(test.sql), pool->vocab), pool->params);
      }
      const auto selected = select_for(config, pool ? &*pool : nullptr, test, embedding, seed);
      const auto demos = order_for_prompt(selected, config.demo_order, seed);
      auto& ids = row["demo_ids"] = nlohmann::ordered_json::array();
      for (const auto& d : demos) ids.push_back(d.id);
      const auto prompt = build_icl_prompt(instruction, demos, test.sql, config.template_id, registry,
                                           config.context_budget);
      row["prompt_hash"] = text_hash(prompt);
      GenerationRequest req;
      req.model = config.model;
      req.user_text = prompt;
      req.max_tokens = config.max_tokens;
      req.temperature = config.temperature;
      req.request_id = row["generation_id"].get<std::string>();
      rows.push_back({std::move(row), requests.size()});
      requests.push_back(std::move(req));
    } catch (const Error& e) {
      row["output"] = nullptr;
      row["error_kind"] = kind_of(e);
      row["error"] = e.what();
      rows.push_back({std::move(row), std::nullopt});
    }
  }

  const auto results = run_batch(*services.backend, requests, config.concurrency, services.prices);
  RunSummary s;
  s.command = "generate";
  std::vector<nlohmann::ordered_json> out_rows;
  std::vector<nlohmann::ordered_json> calls;
  double cost = 0.0;
  for (auto& p : rows) {
    if (p.request) {
      const auto& entry = results[*p.request];
      calls.push_back(call_log_record(requests[*p.request], entry));
      if (entry.ok()) {
        p.row["output"] = clean_generation(entry.result->text);
        p.row["usage"] = usage_json(entry.result->usage);
        cost += entry.result->cost_usd;
      } else {
        p.row["output"] = nullptr;
        p.row["error_kind"] = entry.error_kind;
        p.row["error"] = entry.error;
      }
    }
    if (p.row["output"].is_null()) ++s.failures;
    ++s.processed;
    out_rows.push_back(std::move(p.row));
  }
  const auto gen_path = generations_path(config);
  const auto calls_path = config.out_dir / ("calls-" + method + ".jsonl");
  write_text(gen_path, jsonl(out_rows));
  write_text(calls_path, jsonl(calls));
  s.outputs = {gen_path, calls_path};
  std::ostringstream msg;
  msg << "generated " << (s.processed - s.failures) << "/" << s.processed << " captions with " << method
      << " (cost $" << cost << ")";
  s.message = msg.str();
  return s;
}

RunSummary cmd_repurpose(const ExperimentConfig& config, const Services& services) {
  config.validate();
  OutputLock lock(config.out_dir);
  write_resolved_config(config);
  const auto registry = make_registry(config);
  const fs::path input = config.repurpose_input.empty() ? config.train_path : config.repurpose_input;
  auto records = load_records(input, config.repurpose_format, Split::Train, "repurpose");

  std::vector<GenerationRequest> requests;
  for (const auto& r : records) {
    const auto prompt = build_iterative_prompt(r.sql, registry);
    GenerationRequest req;
    req.model = config.model;
    req.system_text = prompt.system_text;
    req.user_text = prompt.user_text;
    req.max_tokens = std::max(config.max_tokens, 1024);
    req.temperature = config.temperature;
    req.request_id = "repurpose/" + r.id;
    requests.push_back(std::move(req));
  }
  const auto results = run_batch(*services.backend, requests, config.concurrency, services.prices);

  EmbeddingCache cache(services.embedder);
  QualityScorers scorers;
  scorers.embed = [&cache](std::string_view ref, std::string_view cand) -> std::optional<double> {
    const std::string refs[] = {std::string(ref)};
    try {
      return embed_similarity(cand, refs, cache);
    } catch (const EmptyCandidate&) {
      return 0.0;
    }
  };
  scorers.align = services.align;
  const PairScorer& delta_scorer = scorers.align ? scorers.align : scorers.embed;

  RunSummary s;
  s.command = "repurpose";
  std::vector<QueryRecord> accepted;
  std::vector<nlohmann::ordered_json> rejects;
  std::vector<nlohmann::ordered_json> calls;
  CostLedger ledger;
  std::size_t finals = 0;
  std::size_t improved = 0;
  std::size_t compared = 0;
  bool align_used = false;
  for (std::size_t i = 0; i < records.size(); ++i) {
    ++s.processed;
    const auto& entry = results[i];
    calls.push_back(call_log_record(requests[i], entry));
    if (!entry.ok()) {
      rejects.push_back({{"id", records[i].id}, {"stage", "call"}, {"error_kind", entry.error_kind},
                         {"reason", entry.error}});
      continue;
    }
    ledger.add(requests[i].request_id, entry.result->cost_usd);
    IterativeResponse parsed;
    try {
      parsed = parse_iterative_response(entry.result->text);
    } catch (const MalformedResponse& e) {
      rejects.push_back({{"id", records[i].id}, {"stage", "parse"}, {"step", e.step()}, {"reason", e.what()}});
      continue;
    }
    finals += parsed.final_variations.size();
    QueryRecord out = records[i];
    if (out.utterance && !out.utterance->empty()) {
      std::vector<std::string> candidates(parsed.initial.begin(), parsed.initial.end());
      candidates.insert(candidates.end(), parsed.final_variations.begin(), parsed.final_variations.end());
      const auto filtered = quality_filter(*out.utterance, candidates, scorers);
      align_used = align_used || filtered.align_used;
      out.generated = filtered.texts;
      for (std::size_t v = 0; v < 3; ++v) {
        const auto before = delta_scorer(*out.utterance, parsed.initial[v]);
        const auto after = delta_scorer(*out.utterance, parsed.final_variations[v]);
        if (!before || !after) continue;
        ++compared;
        if (*after > *before) ++improved;
      }
    } else {
      // Nothing to rank against: keep the refined set as produced.
      out.generated.assign(parsed.final_variations.begin(), parsed.final_variations.end());
    }
    accepted.push_back(std::move(out));
  }
  s.failures = rejects.size();

  const auto data_path = config.out_dir / "repurposed.jsonl";
  const auto manifest = write_dataset(accepted, data_path, config.seed);
  write_text(config.out_dir / "rejects.jsonl", jsonl(rejects));
  write_text(config.out_dir / "calls-repurpose.jsonl", jsonl(calls));
  nlohmann::ordered_json q;
  q["records"] = records.size();
  q["accepted"] = accepted.size();
  q["rejected"] = rejects.size();
  q["utterances_generated"] = finals;
  q["utterances_kept"] = manifest.generated;
  q["delta_metric"] = scorers.align ? "align" : "embed_sim";
  q["improved_finals"] = improved;
  q["compared_pairs"] = compared;
  q["align_used"] = align_used;
  q["cost_usd"] = ledger.total();
  write_text(config.out_dir / "quality_report.json", q.dump(2) + "\n");

  s.outputs = {data_path, manifest_path(data_path), config.out_dir / "rejects.jsonl",
               config.out_dir / "quality_report.json", config.out_dir / "calls-repurpose.jsonl"};
  std::ostringstream msg;
  msg << "repurposed " << accepted.size() << "/" << records.size() << " queries, " << finals
      << " utterances generated, " << rejects.size() << " rejected (cost $" << ledger.total() << ")";
  s.message = msg.str();
  return s;
}

RunSummary cmd_evaluate(const ExperimentConfig& config, const Services& services) {
  config.validate();
  OutputLock lock(config.out_dir);
  const auto tests = load_records(config.test_path, config.dataset_format, Split::Test, "test");
  std::map<std::string, const QueryRecord*> by_id;
  for (const auto& r : tests) by_id[r.id] = &r;

  std::vector<fs::path> files = config.generations;
  if (files.empty()) {
    for (const auto& e : fs::directory_iterator(config.out_dir)) {
      const auto name = e.path().filename().string();
      if (e.is_regular_file() && name.starts_with("generations-") && name.ends_with(".jsonl")) {
        files.push_back(e.path());
      }
    }
    std::sort(files.begin(), files.end());
  }
  if (files.empty()) throw ConfigError("no generation files to evaluate in " + config.out_dir.string());

  EmbeddingCache cache(services.embedder);
  ScoreReport report;
  report.dataset = config.dataset_name;
  report.reference_mode = config.reference_mode;
  report.alpha = config.alpha;
  RunSummary s;
  s.command = "evaluate";
  for (const auto& file : files) {
    MethodScores method;
    bool first = true;
    for (const auto& row : read_jsonl(file)) {
      if (first) {
        method.strategy = row.at("strategy").get<std::string>();
        method.n_demos = row.at("n").get<std::size_t>();
        first = false;
      }
      const auto id = row.at("id").get<std::string>();
      const auto it = by_id.find(id);
      if (it == by_id.end()) throw MissingReference(id);
      std::vector<std::string> refs;
      if (config.reference_mode == "single") {
        if (auto p = primary_reference(*it->second)) refs.push_back(*p);
      } else {
        refs = all_references(*it->second);
      }
      if (refs.empty()) throw MissingReference(id);

      SampleScore score;
      score.id = id;
      score.generation_id = row.value("generation_id", std::string{});
      score.query_type = query_type_of(*it->second);
      const std::string output = row.contains("output") && row["output"].is_string()
                                     ? row["output"].get<std::string>()
                                     : std::string{};
      ++s.processed;
      if (bleu_tokenize(output).empty()) {
        // Failed or empty generations score zero rather than vanish from the pairing.
        ++s.failures;
        score.bleu = 0.0;
        score.embed_sim = 0.0;
        if (services.align) score.align = 0.0;
      } else {
        score.bleu = bleu4(output, refs);
        score.embed_sim = embed_similarity(output, refs, cache);
        if (services.align) {
          std::optional<double> best;
          for (const auto& r : refs) {
            if (const auto a = services.align(r, output)) best = std::max(best.value_or(0.0), *a);
          }
          score.align = best;
        }
      }
      method.samples.push_back(std::move(score));
    }
    if (!first) report.methods.push_back(std::move(method));
  }
  finalize_report(report);
  write_text(config.out_dir / "report.json", report_to_json(report).dump(2) + "\n");
  const auto table = render_table(report);
  write_text(config.out_dir / "report.txt", table);
  s.outputs = {config.out_dir / "report.json", config.out_dir / "report.txt"};
  s.message = table;
  return s;
}

ScoreReport report_from_json(const nlohmann::json& j) {
  ScoreReport report;
  report.dataset = j.value("dataset", std::string{});
  report.bleu_mode = j.value("bleu_mode", report.bleu_mode);
  report.reference_mode = j.value("reference_mode", report.reference_mode);
  report.alpha = j.value("alpha", report.alpha);
  for (const auto& mj : j.at("methods")) {
    MethodScores m;
    m.strategy = mj.at("strategy").get<std::string>();
    m.n_demos = mj.at("n_demos").get<std::size_t>();
    for (const auto& sj : mj.at("samples")) {
      SampleScore s;
      s.id = sj.at("id").get<std::string>();
      s.generation_id = sj.value("generation_id", std::string{});
      if (sj.contains("query_type")) s.query_type = parse_query_type(sj["query_type"].get<std::string>());
      s.bleu = sj.at("bleu").get<double>();
      if (sj.contains("embed_sim")) s.embed_sim = sj["embed_sim"].get<double>();
      if (sj.contains("align")) s.align = sj["align"].get<double>();
      m.samples.push_back(std::move(s));
    }
    report.methods.push_back(std::move(m));
  }
  finalize_report(report);
  return report;
}

RunSummary cmd_report(const ExperimentConfig& config) {
  const auto path = config.out_dir / "report.json";
  const auto j = nlohmann::json::parse(read_text(path), nullptr, false);
  if (j.is_discarded()) throw SchemaError(1, "<file>", path.string() + " is not valid JSON");
  const auto report = report_from_json(j);
  for (std::size_t i = 0; i < report.methods.size(); ++i) {
    const double stored = j["methods"][i]["overall"].at("bleu").get<double>();
    if (std::abs(stored - report.methods[i].overall.bleu) > 1e-12) {
      throw Error("stored mean for " + report.methods[i].label() + " disagrees with its samples");
    }
  }
  OutputLock lock(config.out_dir);
  const auto table = render_table(report);
  write_text(config.out_dir / "report.txt", table);
  RunSummary s;
  s.command = "report";
  s.processed = report.methods.size();
  s.outputs = {config.out_dir / "report.txt"};
  s.message = table;
  return s;
}

RunSummary cmd_tune_k(const ExperimentConfig& config, const Services&) {
  config.validate();
  OutputLock lock(config.out_dir);
  write_resolved_config(config);
  nlohmann::ordered_json timings;
  ExperimentConfig small = config;
  small.k = std::min<std::size_t>(config.k, 2);
  const auto prepared = build_pool(small, timings);
  IndexOptions io;
  io.seed = config.seed;
  io.n_init = config.kmeans_restarts;
  const auto result = tune_k(prepared.pool, config.tune_k_min, config.tune_k_max, io);
  nlohmann::ordered_json j;
  j["best_k"] = result.best_k;
  auto& scores = j["scores"] = nlohmann::ordered_json::array();
  for (const auto& ks : result.scores) scores.push_back({{"k", ks.k}, {"silhouette", ks.silhouette}});
  write_text(config.out_dir / "tune_k.json", j.dump(2) + "\n");
  RunSummary s;
  s.command = "tune-k";
  s.processed = result.scores.size();
  s.outputs = {config.out_dir / "tune_k.json"};
  s.message = "best k = " + std::to_string(result.best_k);
  return s;
}

}  // namespace s2t
