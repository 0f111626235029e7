// s2t: build demonstration indexes, caption SQL with an LLM, repurpose
// Text2SQL corpora and score the results.
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "s2t/error.hpp"
#include "s2t/experiment.hpp"

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::string> strategy;
  std::optional<std::size_t> n;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> backend;
  std::optional<std::string> out;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "key = value experiment file");
  cmd->add_option("--strategy", f.strategy, "zero_shot | random | bm25 | ast_icl | ast_icl_top");
  cmd->add_option("--n", f.n, "demonstrations per prompt (2, 4 or 8)");
  cmd->add_option("--seed", f.seed, "selection / clustering seed");
  cmd->add_option("--backend", f.backend, "mock | remote");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--set", f.overrides, "extra key=value override (repeatable)");
}

s2t::ExperimentConfig resolve(const CommonFlags& f) {
  s2t::ExperimentConfig c = f.config.empty() ? s2t::ExperimentConfig{} : s2t::load_config(f.config);
  if (const char* model = std::getenv("S2T_MODEL"); model && *model) c.model = model;
  for (const auto& kv : f.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw s2t::ConfigError("--set expects key=value, got '" + kv + "'");
    s2t::apply_setting(c, kv.substr(0, eq), kv.substr(eq + 1));
  }
  // Strategy before n so that zero_shot resets the demo count first.
  if (f.strategy) s2t::apply_setting(c, "strategy", *f.strategy);
  if (f.n) c.n_demos = *f.n;
  if (f.seed) c.seed = *f.seed;
  if (f.backend) c.backend = *f.backend;
  if (f.out) c.out_dir = *f.out;
  c.validate();
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SQL-to-text captioning with AST-guided demonstration selection"};
  app.require_subcommand(1);
  CommonFlags flags;
  struct Command {
    const char* name;
    const char* help;
  };
  const Command commands[] = {
      {"index", "encode the training pool and build the k-means selection index"},
      {"generate", "caption every test query with the configured strategy"},
      {"repurpose", "run the generate / review / refine prompt over a dataset"},
      {"evaluate", "score generation files and write the results table"},
      {"report", "re-render the results table from report.json"},
      {"tune-k", "pick k by silhouette score"},
  };
  for (const auto& c : commands) add_common(app.add_subcommand(c.name, c.help), flags);

  CLI11_PARSE(app, argc, argv);
  const std::string name = app.get_subcommands().front()->get_name();
  try {
    const auto config = resolve(flags);
    s2t::RunSummary summary;
    if (name == "report") {
      summary = s2t::cmd_report(config);
    } else {
      const auto services = s2t::make_services(config);
      if (name == "index") summary = s2t::cmd_index(config, services);
      if (name == "generate") summary = s2t::cmd_generate(config, services);
      if (name == "repurpose") summary = s2t::cmd_repurpose(config, services);
      if (name == "evaluate") summary = s2t::cmd_evaluate(config, services);
      if (name == "tune-k") summary = s2t::cmd_tune_k(config, services);
    }
    std::cout << summary.message;
    if (summary.message.empty() || summary.message.back() != '\n') std::cout << '\n';
    if (summary.failures > 0) {
      std::cerr << summary.failures << " record(s) failed; see the output files for details\n";
    }
    return summary.exit_code();
  } catch (const s2t::Error& e) {
    std::cerr << "s2t " << name << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "s2t " << name << ": unexpected failure: " << e.what() << "\n";
    return 1;
  }
}
