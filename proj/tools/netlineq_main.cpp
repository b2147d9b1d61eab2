#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "netlineq/harness.hpp"
#include "netlineq/kernels.hpp"

namespace {

int cmd_run(const std::string& config_path, const std::string& out_override) {
  netlineq::ExperimentConfig cfg = netlineq::load_config(config_path);
  if (!out_override.empty()) cfg.output = out_override;
  const netlineq::RunResult result = netlineq::run_experiment(cfg);
  if (!cfg.output.empty()) {
    std::fprintf(stderr, "netlineq: trace written to %s (%zu records)\n",
                 cfg.output.c_str(), result.records.size());
  }
  std::cout << netlineq::summary_to_json(result.summary).dump(2) << '\n';
  return 0;
}

int cmd_analyze(const std::string& config_path) {
  const netlineq::ExperimentConfig cfg = netlineq::load_config(config_path);
  const nlohmann::json rep = netlineq::spectral_report(cfg);

  // human-readable companion on stderr; stdout stays machine-parseable
  std::fprintf(stderr, "instance: n=%d agents, m=%d unknowns, %zu graph(s)\n",
               cfg.problem.agent_count(), cfg.problem.unknown_dim(),
               cfg.graphs.size());
  std::fprintf(stderr, "context: %s\n",
               rep.at("context").get<std::string>().c_str());
  std::fprintf(stderr, "lambda2_LLt = %.6g, lambda2_Q11 = %.6g\n",
               rep.at("lambda2_LLt").get<double>(),
               rep.at("lambda2_Q11").get<double>());
  std::fprintf(stderr, "gamma_bar = %.6g\n", rep.at("gamma_bar").get<double>());
  if (!rep.at("central_rate_bound").is_null()) {
    std::fprintf(stderr, "central_rate_bound = %.6g\n",
                 rep.at("central_rate_bound").get<double>());
  }
  std::fprintf(stderr, "has_solution = %s, nullspace_condition = %s\n",
               rep.at("has_solution").get<bool>() ? "yes" : "no",
               rep.at("nullspace_condition").get<bool>() ? "yes" : "no");

  std::cout << rep.dump(2) << '\n';
  return 0;
}

int cmd_balance(const std::string& graph_path, const std::string& out_path) {
  const netlineq::Digraph g = netlineq::Digraph::load(graph_path);
  const netlineq::Digraph balanced = netlineq::balance_by_head_scaling(g);
  balanced.save(out_path);
  std::fprintf(stderr, "netlineq: balanced graph written to %s\n",
               out_path.c_str());
  return 0;
}

int cmd_validate(const std::string& config_path) {
  const netlineq::ExperimentConfig cfg = netlineq::load_config(config_path);
  const netlineq::ValidationReport report = netlineq::validate_experiment(cfg);
  for (const std::string& e : report.errors) {
    std::printf("error: %s\n", e.c_str());
  }
  for (const std::string& w : report.warnings) {
    std::printf("warning: %s\n", w.c_str());
  }
  if (report.ok()) {
    std::printf("ok: config %s passes hypothesis checks\n",
                cfg.config_hash.c_str());
    return 0;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"netlineq: distributed linear-equation solver simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::string graph_path;

  CLI::App* run = app.add_subcommand("run", "execute a config, emit CSV + summary");
  run->add_option("config", config_path, "experiment config (JSON)")->required();
  run->add_option("--out", out_path, "CSV output path (overrides config)");

  CLI::App* analyze =
      app.add_subcommand("analyze", "spectral report without simulation");
  analyze->add_option("config", config_path, "experiment config (JSON)")->required();

  CLI::App* balance =
      app.add_subcommand("balance", "head-scaling weight balancing");
  balance->add_option("graph", graph_path, "graph file (JSON)")->required();
  balance->add_option("--out", out_path, "output graph file")->required();

  CLI::App* validate =
      app.add_subcommand("validate", "schema + hypothesis checks only");
  validate->add_option("config", config_path, "experiment config (JSON)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, out_path);
    if (analyze->parsed()) return cmd_analyze(config_path);
    if (balance->parsed()) return cmd_balance(graph_path, out_path);
    if (validate->parsed()) return cmd_validate(config_path);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "netlineq: error: %s\n", e.what());
    return 1;
  }
  return 0;
}
