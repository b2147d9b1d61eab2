#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "netlineq/dynamics.hpp"
#include "netlineq/spectral.hpp"

namespace netlineq {

struct SimBlock {
  double dt = 2.5e-3;
  std::int64_t steps = 20000;
  std::int64_t record_every = 10;
};

struct AlgorithmConfig {
  AlgorithmKind kind = AlgorithmKind::gdac;
  double alpha = 1.0;
  double beta = 1.0;
  std::optional<double> gamma;       // explicit gain
  std::optional<double> auto_gamma;  // multiplier c: gamma = c * gamma_bar
};

struct InitOverride {
  std::optional<Eigen::VectorXd> x;
  std::optional<Eigen::VectorXd> y;
};

struct ExperimentConfig {
  std::vector<Digraph> graphs;
  SwitchingPolicy switching;
  NetworkProblem problem;
  AlgorithmConfig algorithm;
  SimBlock sim;
  InitOverride init;
  std::string output;       // CSV path; empty = no file
  std::string config_hash;  // FNV-1a of the config file bytes, hex
};

// Parses and fully validates the JSON config; file references are resolved
// relative to the config's directory. The NETLINEQ_SEED environment variable
// overrides the problem-generator and switching seeds.
ExperimentConfig load_config(const std::string& path);

// Hypothesis checks before a run. errors are hard (run_experiment throws);
// warnings are printed and the run proceeds.
struct ValidationReport {
  std::vector<std::string> errors;
  std::vector<std::string> warnings;
  bool ok() const { return errors.empty(); }
};
ValidationReport validate_experiment(const ExperimentConfig& cfg);

// Explicit gamma, or auto_gamma * gamma_bar of the matching context
// (auto_gamma itself when the threshold clamps to zero).
double resolve_gamma(const ExperimentConfig& cfg);

struct RunRecord {
  std::int64_t step = 0;
  double t = 0.0;
  double err_avg = 0.0;
  double err_full = 0.0;
  double consensus_spread = 0.0;
  std::optional<double> e_norm;
  std::optional<double> conserved_drift;
  double objective = 0.0;
};

struct RunSummary {
  std::string config_hash;
  std::string algorithm;
  double alpha = 0.0;
  double beta = 0.0;
  std::optional<double> gamma;      // resolved value
  std::optional<double> gamma_bar;  // threshold used for auto resolution
  std::int64_t steps = 0;
  double dt = 0.0;
  double final_err_avg = 0.0;
  double final_err_full = 0.0;
  std::optional<double> max_conserved_drift;
  std::optional<double> slope;  // fitted ln(err_avg) decay per unit time
  std::optional<double> r_squared;
  std::optional<double> min_v_entry;      // dist: min over time and agents
  std::optional<double> max_vsum_drift;   // dist: max |sum v - 1|
  std::optional<double> final_v_error;    // dist: ||v(T) - vbar||
  std::vector<std::string> warnings;
};

struct RunResult {
  std::vector<RunRecord> records;
  RunSummary summary;
  SolverState final_state;
  Eigen::VectorXd xstar;
};

// Integrates the configured algorithm, records metrics every record_every
// steps plus the final step, writes the CSV when an output path is set.
// Deterministic: identical configs give byte-identical CSV.
RunResult run_experiment(const ExperimentConfig& cfg);

// Least-squares fit of ln(err_avg) against t over the central window of the
// records with err_avg above the 1e-13 floor: the first `lo` and last
// (1 - hi) fractions are dropped. Returns (slope, r_squared); throws when
// fewer than 10 usable records remain.
std::pair<double, double> fit_decay_rate(const std::vector<RunRecord>& records,
                                         double lo = 0.1, double hi = 0.9);

// Spectral certificates of the configured instance, no simulation.
nlohmann::json spectral_report(const ExperimentConfig& cfg);

nlohmann::json summary_to_json(const RunSummary& s);

void write_csv(std::ostream& out, const std::vector<RunRecord>& records);
std::string to_csv(const std::vector<RunRecord>& records);

}  // namespace netlineq
