#include "netlineq/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

namespace netlineq {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open file: " + path);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return std::string(buf);
}

std::optional<std::uint64_t> env_seed_override() {
  const char* env = std::getenv("NETLINEQ_SEED");
  if (!env || !*env) return std::nullopt;
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(env, env + std::strlen(env), value);
  if (ec != std::errc() || *ptr != '\0') {
    throw ConfigError(std::string("NETLINEQ_SEED is not an integer: ") + env);
  }
  return value;
}

// Graph/problem nodes are either a path string or an inline object.
std::string resolve_ref(const nlohmann::json& node,
                        const std::filesystem::path& base) {
  if (node.is_string()) {
    const std::filesystem::path p(node.get<std::string>());
    const auto full = p.is_absolute() ? p : base / p;
    return read_file(full.string());
  }
  return node.dump();
}

Eigen::VectorXd vector_from_json(const nlohmann::json& node,
                                 const std::string& field) {
  if (!node.is_array()) throw ConfigError("config: " + field + " must be an array");
  Eigen::VectorXd v(node.size());
  for (std::size_t i = 0; i < node.size(); ++i) v(i) = node[i].get<double>();
  return v;
}

void append_double(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

GammaCertificate certificate_for(const ExperimentConfig& cfg) {
  switch (cfg.algorithm.kind) {
    case AlgorithmKind::gdac_tv:
      return certify_timevarying(cfg.problem, cfg.graphs, cfg.algorithm.alpha,
                                 cfg.algorithm.beta);
    case AlgorithmKind::unbalanced_fixed_v:
    case AlgorithmKind::dist:
      return certify_unbalanced(cfg.problem, cfg.graphs.front(),
                                cfg.algorithm.alpha, cfg.algorithm.beta);
    default:
      return certify_balanced(cfg.problem, cfg.graphs.front(),
                              cfg.algorithm.alpha, cfg.algorithm.beta);
  }
}

}  // namespace

ExperimentConfig load_config(const std::string& path) {
  const std::string text = read_file(path);
  const std::filesystem::path base =
      std::filesystem::path(path).parent_path();

  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }

  const auto seed_override = env_seed_override();

  try {
    // graphs
    std::vector<Digraph> graphs;
    if (j.contains("graph") == j.contains("graphs")) {
      throw ConfigError("config: exactly one of 'graph' or 'graphs' required");
    }
    if (j.contains("graph")) {
      graphs.push_back(Digraph::parse(resolve_ref(j.at("graph"), base)));
    } else {
      for (const auto& node : j.at("graphs")) {
        graphs.push_back(Digraph::parse(resolve_ref(node, base)));
      }
      if (graphs.empty()) throw ConfigError("config: 'graphs' is empty");
    }

    // switching
    SwitchingPolicy switching = SwitchingPolicy::fixed(0);
    if (j.contains("switching")) {
      const auto& js = j.at("switching");
      const auto policy = js.at("policy").get<std::string>();
      if (policy == "fixed") {
        switching = SwitchingPolicy::fixed(js.value("index", 0));
      } else if (policy == "random") {
        switching =
            SwitchingPolicy::random_uniform(js.at("seed").get<std::uint64_t>());
      } else {
        throw ConfigError("config: switching.policy must be fixed|random");
      }
    }
    if (seed_override &&
        switching.kind == SwitchingPolicy::Kind::random_uniform) {
      switching.seed = *seed_override;
    }

    // problem
    NetworkProblem problem = NetworkProblem::parse(
        resolve_ref(j.at("problem"), base), seed_override);

    // algorithm
    const auto& ja = j.at("algorithm");
    AlgorithmConfig algo;
    algo.kind = algorithm_kind_from_string(ja.at("kind").get<std::string>());
    algo.alpha = ja.at("alpha").get<double>();
    algo.beta = ja.at("beta").get<double>();
    if (!(algo.alpha > 0.0)) throw ConfigError("config: algorithm.alpha must be > 0");
    if (!(algo.beta > 0.0)) throw ConfigError("config: algorithm.beta must be > 0");
    if (ja.contains("gamma")) algo.gamma = ja.at("gamma").get<double>();
    if (ja.contains("auto_gamma")) {
      algo.auto_gamma = ja.at("auto_gamma").get<double>();
    }
    if (uses_gamma(algo.kind)) {
      if (algo.gamma.has_value() == algo.auto_gamma.has_value()) {
        throw ConfigError(
            "config: exactly one of algorithm.gamma or algorithm.auto_gamma "
            "required");
      }
      if (algo.gamma && !(*algo.gamma > 0.0)) {
        throw ConfigError("config: algorithm.gamma must be > 0");
      }
      if (algo.auto_gamma && !(*algo.auto_gamma > 1.0)) {
        throw ConfigError("config: algorithm.auto_gamma must be > 1");
      }
    }

    // sim
    SimBlock sim;
    if (j.contains("sim")) {
      const auto& js = j.at("sim");
      sim.dt = js.value("dt", sim.dt);
      sim.steps = js.value("steps", sim.steps);
      sim.record_every = js.value("record_every", sim.record_every);
    }
    if (!(sim.dt > 0.0)) throw ConfigError("config: sim.dt must be > 0");
    if (sim.steps < 1) throw ConfigError("config: sim.steps must be >= 1");
    if (sim.record_every < 1) {
      throw ConfigError("config: sim.record_every must be >= 1");
    }

    // init overrides
    InitOverride init;
    if (j.contains("init")) {
      const auto& ji = j.at("init");
      if (ji.contains("x")) init.x = vector_from_json(ji.at("x"), "init.x");
      if (ji.contains("y")) init.y = vector_from_json(ji.at("y"), "init.y");
    }

    ExperimentConfig cfg{std::move(graphs),
                         switching,
                         std::move(problem),
                         algo,
                         sim,
                         std::move(init),
                         j.value("output", std::string()),
                         fnv1a_hex(text)};

    const Eigen::Index mn =
        static_cast<Eigen::Index>(cfg.problem.agent_count()) *
        cfg.problem.unknown_dim();
    if (cfg.init.x && cfg.init.x->size() != mn) {
      throw ConfigError("config: init.x must have length n*m");
    }
    if (cfg.init.y && cfg.init.y->size() != mn) {
      throw ConfigError("config: init.y must have length n*m");
    }
    for (const Digraph& g : cfg.graphs) {
      if (g.size() != cfg.problem.agent_count()) {
        throw ConfigError("config: graph node count != problem agent count");
      }
    }
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

ValidationReport validate_experiment(const ExperimentConfig& cfg) {
  ValidationReport report;
  const AlgorithmKind kind = cfg.algorithm.kind;

  if (kind != AlgorithmKind::gdac_tv && cfg.graphs.size() != 1) {
    report.errors.push_back("algorithm '" + std::string(to_string(kind)) +
                            "' runs on a single graph");
    return report;
  }

  for (std::size_t i = 0; i < cfg.graphs.size(); ++i) {
    if (!is_strongly_connected(cfg.graphs[i])) {
      report.errors.push_back("graph " + std::to_string(i) +
                              " is not strongly connected");
    }
  }
  if (kind == AlgorithmKind::central || kind == AlgorithmKind::gdac ||
      kind == AlgorithmKind::gdac_tv) {
    for (std::size_t i = 0; i < cfg.graphs.size(); ++i) {
      if (!is_weight_balanced(cfg.graphs[i])) {
        report.errors.push_back("graph " + std::to_string(i) +
                                " is not weight-balanced");
      }
    }
  }
  if (!report.errors.empty()) return report;

  if (!has_solution(cfg.problem)) {
    report.errors.push_back("global system A x = b has no solution");
    return report;
  }
  if (!nullspace_condition_holds(cfg.problem)) {
    report.warnings.push_back(
        "null-space condition null(A) in null(A_i) fails: the limit point is "
        "no longer pinned to the initial average (convergence conjectured)");
  }

  // Remark-2 identity when the user overrides y(0).
  if (cfg.init.y) {
    AlgorithmSpec spec{kind, cfg.algorithm.alpha, cfg.algorithm.beta, 1.0};
    if (uses_y(kind)) {
      SolverState ref = default_init(cfg.problem, spec, cfg.init.x);
      const auto [a, b] = global_system(cfg.problem);
      SolverState probe = ref;
      probe.y = *cfg.init.y;
      const double drift = (conserved_mismatch(cfg.problem, probe) + b).norm();
      if (drift > 1e-9 * (1.0 + b.norm())) {
        report.warnings.push_back(
            "init.y violates the initialization identity 1^T y(0) = "
            "1^T (A x(0) - b); the flow converges to a shifted target");
      }
    }
  }

  if (uses_gamma(kind) && cfg.algorithm.gamma) {
    const GammaCertificate cert = certificate_for(cfg);
    if (*cfg.algorithm.gamma <= cert.gamma_bar) {
      std::ostringstream os;
      os << "gamma=" << *cfg.algorithm.gamma
         << " is not above the certified threshold gamma_bar="
         << cert.gamma_bar << " (convergence not guaranteed)";
      report.warnings.push_back(os.str());
    }
  }
  return report;
}

double resolve_gamma(const ExperimentConfig& cfg) {
  if (!uses_gamma(cfg.algorithm.kind)) return 0.0;
  if (cfg.algorithm.gamma) return *cfg.algorithm.gamma;
  const double c = cfg.algorithm.auto_gamma.value();
  const double bar = certificate_for(cfg).gamma_bar;
  return bar > 0.0 ? c * bar : c;
}

std::pair<double, double> fit_decay_rate(const std::vector<RunRecord>& records,
                                         double lo, double hi) {
  if (!(0.0 <= lo && lo < hi && hi <= 1.0)) {
    throw Error("fit_decay_rate: need 0 <= lo < hi <= 1");
  }
  std::vector<const RunRecord*> usable;
  for (const RunRecord& r : records) {
    if (r.err_avg > 1e-13) usable.push_back(&r);
  }
  const std::size_t count = usable.size();
  const std::size_t first = static_cast<std::size_t>(count * lo);
  const std::size_t last = static_cast<std::size_t>(count * hi);
  if (last < first + 10) {
    throw Error("fit_decay_rate: fewer than 10 usable records");
  }

  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0, syy = 0.0;
  const double nfit = static_cast<double>(last - first);
  for (std::size_t i = first; i < last; ++i) {
    const double t = usable[i]->t;
    const double y = std::log(usable[i]->err_avg);
    st += t;
    sy += y;
    stt += t * t;
    sty += t * y;
    syy += y * y;
  }
  const double denom = nfit * stt - st * st;
  if (denom == 0.0) throw Error("fit_decay_rate: degenerate time window");
  const double slope = (nfit * sty - st * sy) / denom;
  const double intercept = (sy - slope * st) / nfit;

  double ss_res = 0.0;
  const double mean_y = sy / nfit;
  double ss_tot = 0.0;
  for (std::size_t i = first; i < last; ++i) {
    const double t = usable[i]->t;
    const double y = std::log(usable[i]->err_avg);
    const double fit = slope * t + intercept;
    ss_res += (y - fit) * (y - fit);
    ss_tot += (y - mean_y) * (y - mean_y);
  }
  // a flat series has no variance to explain; call the fit exact
  const double tot_floor = 1e-20 * nfit * (1.0 + mean_y * mean_y);
  const double r2 = ss_tot > tot_floor ? 1.0 - ss_res / ss_tot : 1.0;
  return {slope, r2};
}

RunResult run_experiment(const ExperimentConfig& cfg) {
  const ValidationReport report = validate_experiment(cfg);
  for (const std::string& w : report.warnings) {
    std::fprintf(stderr, "netlineq: warning: %s\n", w.c_str());
  }
  if (!report.ok()) {
    throw Error("run_experiment: " + report.errors.front());
  }

  const NetworkProblem& p = cfg.problem;
  const int n = p.agent_count();
  const int m = p.unknown_dim();

  AlgorithmSpec spec{cfg.algorithm.kind, cfg.algorithm.alpha,
                     cfg.algorithm.beta, resolve_gamma(cfg)};
  if (!uses_gamma(spec.kind)) spec.gamma = 1.0;  // unused
  validate(spec);

  GraphSequence seq(cfg.graphs, cfg.switching);
  std::vector<StackedOperators> ops;
  ops.reserve(cfg.graphs.size());
  for (const Digraph& g : cfg.graphs) ops.push_back(stack(p, in_laplacian(g)));

  Eigen::VectorXd vbar;
  if (spec.kind == AlgorithmKind::unbalanced_fixed_v ||
      spec.kind == AlgorithmKind::dist) {
    vbar = positive_null_eigenvector(cfg.graphs.front());
  }

  SolverState state = default_init(p, spec, cfg.init.x);
  if (cfg.init.y) state.y = *cfg.init.y;

  Eigen::VectorXd xbar0 = Eigen::VectorXd::Zero(m);
  for (int i = 0; i < n; ++i) xbar0 += state.x.segment(i * m, m);
  xbar0 /= n;
  const Eigen::VectorXd xstar = reference_solution(p, xbar0);

  RunSummary summary;
  summary.config_hash = cfg.config_hash;
  summary.algorithm = to_string(spec.kind);
  summary.alpha = spec.alpha;
  summary.beta = spec.beta;
  if (uses_gamma(spec.kind)) {
    summary.gamma = spec.gamma;
    if (cfg.algorithm.auto_gamma) {
      summary.gamma_bar = certificate_for(cfg).gamma_bar;
    }
  }
  summary.steps = cfg.sim.steps;
  summary.dt = cfg.sim.dt;
  summary.warnings = report.warnings;

  double min_v = std::numeric_limits<double>::infinity();
  double max_vsum_drift = 0.0;
  double max_drift = 0.0;

  std::vector<RunRecord> records;
  records.reserve(static_cast<std::size_t>(cfg.sim.steps / cfg.sim.record_every) + 2);

  const auto record_state = [&](std::int64_t step) {
    const ErrorMetrics em = error_metrics(p, ops.front(), state, xstar);
    RunRecord r;
    r.step = step;
    r.t = state.t;
    r.err_avg = em.err_avg;
    r.err_full = em.err_full;
    r.consensus_spread = em.consensus_spread;
    r.e_norm = em.e_norm;
    r.conserved_drift = em.conserved_drift;
    r.objective = em.objective;
    if (r.conserved_drift) max_drift = std::max(max_drift, *r.conserved_drift);
    records.push_back(r);
  };

  const auto monitor_v = [&] {
    if (!state.has_v()) return;
    min_v = std::min(min_v, state.v.minCoeff());
    max_vsum_drift = std::max(max_vsum_drift, std::abs(state.v.sum() - 1.0));
  };

  monitor_v();
  for (std::int64_t step = 0; step < cfg.sim.steps; ++step) {
    if (step % cfg.sim.record_every == 0) record_state(step);
    Derivatives d;
    switch (spec.kind) {
      case AlgorithmKind::central:
        d = rhs_central(ops.front(), state, spec);
        break;
      case AlgorithmKind::gdac:
        d = rhs_gdac(ops.front(), state, spec);
        break;
      case AlgorithmKind::gdac_tv:
        d = rhs_timevarying(ops, seq, static_cast<std::uint64_t>(step), state,
                            spec);
        break;
      case AlgorithmKind::unbalanced_fixed_v:
        d = rhs_unbalanced_fixed_v(ops.front(), vbar, state, spec);
        break;
      case AlgorithmKind::dist:
        d = rhs_dist(ops.front(), state, spec);
        break;
    }
    try {
      state = euler_step(std::move(state), d, cfg.sim.dt);
    } catch (const DivergenceError& e) {
      throw DivergenceError(std::string(e.what()) + " (step " +
                            std::to_string(step + 1) + ")");
    }
    monitor_v();
  }
  record_state(cfg.sim.steps);

  summary.final_err_avg = records.back().err_avg;
  summary.final_err_full = records.back().err_full;
  if (uses_y(spec.kind)) summary.max_conserved_drift = max_drift;
  if (state.has_v()) {
    summary.min_v_entry = min_v;
    summary.max_vsum_drift = max_vsum_drift;
    summary.final_v_error = (state.v - vbar).norm();
  }
  try {
    const auto [slope, r2] = fit_decay_rate(records);
    summary.slope = slope;
    summary.r_squared = r2;
  } catch (const Error&) {
    // too few decaying records; leave the fit unset
  }

  if (!cfg.output.empty()) {
    std::ofstream out(cfg.output, std::ios::binary);
    if (!out) throw ConfigError("cannot write CSV: " + cfg.output);
    out << to_csv(records);
  }

  RunResult result;
  result.records = std::move(records);
  result.summary = std::move(summary);
  result.final_state = std::move(state);
  result.xstar = xstar;
  return result;
}

nlohmann::json spectral_report(const ExperimentConfig& cfg) {
  const NetworkProblem& p = cfg.problem;
  const double alpha = cfg.algorithm.alpha;
  const double beta = cfg.algorithm.beta;

  bool balanced = true;
  for (const Digraph& g : cfg.graphs) balanced &= is_weight_balanced(g);

  nlohmann::json rep;
  rep["has_solution"] = has_solution(p);
  rep["nullspace_condition"] = nullspace_condition_holds(p);
  rep["balanced"] = balanced;
  rep["alpha"] = alpha;
  rep["beta"] = beta;

  const bool tv = cfg.graphs.size() > 1;
  if (!balanced) {
    const Digraph& g = cfg.graphs.front();
    const GammaCertificate cert = certify_unbalanced(p, g, alpha, beta);
    const Eigen::VectorXd vbar = positive_null_eigenvector(g);
    rep["context"] = "unbalanced";
    rep["lambda2_LLt"] = cert.lambda2_lap;  // lambda2(L Vbar + Vbar L^T)
    rep["lambda2_Q11"] = cert.lambda2_q11;
    rep["gamma_bar"] = cert.gamma_bar;
    rep["min_re_nonzero"] = min_re_nonzero_eigenvalue(in_laplacian(g));
    rep["central_rate_bound"] = nullptr;  // balanced-flow quantity
    rep["vbar"] = std::vector<double>(vbar.data(), vbar.data() + vbar.size());
  } else if (tv) {
    const GammaCertificate cert =
        certify_timevarying(p, cfg.graphs, alpha, beta);
    rep["context"] = "time_varying";
    rep["lambda2_LLt"] = cert.lambda2_lap;
    rep["lambda2_Q11"] = cert.lambda2_q11;
    rep["gamma_bar"] = cert.gamma_bar;  // = gamma_hat over the list
    rep["gamma_hat"] = cert.gamma_bar;
    rep["per_graph_gamma_bar"] = cert.per_graph_gamma;
    nlohmann::json per = nlohmann::json::array();
    for (const Digraph& g : cfg.graphs) {
      const Eigen::MatrixXd lap = in_laplacian(g);
      per.push_back(
          {{"lambda2_LLt", lambda2_psd(lap + lap.transpose())},
           {"min_re_nonzero", min_re_nonzero_eigenvalue(lap)},
           {"central_rate_bound", central_rate_bound(p, g, alpha, beta)}});
    }
    rep["per_graph"] = std::move(per);
    rep["min_re_nonzero"] =
        min_re_nonzero_eigenvalue(in_laplacian(cfg.graphs.front()));
    rep["central_rate_bound"] =
        central_rate_bound(p, cfg.graphs.front(), alpha, beta);
  } else {
    const Digraph& g = cfg.graphs.front();
    const GammaCertificate cert = certify_balanced(p, g, alpha, beta);
    rep["context"] = "balanced";
    rep["lambda2_LLt"] = cert.lambda2_lap;
    rep["lambda2_Q11"] = cert.lambda2_q11;
    rep["gamma_bar"] = cert.gamma_bar;
    rep["min_re_nonzero"] = min_re_nonzero_eigenvalue(in_laplacian(g));
    rep["central_rate_bound"] = central_rate_bound(p, g, alpha, beta);
  }
  return rep;
}

nlohmann::json summary_to_json(const RunSummary& s) {
  nlohmann::json j;
  j["config_hash"] = s.config_hash;
  j["algorithm"] = s.algorithm;
  j["alpha"] = s.alpha;
  j["beta"] = s.beta;
  if (s.gamma) j["gamma"] = *s.gamma;
  if (s.gamma_bar) j["gamma_bar"] = *s.gamma_bar;
  j["steps"] = s.steps;
  j["dt"] = s.dt;
  j["final_err_avg"] = s.final_err_avg;
  j["final_err_full"] = s.final_err_full;
  if (s.max_conserved_drift) j["max_conserved_drift"] = *s.max_conserved_drift;
  if (s.slope) j["slope"] = *s.slope;
  if (s.r_squared) j["r_squared"] = *s.r_squared;
  if (s.min_v_entry) j["min_v_entry"] = *s.min_v_entry;
  if (s.max_vsum_drift) j["max_vsum_drift"] = *s.max_vsum_drift;
  if (s.final_v_error) j["final_v_error"] = *s.final_v_error;
  j["warnings"] = s.warnings;
  return j;
}

std::string to_csv(const std::vector<RunRecord>& records) {
  std::string out =
      "step,t,err_avg,err_full,consensus_spread,e_norm,conserved_drift,"
      "objective_f\n";
  for (const RunRecord& r : records) {
    char ibuf[24];
    const auto ires = std::to_chars(ibuf, ibuf + sizeof(ibuf), r.step);
    out.append(ibuf, ires.ptr);
    out.push_back(',');
    append_double(out, r.t);
    out.push_back(',');
    append_double(out, r.err_avg);
    out.push_back(',');
    append_double(out, r.err_full);
    out.push_back(',');
    append_double(out, r.consensus_spread);
    out.push_back(',');
    if (r.e_norm) append_double(out, *r.e_norm);
    out.push_back(',');
    if (r.conserved_drift) append_double(out, *r.conserved_drift);
    out.push_back(',');
    append_double(out, r.objective);
    out.push_back('\n');
  }
  return out;
}

void write_csv(std::ostream& out, const std::vector<RunRecord>& records) {
  out << to_csv(records);
}

}  // namespace netlineq
