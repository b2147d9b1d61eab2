#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "netlineq/digraph.hpp"
#include "netlineq/linear_problem.hpp"

namespace netlineq {

enum class AlgorithmKind { central, gdac, gdac_tv, unbalanced_fixed_v, dist };

const char* to_string(AlgorithmKind kind);
AlgorithmKind algorithm_kind_from_string(const std::string& name);

struct AlgorithmSpec {
  AlgorithmKind kind = AlgorithmKind::gdac;
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 1.0;  // unused by central
};

bool uses_gamma(AlgorithmKind kind);
bool uses_y(AlgorithmKind kind);   // every distributed variant
bool uses_v(AlgorithmKind kind);   // dist only
void validate(const AlgorithmSpec& spec);

// Concatenated agent states at one time instant. x stacks the n per-agent
// m-vectors; y (same layout) is present for the distributed variants; v is
// the n-vector of eigenvector estimates for the dist algorithm.
struct SolverState {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  Eigen::VectorXd v;
  double t = 0.0;

  bool has_y() const { return y.size() > 0; }
  bool has_v() const { return v.size() > 0; }
};

// Time derivatives of the present components.
struct Derivatives {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  Eigen::VectorXd v;
};

// xdot = -alpha LL x - beta A^T 1m 1m^T (A x - b)
Derivatives rhs_central(const StackedOperators& ops, const SolverState& s,
                        const AlgorithmSpec& spec);

// xdot = -alpha LL x - n beta A^T y
// ydot = -alpha A LL x - n beta A A^T y - gamma LL y  (== A xdot - gamma LL y)
Derivatives rhs_gdac(const StackedOperators& ops, const SolverState& s,
                     const AlgorithmSpec& spec);

// rhs_gdac with the Laplacian of the graph active at `step`.
// ops_per_graph[i] must be stack(p, in_laplacian(seq.graphs()[i])).
Derivatives rhs_timevarying(const std::vector<StackedOperators>& ops_per_graph,
                            const GraphSequence& seq, std::uint64_t step,
                            const SolverState& s, const AlgorithmSpec& spec);

// Unbalanced-graph variant with a known null eigenvector: LL is applied
// after per-agent scaling by vbar (the Vbar = diag(ones (x) vbar) factor).
Derivatives rhs_unbalanced_fixed_v(const StackedOperators& ops,
                                   const Eigen::VectorXd& vbar,
                                   const SolverState& s,
                                   const AlgorithmSpec& spec);

// Augmented nonlinear variant: vbar is replaced by the running estimate s.v,
// which itself follows vdot = -L v.
Derivatives rhs_dist(const StackedOperators& ops, const SolverState& s,
                     const AlgorithmSpec& spec);

// Dynamic average consensus primitive: xdot = -L x + zdot.
Eigen::VectorXd rhs_dac(const Eigen::MatrixXd& lap, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& zdot);
Eigen::VectorXd rhs_dac(const Digraph& g, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& zdot);

// x(0) = 0 (or the supplied vector), y(0) = A x(0) - b per agent (the
// initialization that pins the conserved quantity to -b), v(0) = (1/n) ones
// for dist.
SolverState default_init(const NetworkProblem& p, const AlgorithmSpec& spec,
                         const std::optional<Eigen::VectorXd>& x0 = {});

// Forward Euler: each present component advanced by h * derivative. Throws
// DivergenceError when the updated state leaves [-1e12, 1e12] or is not
// finite.
SolverState euler_step(SolverState s, const Derivatives& d, double h);

// 1m^T (y - A x); constant along every distributed flow, equal to -b under
// default_init.
Eigen::VectorXd conserved_mismatch(const NetworkProblem& p,
                                   const SolverState& s);

struct ErrorMetrics {
  double err_avg = 0.0;           // || xbar - xstar ||
  double err_full = 0.0;          // || x - ones (x) xstar ||
  double consensus_spread = 0.0;  // || Pi x ||
  std::optional<double> e_norm;   // || y - (1/n) 1m 1m^T (A x - b) ||
  std::optional<double> conserved_drift;  // || 1m^T (y - A x) + b ||
  double objective = 0.0;         // f(x)
};

ErrorMetrics error_metrics(const NetworkProblem& p, const StackedOperators& ops,
                           const SolverState& s, const Eigen::VectorXd& xstar);

}  // namespace netlineq
