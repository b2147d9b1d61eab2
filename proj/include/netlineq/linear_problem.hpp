#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "netlineq/errors.hpp"

namespace netlineq {

// One agent's share of the problem: an m x m coefficient block and an
// m-vector. The global system is the sum over agents.
struct AgentData {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
};

class NetworkProblem {
 public:
  NetworkProblem(int m, std::vector<AgentData> agents);

  // JSON, either explicit agents
  //   {"m": int, "agents": [{"A": [m*m row-major], "b": [m]}, ...]}
  // or a seeded generator
  //   {"m": int, "n": int, "generator": {"seed": int}}.
  // seed_override replaces the generator seed (no effect on explicit agents).
  static NetworkProblem load(const std::string& path);
  static NetworkProblem parse(
      const std::string& json_text,
      std::optional<std::uint64_t> seed_override = {});
  void save(const std::string& path) const;

  int unknown_dim() const { return m_; }
  int agent_count() const { return static_cast<int>(agents_.size()); }
  const AgentData& agent(int i) const { return agents_[i]; }
  const std::vector<AgentData>& agents() const { return agents_; }

 private:
  int m_;
  std::vector<AgentData> agents_;
};

// Seeded i.i.d. uniform [-1, 1] entries, redrawn (bounded retries) until the
// global system is consistent. Identical output for identical seeds on every
// platform.
NetworkProblem generate_problem(std::uint64_t seed, int n, int m);

// (A, b) = (sum_i A_i, sum_i b_i).
std::pair<Eigen::MatrixXd, Eigen::VectorXd> global_system(
    const NetworkProblem& p);

// rank(A) == rank([A | b]) under the relative singular-value cutoff
// tol * sigma_max([A | b]).
bool has_solution(const NetworkProblem& p, double tol = 1e-10);

// null(A) subset of null(A_i) for every agent; vacuously true when A has
// full rank.
bool nullspace_condition_holds(const NetworkProblem& p, double tol = 1e-10);

// f(x) = || sum_i (A_i x_i - b_i) ||^2 over the stacked mn-vector.
double objective_f(const NetworkProblem& p, const Eigen::VectorXd& x_stacked);

// Solution of A x = b predicted as the limit of the flows: minimum-norm
// solution plus the projection of x_avg0 onto null(A). Unique-solution
// systems ignore x_avg0. Throws NoSolutionError on inconsistent systems.
Eigen::VectorXd reference_solution(const NetworkProblem& p,
                                   const Eigen::VectorXd& x_avg0);

// Stacked mn-dimensional operators for a problem bound to a graph Laplacian.
// All Kronecker products are materialized; immutable once built.
struct StackedOperators {
  int n = 0;
  int m = 0;
  Eigen::MatrixXd lap;         // L, n x n
  Eigen::MatrixXd lap_kron;    // L (x) I_m
  Eigen::MatrixXd block_a;     // blkdiag(A_1..A_n)
  Eigen::MatrixXd block_a_t;   // cached transpose for the field evaluations
  Eigen::VectorXd stacked_b;   // [b_1; ...; b_n]
  Eigen::MatrixXd ones_m;      // ones (x) I_m, mn x m
  Eigen::MatrixXd proj;        // I - (1/n) ones_m ones_m^T
};

StackedOperators stack(const NetworkProblem& p, const Eigen::MatrixXd& lap);

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

}  // namespace netlineq
