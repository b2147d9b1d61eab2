#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "netlineq/errors.hpp"

namespace netlineq {

struct Edge {
  int from = 0;
  int to = 0;
  double w = 0.0;
};

// Weighted directed graph over nodes 0..n-1. weights(i, j) > 0 iff there is
// an edge i -> j; the diagonal is zero. Immutable after construction.
class Digraph {
 public:
  // Validates: n >= 2, square, nonnegative entries, zero diagonal.
  explicit Digraph(Eigen::MatrixXd weights);

  static Digraph from_edges(int n, const std::vector<Edge>& edges);

  // JSON {"n": int, "edges": [{"from", "to", "w"}, ...]}.
  // Duplicate edges, self-loops, out-of-range indices and w <= 0 rejected.
  static Digraph load(const std::string& path);
  static Digraph parse(const std::string& json_text);
  void save(const std::string& path) const;

  int size() const { return n_; }
  const Eigen::MatrixXd& weights() const { return weights_; }
  double weight(int from, int to) const { return weights_(from, to); }

  // Weighted degree vectors: out(i) = sum_j w(i,j), in(i) = sum_j w(j,i).
  Eigen::VectorXd out_degrees() const { return weights_.rowwise().sum(); }
  Eigen::VectorXd in_degrees() const { return weights_.colwise().sum(); }

 private:
  int n_;
  Eigen::MatrixXd weights_;
};

// L = D_in - A. Column sums vanish by construction; row sums vanish iff the
// graph is weight-balanced.
Eigen::MatrixXd in_laplacian(const Digraph& g);

bool is_strongly_connected(const Digraph& g);

// max_i |d_out(i) - d_in(i)| <= tol. The overload without tol uses
// 1e-9 * (max weighted degree).
bool is_weight_balanced(const Digraph& g, double tol);
bool is_weight_balanced(const Digraph& g);

// Right eigenvector of L for eigenvalue 0, elementwise positive, normalized
// to sum 1. For weight-balanced graphs this is (1/n)*ones. Requires strong
// connectivity (the zero eigenvalue must be simple); the residual ||L v||
// is checked against tol * ||L||_F.
Eigen::VectorXd positive_null_eigenvector(const Digraph& g,
                                          double tol = 1e-10);

// Head-scaling: w'(i,j) = w(i,j) * vbar(j). Same topology, weight-balanced
// result, and in_laplacian(g') == in_laplacian(g) * diag(vbar).
Digraph balance_by_head_scaling(const Digraph& g);

struct SwitchingPolicy {
  enum class Kind { fixed, random_uniform };
  Kind kind = Kind::fixed;
  int index = 0;            // fixed
  std::uint64_t seed = 0;   // random_uniform

  static SwitchingPolicy fixed(int index) {
    return SwitchingPolicy{Kind::fixed, index, 0};
  }
  static SwitchingPolicy random_uniform(std::uint64_t seed) {
    return SwitchingPolicy{Kind::random_uniform, 0, seed};
  }
};

// Non-empty list of strongly connected graphs on the same node set plus a
// per-step switching policy. Immutable; safe to share across runs.
class GraphSequence {
 public:
  GraphSequence(std::vector<Digraph> graphs, SwitchingPolicy policy);

  const std::vector<Digraph>& graphs() const { return graphs_; }
  const SwitchingPolicy& policy() const { return policy_; }
  std::size_t size() const { return graphs_.size(); }
  int node_count() const { return graphs_.front().size(); }

 private:
  std::vector<Digraph> graphs_;
  SwitchingPolicy policy_;
};

// Graph active at an integration step. Pure in (policy, seed, step): the
// random policy uses a counter-based stream, so no state is threaded through.
std::size_t next_graph_index(const GraphSequence& seq, std::uint64_t step);
const Digraph& next_graph(const GraphSequence& seq, std::uint64_t step);

}  // namespace netlineq
