#include "netlineq/digraph.hpp"

#include <cmath>
#include <complex>
#include <fstream>
#include <iterator>
#include <utility>
#include <vector>

#include <json.hpp>

namespace netlineq {

Digraph::Digraph(Eigen::MatrixXd weights)
    : n_(static_cast<int>(weights.rows())), weights_(std::move(weights)) {
  if (weights_.rows() != weights_.cols()) {
    throw DimensionError("digraph weight matrix must be square");
  }
  if (n_ < 2) {
    throw DimensionError("digraph needs at least 2 nodes");
  }
  for (int i = 0; i < n_; ++i) {
    if (weights_(i, i) != 0.0) {
      throw Error("digraph has a self-loop at node " + std::to_string(i));
    }
    for (int j = 0; j < n_; ++j) {
      if (!(weights_(i, j) >= 0.0)) {
        throw Error("digraph weight (" + std::to_string(i) + "," +
                    std::to_string(j) + ") is negative or NaN");
      }
    }
  }
}

Digraph Digraph::from_edges(int n, const std::vector<Edge>& edges) {
  if (n < 2) throw DimensionError("digraph needs at least 2 nodes");
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (const Edge& e : edges) {
    if (e.from < 0 || e.from >= n || e.to < 0 || e.to >= n) {
      throw Error("edge endpoint out of range: " + std::to_string(e.from) +
                  "->" + std::to_string(e.to));
    }
    if (e.from == e.to) {
      throw Error("self-loop at node " + std::to_string(e.from));
    }
    if (!(e.w > 0.0)) {
      throw Error("edge " + std::to_string(e.from) + "->" +
                  std::to_string(e.to) + " must have positive weight");
    }
    if (w(e.from, e.to) != 0.0) {
      throw Error("duplicate edge " + std::to_string(e.from) + "->" +
                  std::to_string(e.to));
    }
    w(e.from, e.to) = e.w;
  }
  return Digraph(std::move(w));
}

Digraph Digraph::parse(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
    const int n = j.at("n").get<int>();
    std::vector<Edge> edges;
    for (const auto& je : j.at("edges")) {
      edges.push_back(Edge{je.at("from").get<int>(), je.at("to").get<int>(),
                           je.at("w").get<double>()});
    }
    return from_edges(n, edges);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("graph: ") + e.what());
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("graph: ") + e.what());
  }
}

Digraph Digraph::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open graph file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  try {
    return parse(text);
  } catch (const Error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void Digraph::save(const std::string& path) const {
  nlohmann::json j;
  j["n"] = n_;
  nlohmann::json edges = nlohmann::json::array();
  for (int i = 0; i < n_; ++i) {
    for (int k = 0; k < n_; ++k) {
      if (weights_(i, k) > 0.0) {
        edges.push_back({{"from", i}, {"to", k}, {"w", weights_(i, k)}});
      }
    }
  }
  j["edges"] = std::move(edges);
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write graph file: " + path);
  out << j.dump(2) << '\n';
}

Eigen::MatrixXd in_laplacian(const Digraph& g) {
  const int n = g.size();
  Eigen::MatrixXd lap = -g.weights();
  for (int i = 0; i < n; ++i) {
    lap(i, i) = g.weights().col(i).sum();
  }
  return lap;
}

namespace {

// Reachability of every node from `root`, following edges forward
// (transpose=false) or backward (transpose=true).
bool all_reachable(const Eigen::MatrixXd& w, int root, bool transpose) {
  const int n = static_cast<int>(w.rows());
  std::vector<char> seen(n, 0);
  std::vector<int> stack{root};
  seen[root] = 1;
  int count = 1;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int v = 0; v < n; ++v) {
      const double weight = transpose ? w(v, u) : w(u, v);
      if (weight > 0.0 && !seen[v]) {
        seen[v] = 1;
        ++count;
        stack.push_back(v);
      }
    }
  }
  return count == n;
}

}  // namespace

bool is_strongly_connected(const Digraph& g) {
  return all_reachable(g.weights(), 0, false) &&
         all_reachable(g.weights(), 0, true);
}

bool is_weight_balanced(const Digraph& g, double tol) {
  return (g.out_degrees() - g.in_degrees()).cwiseAbs().maxCoeff() <= tol;
}

bool is_weight_balanced(const Digraph& g) {
  const double scale =
      std::max(g.out_degrees().maxCoeff(), g.in_degrees().maxCoeff());
  return is_weight_balanced(g, 1e-9 * scale);
}

Eigen::VectorXd positive_null_eigenvector(const Digraph& g, double tol) {
  if (!is_strongly_connected(g)) {
    throw ConnectivityError(
        "positive_null_eigenvector requires a strongly connected digraph");
  }
  const Eigen::MatrixXd lap = in_laplacian(g);
  Eigen::EigenSolver<Eigen::MatrixXd> es(lap);
  if (es.info() != Eigen::Success) {
    throw SpectralError("eigendecomposition of the Laplacian failed");
  }

  int k = 0;
  double min_mod = std::abs(es.eigenvalues()(0));
  for (int i = 1; i < lap.rows(); ++i) {
    const double mod = std::abs(es.eigenvalues()(i));
    if (mod < min_mod) {
      min_mod = mod;
      k = i;
    }
  }

  // Rotate the complex phase out, then flip so the largest entry is positive.
  Eigen::VectorXcd vc = es.eigenvectors().col(k);
  int imax = 0;
  vc.cwiseAbs().maxCoeff(&imax);
  vc *= std::abs(vc(imax)) / vc(imax);
  Eigen::VectorXd v = vc.real();

  const double vmax = v.cwiseAbs().maxCoeff();
  for (int i = 0; i < v.size(); ++i) {
    if (v(i) <= 1e-12 * vmax) {
      throw SpectralError(
          "null eigenvector of the Laplacian is not strictly positive");
    }
  }
  v /= v.sum();

  if ((lap * v).norm() > tol * lap.norm()) {
    throw SpectralError("null eigenvector residual exceeds tolerance");
  }
  return v;
}

Digraph balance_by_head_scaling(const Digraph& g) {
  const Eigen::VectorXd vbar = positive_null_eigenvector(g);
  Eigen::MatrixXd w = g.weights() * vbar.asDiagonal();
  return Digraph(std::move(w));
}

GraphSequence::GraphSequence(std::vector<Digraph> graphs,
                             SwitchingPolicy policy)
    : graphs_(std::move(graphs)), policy_(policy) {
  if (graphs_.empty()) throw Error("graph sequence is empty");
  const int n = graphs_.front().size();
  for (std::size_t i = 0; i < graphs_.size(); ++i) {
    if (graphs_[i].size() != n) {
      throw DimensionError("graph sequence members differ in node count");
    }
    if (!is_strongly_connected(graphs_[i])) {
      throw ConnectivityError("graph sequence member " + std::to_string(i) +
                              " is not strongly connected");
    }
  }
  if (policy_.kind == SwitchingPolicy::Kind::fixed &&
      (policy_.index < 0 ||
       static_cast<std::size_t>(policy_.index) >= graphs_.size())) {
    throw Error("fixed switching index out of range");
  }
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

std::size_t next_graph_index(const GraphSequence& seq, std::uint64_t step) {
  if (seq.policy().kind == SwitchingPolicy::Kind::fixed) {
    return static_cast<std::size_t>(seq.policy().index);
  }
  // Counter-based draw: reproducible for a given (seed, step) without any
  // shared stream state.
  const std::uint64_t h = splitmix64(seq.policy().seed ^ splitmix64(step));
  return static_cast<std::size_t>(
      (static_cast<unsigned __int128>(h) * seq.size()) >> 64);
}

const Digraph& next_graph(const GraphSequence& seq, std::uint64_t step) {
  return seq.graphs()[next_graph_index(seq, step)];
}

}  // namespace netlineq
