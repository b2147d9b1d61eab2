#include "netlineq/spectral.hpp"

#include <cmath>
#include <complex>
#include <limits>

namespace netlineq {

double lambda2_psd(const Eigen::MatrixXd& m, double tol) {
  if (m.rows() != m.cols()) {
    throw DimensionError("lambda2_psd: matrix must be square");
  }
  const double entry_scale = m.cwiseAbs().maxCoeff();
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * entry_scale) {
    throw SpectralError("lambda2_psd: matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw SpectralError("lambda2_psd: eigendecomposition failed");
  }
  const Eigen::VectorXd& ev = es.eigenvalues();  // ascending
  const double lmax = ev(ev.size() - 1);
  if (lmax <= 0.0) {
    throw SpectralError("lambda2_psd: no positive eigenvalue (zero matrix?)");
  }
  if (ev(0) < -tol * lmax) {
    throw SpectralError("lambda2_psd: matrix is not positive semidefinite");
  }
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) > tol * lmax) return ev(i);
  }
  throw SpectralError("lambda2_psd: all eigenvalues below cutoff");
}

double min_re_nonzero_eigenvalue(const Eigen::MatrixXd& m, double tol) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
  if (es.info() != Eigen::Success) {
    throw SpectralError("min_re_nonzero_eigenvalue: decomposition failed");
  }
  const auto& ev = es.eigenvalues();
  double max_mod = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    max_mod = std::max(max_mod, std::abs(ev(i)));
  }
  if (max_mod == 0.0) {
    throw SpectralError("min_re_nonzero_eigenvalue: zero matrix");
  }
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (std::abs(ev(i)) > tol * max_mod) best = std::min(best, ev(i).real());
  }
  if (!std::isfinite(best)) {
    throw SpectralError("min_re_nonzero_eigenvalue: no nonzero eigenvalue");
  }
  return best;
}

namespace {

void check_params(double alpha, double beta) {
  if (!(alpha > 0.0) || !(beta > 0.0)) {
    throw Error("alpha and beta must be positive");
  }
}

void check_balanced_graph(const Digraph& g) {
  if (!is_strongly_connected(g)) {
    throw ConnectivityError("graph is not strongly connected");
  }
  if (!is_weight_balanced(g)) {
    throw BalanceError("graph is not weight-balanced");
  }
}

struct QParts {
  Eigen::MatrixXd q11;
  Eigen::MatrixXd q12;
  Eigen::MatrixXd naat;
  Eigen::MatrixXd lap_sym;  // L + L^T or L Vbar + Vbar L^T, n x n
};

// Shared between the balanced and unbalanced variants: the unbalanced case
// runs the balanced algebra on the head-scaled Laplacian L * diag(vbar).
QParts q_parts(const NetworkProblem& p, const Eigen::MatrixXd& lap_eff,
               double alpha, double beta) {
  const StackedOperators ops = stack(p, lap_eff);
  const Eigen::MatrixXd ones_outer = ops.ones_m * ops.ones_m.transpose();
  const Eigen::MatrixXd at_ones_a = ops.block_a_t * ones_outer * ops.block_a;

  QParts parts;
  parts.q11 =
      0.5 * alpha * (ops.lap_kron + ops.lap_kron.transpose()) + beta * at_ones_a;
  parts.q12 = 0.5 * (ops.n * beta * ops.block_a_t +
                     alpha * ops.lap_kron.transpose() * ops.block_a_t +
                     beta * at_ones_a * ops.block_a_t);
  parts.naat = ops.n * beta * ops.block_a * ops.block_a_t;
  parts.lap_sym = lap_eff + lap_eff.transpose();
  return parts;
}

GammaCertificate certify_from_parts(QParts parts,
                                    GammaCertificate::Context context) {
  GammaCertificate cert;
  cert.context = context;
  cert.lambda2_lap = lambda2_psd(parts.lap_sym);
  cert.lambda2_q11 = lambda2_psd(parts.q11);
  const Eigen::MatrixXd c =
      parts.q12.transpose() * parts.q12 / cert.lambda2_q11 - parts.naat;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      0.5 * (c + c.transpose()), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw SpectralError("gamma_bar: eigendecomposition failed");
  }
  const double lmax_c = es.eigenvalues()(es.eigenvalues().size() - 1);
  cert.gamma_bar = std::max(2.0 / cert.lambda2_lap * lmax_c, 0.0);
  cert.q11 = std::move(parts.q11);
  cert.q12 = std::move(parts.q12);
  cert.naat = std::move(parts.naat);
  return cert;
}

}  // namespace

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> q_matrices_balanced(
    const NetworkProblem& p, const Digraph& g, double alpha, double beta) {
  check_params(alpha, beta);
  check_balanced_graph(g);
  QParts parts = q_parts(p, in_laplacian(g), alpha, beta);
  return {std::move(parts.q11), std::move(parts.q12)};
}

GammaCertificate certify_balanced(const NetworkProblem& p, const Digraph& g,
                                  double alpha, double beta) {
  check_params(alpha, beta);
  check_balanced_graph(g);
  return certify_from_parts(q_parts(p, in_laplacian(g), alpha, beta),
                            GammaCertificate::Context::balanced);
}

double gamma_bar_balanced(const NetworkProblem& p, const Digraph& g,
                          double alpha, double beta) {
  return certify_balanced(p, g, alpha, beta).gamma_bar;
}

GammaCertificate certify_timevarying(const NetworkProblem& p,
                                     const std::vector<Digraph>& graphs,
                                     double alpha, double beta) {
  if (graphs.empty()) throw Error("certify_timevarying: empty graph list");
  GammaCertificate best;
  std::vector<double> per_graph;
  per_graph.reserve(graphs.size());
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    GammaCertificate cert = certify_balanced(p, graphs[i], alpha, beta);
    per_graph.push_back(cert.gamma_bar);
    if (i == 0 || cert.gamma_bar > best.gamma_bar) best = std::move(cert);
  }
  best.context = GammaCertificate::Context::time_varying;
  best.per_graph_gamma = std::move(per_graph);
  return best;
}

double gamma_hat_timevarying(const NetworkProblem& p,
                             const std::vector<Digraph>& graphs, double alpha,
                             double beta) {
  return certify_timevarying(p, graphs, alpha, beta).gamma_bar;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> q_matrices_unbalanced(
    const NetworkProblem& p, const Digraph& g, double alpha, double beta) {
  check_params(alpha, beta);
  const Eigen::VectorXd vbar = positive_null_eigenvector(g);
  QParts parts =
      q_parts(p, in_laplacian(g) * vbar.asDiagonal(), alpha, beta);
  return {std::move(parts.q11), std::move(parts.q12)};
}

GammaCertificate certify_unbalanced(const NetworkProblem& p, const Digraph& g,
                                    double alpha, double beta) {
  check_params(alpha, beta);
  const Eigen::VectorXd vbar = positive_null_eigenvector(g);
  return certify_from_parts(
      q_parts(p, in_laplacian(g) * vbar.asDiagonal(), alpha, beta),
      GammaCertificate::Context::unbalanced);
}

double gamma_bar_unbalanced(const NetworkProblem& p, const Digraph& g,
                            double alpha, double beta) {
  return certify_unbalanced(p, g, alpha, beta).gamma_bar;
}

double central_rate_bound(const NetworkProblem& p, const Digraph& g,
                          double alpha, double beta) {
  check_params(alpha, beta);
  check_balanced_graph(g);
  const Eigen::MatrixXd lap = in_laplacian(g);
  const double l2_lap = lambda2_psd(lap + lap.transpose());

  const int n = p.agent_count();
  const int m = p.unknown_dim();
  Eigen::MatrixXd row_blocks(m, n * m);  // [A_1 ... A_n] = 1m^T A
  for (int i = 0; i < n; ++i) {
    row_blocks.middleCols(i * m, m) = p.agent(i).a;
  }
  const double l2_grad = lambda2_psd(row_blocks.transpose() * row_blocks);
  return 2.0 * std::min(0.5 * alpha * l2_lap, beta * l2_grad);
}

bool qbar_is_pd(const GammaCertificate& cert, double gamma) {
  const Eigen::Index mn = cert.q11.rows();
  Eigen::MatrixXd qbar(2 * mn, 2 * mn);
  qbar.topLeftCorner(mn, mn) =
      cert.lambda2_q11 * Eigen::MatrixXd::Identity(mn, mn);
  qbar.topRightCorner(mn, mn) = cert.q12;
  qbar.bottomLeftCorner(mn, mn) = cert.q12.transpose();
  qbar.bottomRightCorner(mn, mn) =
      0.5 * gamma * cert.lambda2_lap * Eigen::MatrixXd::Identity(mn, mn) +
      cert.naat;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      0.5 * (qbar + qbar.transpose()), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw SpectralError("qbar_is_pd: eigendecomposition failed");
  }
  return es.eigenvalues()(0) > 0.0;
}

bool qbar_is_pd(const NetworkProblem& p, const Digraph& g, double alpha,
                double beta, double gamma, GammaCertificate::Context context) {
  const GammaCertificate cert =
      context == GammaCertificate::Context::unbalanced
          ? certify_unbalanced(p, g, alpha, beta)
          : certify_balanced(p, g, alpha, beta);
  return qbar_is_pd(cert, gamma);
}

}  // namespace netlineq
