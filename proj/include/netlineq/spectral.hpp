#pragma once

#include <Eigen/Dense>
#include <vector>

#include "netlineq/digraph.hpp"
#include "netlineq/linear_problem.hpp"

namespace netlineq {

// Minimum nonzero eigenvalue of a symmetric PSD matrix, regardless of the
// multiplicity of 0. Eigenvalues below tol * lambda_max count as zero.
// Throws SpectralError on asymmetry, indefiniteness, or a zero matrix.
double lambda2_psd(const Eigen::MatrixXd& m, double tol = 1e-9);

// Minimum real part over the nonzero eigenvalues of a (generally
// nonsymmetric) matrix; |lambda| <= tol * max|lambda| counts as zero.
double min_re_nonzero_eigenvalue(const Eigen::MatrixXd& m, double tol = 1e-9);

// Consensus-gain threshold certificate: gamma > gamma_bar makes the
// quadratic-form matrix Qbar of the convergence analysis positive definite.
struct GammaCertificate {
  enum class Context { balanced, time_varying, unbalanced };

  Context context = Context::balanced;
  Eigen::MatrixXd q11;
  Eigen::MatrixXd q12;
  Eigen::MatrixXd naat;  // n*beta*A*A^T block, cached for the Qbar assembly
  double lambda2_q11 = 0.0;
  // lambda2(L + L^T) (balanced) or lambda2(L Vbar + Vbar L^T) (unbalanced).
  double lambda2_lap = 0.0;
  double gamma_bar = 0.0;
  std::vector<double> per_graph_gamma;  // time-varying only
};

// Q11 = (alpha/2)(LL + LL^T) + beta A^T 1m 1m^T A
// Q12 = (1/2)(n beta A^T + alpha LL^T A^T + beta A^T 1m 1m^T A A^T)
// Requires a strongly connected, weight-balanced graph and alpha, beta > 0.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> q_matrices_balanced(
    const NetworkProblem& p, const Digraph& g, double alpha, double beta);

GammaCertificate certify_balanced(const NetworkProblem& p, const Digraph& g,
                                  double alpha, double beta);
double gamma_bar_balanced(const NetworkProblem& p, const Digraph& g,
                          double alpha, double beta);

// Max of the per-graph thresholds over a finite switching set.
GammaCertificate certify_timevarying(const NetworkProblem& p,
                                     const std::vector<Digraph>& graphs,
                                     double alpha, double beta);
double gamma_hat_timevarying(const NetworkProblem& p,
                             const std::vector<Digraph>& graphs, double alpha,
                             double beta);

// Unbalanced variant: the scaled Laplacian L Vbar takes the place of L,
// with Vbar = diag(vbar) from the positive null eigenvector.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> q_matrices_unbalanced(
    const NetworkProblem& p, const Digraph& g, double alpha, double beta);

GammaCertificate certify_unbalanced(const NetworkProblem& p, const Digraph& g,
                                    double alpha, double beta);
double gamma_bar_unbalanced(const NetworkProblem& p, const Digraph& g,
                            double alpha, double beta);

// Decay-rate bound on the Lyapunov function of the centralized flow:
// rho_V = 2 min{ (alpha/2) lambda2(L + L^T), beta lambda2(A^T 1m 1m^T A) }.
// The state-norm decay rate bound is rho_V / 2.
double central_rate_bound(const NetworkProblem& p, const Digraph& g,
                          double alpha, double beta);

// lambda_min of Qbar = [[lambda2(Q11) I, Q12], [Q12^T, Qbar22]] with
// Qbar22 = (gamma/2) lambda2_lap I + n beta A A^T. Positive iff
// gamma > gamma_bar (exactly: the Schur complement shifts linearly in gamma).
bool qbar_is_pd(const GammaCertificate& cert, double gamma);
bool qbar_is_pd(const NetworkProblem& p, const Digraph& g, double alpha,
                double beta, double gamma, GammaCertificate::Context context);

}  // namespace netlineq
