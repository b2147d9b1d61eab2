#include "netlineq/dynamics.hpp"

#include <cmath>
#include <cstring>

#include "netlineq/kernels.hpp"

namespace netlineq {

const char* to_string(AlgorithmKind kind) {
  switch (kind) {
    case AlgorithmKind::central: return "central";
    case AlgorithmKind::gdac: return "gdac";
    case AlgorithmKind::gdac_tv: return "gdac_tv";
    case AlgorithmKind::unbalanced_fixed_v: return "unbalanced_fixed_v";
    case AlgorithmKind::dist: return "dist";
  }
  return "?";
}

AlgorithmKind algorithm_kind_from_string(const std::string& name) {
  if (name == "central") return AlgorithmKind::central;
  if (name == "gdac") return AlgorithmKind::gdac;
  if (name == "gdac_tv") return AlgorithmKind::gdac_tv;
  if (name == "unbalanced_fixed_v") return AlgorithmKind::unbalanced_fixed_v;
  if (name == "dist") return AlgorithmKind::dist;
  throw ConfigError("unknown algorithm kind: " + name);
}

bool uses_gamma(AlgorithmKind kind) { return kind != AlgorithmKind::central; }
bool uses_y(AlgorithmKind kind) { return kind != AlgorithmKind::central; }
bool uses_v(AlgorithmKind kind) { return kind == AlgorithmKind::dist; }

void validate(const AlgorithmSpec& spec) {
  if (!(spec.alpha > 0.0) || !(spec.beta > 0.0)) {
    throw Error("algorithm spec: alpha and beta must be positive");
  }
  if (uses_gamma(spec.kind) && !(spec.gamma > 0.0)) {
    throw Error("algorithm spec: gamma must be positive");
  }
}

namespace {

void require_x(const StackedOperators& ops, const SolverState& s) {
  if (s.x.size() != static_cast<Eigen::Index>(ops.n) * ops.m) {
    throw DimensionError("solver state x has wrong length");
  }
}

void require_y(const StackedOperators& ops, const SolverState& s) {
  if (s.y.size() != static_cast<Eigen::Index>(ops.n) * ops.m) {
    throw DimensionError("solver state is missing the y component");
  }
}

// rep = ones (x) block for an m-vector block.
void replicate_block(const Eigen::VectorXd& block, int n, Eigen::VectorXd& rep) {
  const int m = static_cast<int>(block.size());
  rep.resize(static_cast<Eigen::Index>(n) * m);
  for (int i = 0; i < n; ++i) {
    std::memcpy(rep.data() + static_cast<std::ptrdiff_t>(i) * m, block.data(),
                sizeof(double) * m);
  }
}

// out = diag(scales (x) ones_m) * in: agent block i scaled by scales(i).
void scale_blocks(const Eigen::VectorXd& in, const Eigen::VectorXd& scales,
                  int m, Eigen::VectorXd& out) {
  const auto& k = kernels::active();
  out = in;
  for (Eigen::Index i = 0; i < scales.size(); ++i) {
    k.scal(scales(i), out.data() + i * m, m);
  }
}

// Shared by the fixed-vbar and estimated-v variants.
Derivatives unbalanced_fields(const StackedOperators& ops,
                              const Eigen::VectorXd& scales,
                              const SolverState& s, const AlgorithmSpec& spec) {
  require_x(ops, s);
  require_y(ops, s);
  const auto& k = kernels::active();
  const std::size_t mn = static_cast<std::size_t>(ops.n) * ops.m;

  Eigen::VectorXd xs;
  scale_blocks(s.x, scales, ops.m, xs);

  Derivatives d;
  d.x.resize(mn);
  k.gemv(mn, mn, -spec.alpha, ops.lap_kron.data(), xs.data(), 0.0, d.x.data());
  k.gemv(mn, mn, -static_cast<double>(ops.n) * spec.beta, ops.block_a_t.data(),
         s.y.data(), 1.0, d.x.data());

  Eigen::VectorXd ys;
  scale_blocks(s.y, scales, ops.m, ys);
  d.y.resize(mn);
  k.gemv(mn, mn, 1.0, ops.block_a.data(), d.x.data(), 0.0, d.y.data());
  k.gemv(mn, mn, -spec.gamma, ops.lap_kron.data(), ys.data(), 1.0, d.y.data());
  return d;
}

}  // namespace

Derivatives rhs_central(const StackedOperators& ops, const SolverState& s,
                        const AlgorithmSpec& spec) {
  require_x(ops, s);
  const auto& k = kernels::active();
  const std::size_t mn = static_cast<std::size_t>(ops.n) * ops.m;

  // residual = A x - b, then its network sum
  Eigen::VectorXd residual(mn);
  k.gemv(mn, mn, 1.0, ops.block_a.data(), s.x.data(), 0.0, residual.data());
  k.axpy(-1.0, ops.stacked_b.data(), residual.data(), mn);
  Eigen::VectorXd total = Eigen::VectorXd::Zero(ops.m);
  for (int i = 0; i < ops.n; ++i) {
    k.axpy(1.0, residual.data() + static_cast<std::ptrdiff_t>(i) * ops.m,
           total.data(), ops.m);
  }

  Eigen::VectorXd rep;
  replicate_block(total, ops.n, rep);

  Derivatives d;
  d.x.resize(mn);
  k.gemv(mn, mn, -spec.alpha, ops.lap_kron.data(), s.x.data(), 0.0,
         d.x.data());
  k.gemv(mn, mn, -spec.beta, ops.block_a_t.data(), rep.data(), 1.0,
         d.x.data());
  return d;
}

Derivatives rhs_gdac(const StackedOperators& ops, const SolverState& s,
                     const AlgorithmSpec& spec) {
  require_x(ops, s);
  require_y(ops, s);
  const auto& k = kernels::active();
  const std::size_t mn = static_cast<std::size_t>(ops.n) * ops.m;

  Derivatives d;
  d.x.resize(mn);
  k.gemv(mn, mn, -spec.alpha, ops.lap_kron.data(), s.x.data(), 0.0,
         d.x.data());
  k.gemv(mn, mn, -static_cast<double>(ops.n) * spec.beta, ops.block_a_t.data(),
         s.y.data(), 1.0, d.x.data());

  // ydot = A xdot - gamma LL y; the A xdot form keeps the conserved quantity
  // 1m^T (y - A x) flat to rounding.
  d.y.resize(mn);
  k.gemv(mn, mn, 1.0, ops.block_a.data(), d.x.data(), 0.0, d.y.data());
  k.gemv(mn, mn, -spec.gamma, ops.lap_kron.data(), s.y.data(), 1.0,
         d.y.data());
  return d;
}

Derivatives rhs_timevarying(const std::vector<StackedOperators>& ops_per_graph,
                            const GraphSequence& seq, std::uint64_t step,
                            const SolverState& s, const AlgorithmSpec& spec) {
  if (ops_per_graph.size() != seq.size()) {
    throw DimensionError("rhs_timevarying: one operator set per graph");
  }
  return rhs_gdac(ops_per_graph[next_graph_index(seq, step)], s, spec);
}

Derivatives rhs_unbalanced_fixed_v(const StackedOperators& ops,
                                   const Eigen::VectorXd& vbar,
                                   const SolverState& s,
                                   const AlgorithmSpec& spec) {
  if (vbar.size() != ops.n) {
    throw DimensionError("rhs_unbalanced_fixed_v: vbar must have length n");
  }
  if (!(vbar.minCoeff() > 0.0)) {
    throw Error("rhs_unbalanced_fixed_v: vbar must be strictly positive");
  }
  return unbalanced_fields(ops, vbar, s, spec);
}

Derivatives rhs_dist(const StackedOperators& ops, const SolverState& s,
                     const AlgorithmSpec& spec) {
  if (s.v.size() != ops.n) {
    throw DimensionError("rhs_dist: state is missing the v component");
  }
  Derivatives d = unbalanced_fields(ops, s.v, s, spec);
  d.v.resize(ops.n);
  kernels::active().gemv(ops.n, ops.n, -1.0, ops.lap.data(), s.v.data(), 0.0,
                         d.v.data());
  return d;
}

Eigen::VectorXd rhs_dac(const Eigen::MatrixXd& lap, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& zdot) {
  if (lap.rows() != x.size() || zdot.size() != x.size()) {
    throw DimensionError("rhs_dac: dimension mismatch");
  }
  return -lap * x + zdot;
}

Eigen::VectorXd rhs_dac(const Digraph& g, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& zdot) {
  return rhs_dac(in_laplacian(g), x, zdot);
}

SolverState default_init(const NetworkProblem& p, const AlgorithmSpec& spec,
                         const std::optional<Eigen::VectorXd>& x0) {
  const int n = p.agent_count();
  const int m = p.unknown_dim();
  const Eigen::Index mn = static_cast<Eigen::Index>(n) * m;

  SolverState s;
  if (x0) {
    if (x0->size() != mn) {
      throw DimensionError("default_init: x0 must have length n*m");
    }
    s.x = *x0;
  } else {
    s.x = Eigen::VectorXd::Zero(mn);
  }

  if (uses_y(spec.kind)) {
    const auto& k = kernels::active();
    s.y.resize(mn);
    for (int i = 0; i < n; ++i) {
      double* yi = s.y.data() + static_cast<std::ptrdiff_t>(i) * m;
      k.gemv(m, m, 1.0, p.agent(i).a.data(), s.x.data() + i * m, 0.0, yi);
      k.axpy(-1.0, p.agent(i).b.data(), yi, m);
    }
  }
  if (uses_v(spec.kind)) {
    s.v = Eigen::VectorXd::Constant(n, 1.0 / n);
  }
  return s;
}

SolverState euler_step(SolverState s, const Derivatives& d, double h) {
  if (!(h > 0.0)) throw Error("euler_step: h must be positive");
  const auto& k = kernels::active();
  if (d.x.size() != s.x.size() || d.y.size() != s.y.size() ||
      d.v.size() != s.v.size()) {
    throw DimensionError("euler_step: derivative shape mismatch");
  }
  k.axpy(h, d.x.data(), s.x.data(), s.x.size());
  if (s.has_y()) k.axpy(h, d.y.data(), s.y.data(), s.y.size());
  if (s.has_v()) k.axpy(h, d.v.data(), s.v.data(), s.v.size());
  s.t += h;

  constexpr double kNormCap = 1e24;  // (1e12)^2
  const bool ok = s.x.squaredNorm() <= kNormCap &&
                  (!s.has_y() || s.y.squaredNorm() <= kNormCap) &&
                  (!s.has_v() || s.v.squaredNorm() <= kNormCap);
  if (!ok) {
    throw DivergenceError("state diverged at t=" + std::to_string(s.t) +
                          "; reduce the stepsize or raise gamma");
  }
  return s;
}

Eigen::VectorXd conserved_mismatch(const NetworkProblem& p,
                                   const SolverState& s) {
  const int n = p.agent_count();
  const int m = p.unknown_dim();
  if (!s.has_y()) {
    throw DimensionError("conserved_mismatch: state has no y component");
  }
  const auto& k = kernels::active();
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd tmp(m);
  for (int i = 0; i < n; ++i) {
    k.gemv(m, m, 1.0, p.agent(i).a.data(), s.x.data() + i * m, 0.0,
           tmp.data());
    acc += s.y.segment(static_cast<Eigen::Index>(i) * m, m) - tmp;
  }
  return acc;
}

ErrorMetrics error_metrics(const NetworkProblem& p, const StackedOperators& ops,
                           const SolverState& s, const Eigen::VectorXd& xstar) {
  const int n = ops.n;
  const int m = ops.m;
  const Eigen::Index mn = static_cast<Eigen::Index>(n) * m;
  if (s.x.size() != mn || xstar.size() != m) {
    throw DimensionError("error_metrics: dimension mismatch");
  }

  Eigen::VectorXd xbar = Eigen::VectorXd::Zero(m);
  for (int i = 0; i < n; ++i) xbar += s.x.segment(i * m, m);
  xbar /= n;

  ErrorMetrics em;
  em.err_avg = (xbar - xstar).norm();

  double full2 = 0.0;
  for (int i = 0; i < n; ++i) {
    full2 += (s.x.segment(i * m, m) - xstar).squaredNorm();
  }
  em.err_full = std::sqrt(full2);

  em.consensus_spread = (ops.proj * s.x).norm();

  if (s.has_y()) {
    Eigen::VectorXd residual = ops.block_a * s.x - ops.stacked_b;
    Eigen::VectorXd avg = Eigen::VectorXd::Zero(m);
    for (int i = 0; i < n; ++i) avg += residual.segment(i * m, m);
    avg /= n;
    double e2 = 0.0;
    for (int i = 0; i < n; ++i) {
      e2 += (s.y.segment(i * m, m) - avg).squaredNorm();
    }
    em.e_norm = std::sqrt(e2);

    Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
    for (const AgentData& ad : p.agents()) b += ad.b;
    em.conserved_drift = (conserved_mismatch(p, s) + b).norm();
  }

  em.objective = objective_f(p, s.x);
  return em;
}

}  // namespace netlineq
