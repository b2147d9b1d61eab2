#include "netlineq/linear_problem.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <random>

#include <json.hpp>

namespace netlineq {

NetworkProblem::NetworkProblem(int m, std::vector<AgentData> agents)
    : m_(m), agents_(std::move(agents)) {
  if (m_ < 1) throw DimensionError("unknown dimension m must be >= 1");
  if (agents_.size() < 2) throw DimensionError("need at least 2 agents");
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    if (agents_[i].a.rows() != m_ || agents_[i].a.cols() != m_ ||
        agents_[i].b.size() != m_) {
      throw DimensionError("agent " + std::to_string(i) +
                           " data does not match m=" + std::to_string(m_));
    }
  }
}

NetworkProblem NetworkProblem::parse(const std::string& json_text,
                                     std::optional<std::uint64_t> seed_override) {
  try {
    const nlohmann::json j = nlohmann::json::parse(json_text);
    const int m = j.at("m").get<int>();
    if (j.contains("generator")) {
      const int n = j.at("n").get<int>();
      const auto seed = seed_override.value_or(
          j.at("generator").at("seed").get<std::uint64_t>());
      return generate_problem(seed, n, m);
    }
    std::vector<AgentData> agents;
    for (const auto& ja : j.at("agents")) {
      const auto araw = ja.at("A").get<std::vector<double>>();
      const auto braw = ja.at("b").get<std::vector<double>>();
      if (araw.size() != static_cast<std::size_t>(m) * m ||
          braw.size() != static_cast<std::size_t>(m)) {
        throw ConfigError("problem: agent block size does not match m");
      }
      AgentData ad;
      ad.a.resize(m, m);
      for (int r = 0; r < m; ++r) {
        for (int c = 0; c < m; ++c) ad.a(r, c) = araw[r * m + c];
      }
      ad.b = Eigen::Map<const Eigen::VectorXd>(braw.data(), m);
      agents.push_back(std::move(ad));
    }
    return NetworkProblem(m, std::move(agents));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("problem: ") + e.what());
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("problem: ") + e.what());
  }
}

NetworkProblem NetworkProblem::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open problem file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  try {
    return parse(text);
  } catch (const Error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void NetworkProblem::save(const std::string& path) const {
  nlohmann::json j;
  j["m"] = m_;
  nlohmann::json jagents = nlohmann::json::array();
  for (const AgentData& ad : agents_) {
    std::vector<double> araw(static_cast<std::size_t>(m_) * m_);
    for (int r = 0; r < m_; ++r) {
      for (int c = 0; c < m_; ++c) araw[r * m_ + c] = ad.a(r, c);
    }
    std::vector<double> braw(ad.b.data(), ad.b.data() + m_);
    jagents.push_back({{"A", araw}, {"b", braw}});
  }
  j["agents"] = std::move(jagents);
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write problem file: " + path);
  out << j.dump(2) << '\n';
}

namespace {

// 53-bit mantissa draw in [-1, 1); explicit so the stream is identical on
// every platform (std::uniform_real_distribution is not portable).
double uniform_pm1(std::mt19937_64& rng) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return 2.0 * u - 1.0;
}

}  // namespace

NetworkProblem generate_problem(std::uint64_t seed, int n, int m) {
  if (n < 2 || m < 1) throw DimensionError("generate_problem needs n>=2, m>=1");
  std::mt19937_64 rng(seed);
  for (int attempt = 0; attempt < 64; ++attempt) {
    std::vector<AgentData> agents(n);
    for (int i = 0; i < n; ++i) {
      agents[i].a.resize(m, m);
      for (int r = 0; r < m; ++r) {
        for (int c = 0; c < m; ++c) agents[i].a(r, c) = uniform_pm1(rng);
      }
      agents[i].b.resize(m);
      for (int r = 0; r < m; ++r) agents[i].b(r) = uniform_pm1(rng);
    }
    NetworkProblem p(m, std::move(agents));
    if (has_solution(p)) return p;
  }
  throw Error("generate_problem: no consistent draw after 64 attempts");
}

std::pair<Eigen::MatrixXd, Eigen::VectorXd> global_system(
    const NetworkProblem& p) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p.unknown_dim(), p.unknown_dim());
  Eigen::VectorXd b = Eigen::VectorXd::Zero(p.unknown_dim());
  for (const AgentData& ad : p.agents()) {
    a += ad.a;
    b += ad.b;
  }
  return {std::move(a), std::move(b)};
}

namespace {

int rank_with_cutoff(const Eigen::MatrixXd& m, double cutoff) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  int rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i) {
    if (svd.singularValues()(i) > cutoff) ++rank;
  }
  return rank;
}

}  // namespace

bool has_solution(const NetworkProblem& p, double tol) {
  const auto [a, b] = global_system(p);
  Eigen::MatrixXd aug(a.rows(), a.cols() + 1);
  aug << a, b;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd_aug(aug);
  const double cutoff = tol * svd_aug.singularValues()(0);
  return rank_with_cutoff(a, cutoff) == rank_with_cutoff(aug, cutoff);
}

bool nullspace_condition_holds(const NetworkProblem& p, double tol) {
  const auto [a, b] = global_system(p);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const double smax = svd.singularValues()(0);
  std::vector<double> agent_norms;
  agent_norms.reserve(p.agent_count());
  for (const AgentData& ad : p.agents()) {
    agent_norms.push_back(ad.a.operatorNorm());
  }
  for (int k = 0; k < svd.singularValues().size(); ++k) {
    if (svd.singularValues()(k) > tol * smax) continue;
    const Eigen::VectorXd w = svd.matrixV().col(k);  // unit norm
    for (int i = 0; i < p.agent_count(); ++i) {
      if ((p.agent(i).a * w).norm() > tol * agent_norms[i]) return false;
    }
  }
  return true;
}

double objective_f(const NetworkProblem& p, const Eigen::VectorXd& x_stacked) {
  const int m = p.unknown_dim();
  if (x_stacked.size() != static_cast<Eigen::Index>(m) * p.agent_count()) {
    throw DimensionError("objective_f: stacked vector has wrong length");
  }
  Eigen::VectorXd mismatch = Eigen::VectorXd::Zero(m);
  for (int i = 0; i < p.agent_count(); ++i) {
    mismatch += p.agent(i).a * x_stacked.segment(i * m, m) - p.agent(i).b;
  }
  return mismatch.squaredNorm();
}

Eigen::VectorXd reference_solution(const NetworkProblem& p,
                                   const Eigen::VectorXd& x_avg0) {
  if (!has_solution(p)) {
    throw NoSolutionError("reference_solution: system is inconsistent");
  }
  const auto [a, b] = global_system(p);
  if (x_avg0.size() != a.rows()) {
    throw DimensionError("reference_solution: x_avg0 has wrong length");
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double cutoff = 1e-10 * svd.singularValues()(0);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(a.rows());
  for (int k = 0; k < svd.singularValues().size(); ++k) {
    const Eigen::VectorXd v = svd.matrixV().col(k);
    if (svd.singularValues()(k) > cutoff) {
      // minimum-norm component
      x += (svd.matrixU().col(k).dot(b) / svd.singularValues()(k)) * v;
    } else {
      // null(A) component pinned to the initial average
      x += v.dot(x_avg0) * v;
    }
  }
  if ((a * x - b).norm() > 1e-9 * (a.norm() * x.norm() + b.norm())) {
    throw NoSolutionError("reference_solution: residual check failed");
  }
  return x;
}

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

StackedOperators stack(const NetworkProblem& p, const Eigen::MatrixXd& lap) {
  const int n = p.agent_count();
  const int m = p.unknown_dim();
  if (lap.rows() != n || lap.cols() != n) {
    throw DimensionError("stack: Laplacian must be n x n");
  }
  StackedOperators ops;
  ops.n = n;
  ops.m = m;
  ops.lap = lap;
  ops.lap_kron = kron(lap, Eigen::MatrixXd::Identity(m, m));
  ops.block_a = Eigen::MatrixXd::Zero(n * m, n * m);
  ops.stacked_b.resize(n * m);
  for (int i = 0; i < n; ++i) {
    ops.block_a.block(i * m, i * m, m, m) = p.agent(i).a;
    ops.stacked_b.segment(i * m, m) = p.agent(i).b;
  }
  ops.block_a_t = ops.block_a.transpose();
  ops.ones_m = Eigen::MatrixXd::Identity(m, m).replicate(n, 1);
  ops.proj = Eigen::MatrixXd::Identity(n * m, n * m) -
             (1.0 / n) * ops.ones_m * ops.ones_m.transpose();
  return ops;
}

}  // namespace netlineq
