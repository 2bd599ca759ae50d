#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "netinf/cascade.hpp"
#include "netinf/error.hpp"
#include "netinf/graph.hpp"
#include "netinf/likelihood.hpp"
#include "netinf/rng.hpp"
#include "netinf/transmission.hpp"

namespace netinf {

struct ConditionReport {
  double lambda_min_SS = 0.0;
  double lambda_max_SS = 0.0;
  double incoherence_norm = 0.0;  // |||Q_{S^c S} Q_SS^{-1}|||_inf
  double epsilon_slack = 1.0;     // 1 - incoherence_norm
  std::size_t hazard_rank = 0;
  std::size_t sample_n = 0;
  std::size_t d = 0;
  std::size_t p = 0;
  double incoherence_stderr = std::numeric_limits<double>::quiet_NaN();
};

/// Eigen-extremes of Q_SS and the max absolute row sum of Q_{S^c S} Q_SS^{-1}.
/// `support` indexes rows/columns of Q.
inline ConditionReport check_conditions(const Eigen::MatrixXd& q, const std::vector<std::size_t>& support) {
  require(q.rows() == q.cols(), ErrorKind::invalid_size, "Hessian must be square");
  require(!support.empty(), ErrorKind::invalid_size, "support must be nonempty");
  const auto dim = static_cast<std::size_t>(q.rows());
  std::vector<char> in_s(dim, 0);
  for (std::size_t s : support) {
    require(s < dim, ErrorKind::index, "support index outside Hessian");
    require(!in_s[s], ErrorKind::invalid_parameter, "repeated support index");
    in_s[s] = 1;
  }
  std::vector<std::size_t> comp;
  for (std::size_t k = 0; k < dim; ++k)
    if (!in_s[k]) comp.push_back(k);

  const Eigen::MatrixXd sym = 0.5 * (q + q.transpose());
  const auto ds = static_cast<Eigen::Index>(support.size());
  Eigen::MatrixXd q_ss(ds, ds);
  for (Eigen::Index a = 0; a < ds; ++a)
    for (Eigen::Index b = 0; b < ds; ++b)
      q_ss(a, b) = sym(static_cast<Eigen::Index>(support[a]), static_cast<Eigen::Index>(support[b]));

  ConditionReport r;
  r.d = support.size();
  r.p = dim;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(q_ss, Eigen::EigenvaluesOnly);
  r.lambda_min_SS = eig.eigenvalues().minCoeff();
  r.lambda_max_SS = eig.eigenvalues().maxCoeff();

  const double scale = std::max(std::abs(r.lambda_max_SS), std::numeric_limits<double>::min());
  require(r.lambda_min_SS > 1e-12 * scale, ErrorKind::singularity, "Q_SS is singular");

  if (!comp.empty()) {
    Eigen::MatrixXd q_cs(static_cast<Eigen::Index>(comp.size()), ds);
    for (std::size_t a = 0; a < comp.size(); ++a)
      for (Eigen::Index b = 0; b < ds; ++b)
        q_cs(static_cast<Eigen::Index>(a), b) =
            sym(static_cast<Eigen::Index>(comp[a]), static_cast<Eigen::Index>(support[b]));
    // (Q_cs Q_ss^{-1}) = (Q_ss^{-1} Q_cs^T)^T since Q_ss is symmetric.
    const Eigen::MatrixXd m = q_ss.ldlt().solve(q_cs.transpose()).transpose();
    r.incoherence_norm = m.cwiseAbs().rowwise().sum().maxCoeff();
  }
  r.epsilon_slack = 1.0 - r.incoherence_norm;
  return r;
}

/// Numerical rank of the candidates x cascades hazard matrix: singular values
/// above rel_tol times the largest.
inline std::size_t hazard_rank(const HazardVectorBundle& bundle, double rel_tol = 1e-10) {
  if (bundle.columns.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(bundle.columns);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  std::size_t rank = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k)
    if (sv(k) > rel_tol * sv(0)) ++rank;
  return rank;
}

/// True rates aligned with a candidate list (zero for non-edges).
inline std::vector<double> true_rates(const DirectedNetwork& net, NodeId target, const std::vector<NodeId>& candidates) {
  std::vector<double> a(candidates.size(), 0.0);
  for (std::size_t k = 0; k < candidates.size(); ++k) a[k] = net.rate(candidates[k], target).value_or(0.0);
  return a;
}

struct TruthHessian {
  std::vector<NodeId> candidates;
  std::vector<std::size_t> support;  // indices into candidates of the true parents
  HessianParts parts;
  Eigen::MatrixXd q;
};

/// Monte Carlo surrogate for the population Hessian: Q^n at the true rates over
/// n simulated cascades, with candidates from the target's super-neighborhood.
inline TruthHessian empirical_hessian_at_truth(const DirectedNetwork& net, const TransmissionModel& model,
                                               const SourceDistribution& sources, NodeId target, std::size_t n,
                                               double window, std::uint64_t seed, std::size_t threads = 1) {
  TruthHessian out;
  out.candidates = super_neighborhood(net, target).candidates();
  require(!out.candidates.empty(), ErrorKind::invalid_size, "target has no candidate parents");
  const CascadeSet set = simulate_set(net, model, sources, n, window, seed, threads);
  const NodeProblem prob(target, out.candidates, set, model);
  const std::vector<double> alpha = true_rates(net, target, out.candidates);
  for (std::size_t k = 0; k < alpha.size(); ++k)
    if (alpha[k] > 0.0) out.support.push_back(k);
  out.parts = prob.hessian(alpha);
  out.q = out.parts.assemble();
  return out;
}

/// Bootstrap standard error of the incoherence norm, resampling cascades
/// (columns of the hazard matrix) with replacement.
inline double bootstrap_incoherence_stderr(const HessianParts& parts, const std::vector<std::size_t>& support,
                                           std::size_t replicates, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(parts.hazard.columns.cols());
  if (n == 0 || replicates < 2) return std::numeric_limits<double>::quiet_NaN();
  std::vector<double> values;
  for (std::size_t b = 0; b < replicates; ++b) {
    Rng rng = substream(seed, {0xb007ULL, b});
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(parts.hazard.columns.rows(), parts.hazard.columns.rows());
    for (std::size_t c = 0; c < n; ++c) {
      const auto col = parts.hazard.columns.col(static_cast<Eigen::Index>(uniform_index(rng, n)));
      acc.noalias() += col * col.transpose();
    }
    Eigen::MatrixXd q = acc / static_cast<double>(n);
    q.diagonal() += parts.diag;
    try {
      values.push_back(check_conditions(q, support).incoherence_norm);
    } catch (const Error&) {
      // singular replicate: skip
    }
  }
  if (values.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  return std::sqrt(var / static_cast<double>(values.size() - 1));
}

/// Full report for one target at the true rates.
inline ConditionReport diagnose_target(const DirectedNetwork& net, const TransmissionModel& model,
                                       const SourceDistribution& sources, NodeId target, std::size_t n, double window,
                                       std::uint64_t seed, std::size_t bootstrap = 0, double rank_tol = 1e-10,
                                       std::size_t threads = 1) {
  const TruthHessian th = empirical_hessian_at_truth(net, model, sources, target, n, window, seed, threads);
  require(!th.support.empty(), ErrorKind::invalid_size, "target has no parents");
  ConditionReport r = check_conditions(th.q, th.support);
  r.hazard_rank = hazard_rank(th.parts.hazard, rank_tol);
  r.sample_n = n;
  r.p = super_neighborhood(net, target).size();
  if (bootstrap > 0) r.incoherence_stderr = bootstrap_incoherence_stderr(th.parts, th.support, bootstrap, seed);
  return r;
}

// ---------------------------------------------------------------------------
// Closed forms for the canonical graphs.

struct IncoherenceBound {
  bool satisfiable = false;
  double epsilon_max = 0.0;  // supremum of admissible epsilon (0 when unsatisfiable)
};

/// Star with exponential transmissions, root-only sources, target leaf i.
/// For every other leaf j the condition reads
///   (1 - a_j/(a_i+a_j)) e^{-(a_i+a_j)T} + a_j/(a_i+a_j) < 1 - eps (1 + e^{-a_i T});
/// eps_max is the smallest right-hand solution over j. A missing window means
/// T -> infinity, where eps_max = a_i / (a_i + max_j a_j).
inline IncoherenceBound closed_form_star_incoherence(const std::vector<double>& rates, std::size_t leaf,
                                                     std::optional<double> window) {
  require(leaf < rates.size(), ErrorKind::index, "leaf index out of range");
  for (double a : rates) require(a > 0.0, ErrorKind::invalid_parameter, "star rates must be positive");
  if (window) require(*window > 0.0, ErrorKind::invalid_parameter, "window must be positive");
  const double ai = rates[leaf];
  double eps = std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t j = 0; j < rates.size(); ++j) {
    if (j == leaf) continue;
    any = true;
    const double aj = rates[j];
    const double share = aj / (ai + aj);
    if (!window) {
      eps = std::min(eps, 1.0 - share);
    } else {
      const double lhs = (1.0 - share) * std::exp(-(ai + aj) * *window) + share;
      eps = std::min(eps, (1.0 - lhs) / (1.0 + std::exp(-ai * *window)));
    }
  }
  if (!any) return {true, 1.0};
  IncoherenceBound b;
  b.epsilon_max = std::max(0.0, std::min(1.0, eps));
  b.satisfiable = b.epsilon_max > 0.0;
  return b;
}

/// Chain 0 -> 1 -> 2 -> 3 with target 3 and T -> infinity: the condition holds
/// iff (P0+P1)/(P0+P1+P2) < 1-eps and P0/(P0+P1+P2) < 1-eps.
inline IncoherenceBound closed_form_chain_incoherence(double p0, double p1, double p2) {
  require(p0 >= 0.0 && p1 >= 0.0 && p2 >= 0.0, ErrorKind::invalid_parameter, "source probabilities must be >= 0");
  const double total = p0 + p1 + p2;
  require(total > 0.0, ErrorKind::invalid_parameter, "source probabilities are all zero");
  const double worst = std::max((p0 + p1) / total, p0 / total);
  IncoherenceBound b;
  b.epsilon_max = 1.0 - worst;
  b.satisfiable = b.epsilon_max > 0.0;
  return b;
}

}  // namespace netinf
