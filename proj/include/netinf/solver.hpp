#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "netinf/cascade.hpp"
#include "netinf/error.hpp"
#include "netinf/graph.hpp"
#include "netinf/likelihood.hpp"
#include "netinf/parallel.hpp"
#include "netinf/transmission.hpp"

namespace netinf {

struct FixedStep {
  double step = 1.0;
};

// Step re-expands by 1/shrink at the start of every iteration, then shrinks
// until the quadratic upper bound holds at the proposal.
struct Backtracking {
  double initial = 1.0;
  double shrink = 0.5;
  int max_shrinks = 200;
};

struct SolverConfig {
  double lambda = 0.0;
  int max_iters = 5000;
  std::variant<FixedStep, Backtracking> step = Backtracking{};
  double tol = 1e-8;
  double init = 0.1;

  void validate() const {
    require(lambda >= 0.0 && std::isfinite(lambda), ErrorKind::invalid_parameter, "lambda must be finite and >= 0");
    require(max_iters >= 1, ErrorKind::invalid_parameter, "max_iters must be >= 1");
    require(tol >= 0.0, ErrorKind::invalid_parameter, "tol must be >= 0");
    require(init > 0.0, ErrorKind::invalid_parameter, "initial rate must be positive");
    if (const auto* f = std::get_if<FixedStep>(&step)) {
      require(f->step > 0.0, ErrorKind::invalid_parameter, "step must be positive");
    } else {
      const auto& b = std::get<Backtracking>(step);
      require(b.initial > 0.0 && b.shrink > 0.0 && b.shrink < 1.0, ErrorKind::invalid_parameter,
              "backtracking needs initial > 0 and shrink in (0,1)");
    }
  }
};

struct RateEstimate {
  NodeId target = 0;
  std::vector<NodeId> candidates;
  std::vector<double> alphas;
  int iterations_used = 0;
  bool converged = false;
  double objective = 0.0;

  std::vector<NodeId> support() const {
    std::vector<NodeId> out;
    for (std::size_t k = 0; k < alphas.size(); ++k)
      if (alphas[k] > 0.0) out.push_back(candidates[k]);
    return out;
  }
};

/// (v - theta)_+ componentwise.
inline std::vector<double> soft_threshold(std::span<const double> v, double theta) {
  require(theta >= 0.0, ErrorKind::domain, "threshold must be >= 0");
  std::vector<double> out(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) out[k] = v[k] > theta ? v[k] - theta : 0.0;
  return out;
}

inline double l1_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

/// Proximal gradient on l^n(alpha) + lambda * ||alpha||_1 over alpha >= 0:
///   alpha <- (alpha - L grad l^n(alpha) - lambda L)_+
///
/// Starts from alpha = cfg.init everywhere. If the very first step already
/// thresholds every coordinate away, the penalty dominates and the empty
/// estimate is returned. With a fixed step an all-zero iterate is likewise
/// terminal. With backtracking every accepted step satisfies the standard
/// sufficient-decrease bound, so the regularized objective never increases.
/// `objective_trace`, if given, receives the objective at every iterate.
inline RateEstimate prox_grad_solve(const NodeProblem& prob, const SolverConfig& cfg,
                                    std::vector<double>* objective_trace = nullptr) {
  cfg.validate();
  const std::size_t dim = prob.dimension();
  RateEstimate est;
  est.target = prob.target();
  est.candidates = prob.candidates();
  if (dim == 0) {
    est.converged = true;
    est.objective = prob.neg_log_likelihood({});
    return est;
  }

  auto objective = [&](std::span<const double> a) { return prob.neg_log_likelihood(a) + cfg.lambda * l1_norm(a); };
  auto prox_step = [&](std::span<const double> a, std::span<const double> g, double step) {
    std::vector<double> v(dim);
    for (std::size_t k = 0; k < dim; ++k) v[k] = a[k] - step * g[k];
    return soft_threshold(v, cfg.lambda * step);
  };
  auto all_zero = [](std::span<const double> a) { return std::all_of(a.begin(), a.end(), [](double x) { return x == 0.0; }); };
  auto check_gradient = [&](const std::vector<double>& g) {
    for (double x : g)
      require(std::isfinite(x), ErrorKind::numeric, "non-finite gradient for node " + std::to_string(prob.target()));
  };

  std::vector<double> alpha(dim, cfg.init);
  double f = objective(alpha);
  require(std::isfinite(f), ErrorKind::initialization,
          "objective is infinite at the initial point for node " + std::to_string(prob.target()));
  if (objective_trace) objective_trace->push_back(f);

  const bool fixed = std::holds_alternative<FixedStep>(cfg.step);
  const double base_step = fixed ? std::get<FixedStep>(cfg.step).step : std::get<Backtracking>(cfg.step).initial;

  {
    std::vector<double> g = prob.gradient(alpha);
    check_gradient(g);
    if (all_zero(prox_step(alpha, g, base_step))) {
      est.alphas.assign(dim, 0.0);
      est.iterations_used = 1;
      est.converged = true;
      est.objective = objective(est.alphas);
      if (objective_trace) objective_trace->push_back(est.objective);
      return est;
    }
  }

  double step = base_step;
  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    std::vector<double> g = prob.gradient(alpha);
    check_gradient(g);
    const double smooth = f - cfg.lambda * l1_norm(alpha);
    std::vector<double> next;
    double f_next = 0.0;

    if (fixed) {
      next = prox_step(alpha, g, step);
      f_next = objective(next);
      if (all_zero(next)) {
        alpha = std::move(next);
        f = f_next;
        est.iterations_used = iter + 1;
        est.converged = true;
        if (objective_trace) objective_trace->push_back(f);
        break;
      }
      require(std::isfinite(f_next), ErrorKind::numeric,
              "fixed step left the domain for node " + std::to_string(prob.target()) + "; use a smaller step");
    } else {
      const auto& bt = std::get<Backtracking>(cfg.step);
      step /= bt.shrink;
      bool accepted = false;
      for (int s = 0; s <= bt.max_shrinks; ++s, step *= bt.shrink) {
        next = prox_step(alpha, g, step);
        const double l_next = prob.neg_log_likelihood(next);
        if (!std::isfinite(l_next)) continue;
        double lin = 0.0, sq = 0.0;
        for (std::size_t k = 0; k < dim; ++k) {
          const double d = next[k] - alpha[k];
          lin += g[k] * d;
          sq += d * d;
        }
        if (l_next <= smooth + lin + sq / (2.0 * step) + 1e-12 * std::abs(smooth)) {
          f_next = l_next + cfg.lambda * l1_norm(next);
          accepted = true;
          break;
        }
      }
      require(accepted, ErrorKind::numeric, "line search failed for node " + std::to_string(prob.target()));
      if (f_next > f) {  // rounding in the bound; keep the better point and stop
        est.iterations_used = iter + 1;
        est.converged = true;
        break;
      }
    }

    double change = 0.0;
    for (std::size_t k = 0; k < dim; ++k) change = std::max(change, std::abs(next[k] - alpha[k]));
    alpha = std::move(next);
    f = f_next;
    if (objective_trace) objective_trace->push_back(f);
    est.iterations_used = iter + 1;
    if (change <= cfg.tol) {
      est.converged = true;
      break;
    }
  }
  est.alphas = std::move(alpha);
  est.objective = f;
  return est;
}

/// lambda_n = k * sqrt(log p / n).
inline double select_lambda(double k_const, std::size_t p, std::size_t n) {
  require(p >= 2, ErrorKind::domain, "lambda rule needs p >= 2");
  require(n >= 1, ErrorKind::domain, "lambda rule needs n >= 1");
  require(k_const >= 0.0, ErrorKind::domain, "lambda constant must be >= 0");
  return k_const * std::sqrt(std::log(static_cast<double>(p)) / static_cast<double>(n));
}

/// Lower bound on lambda_n under which exact support recovery is guaranteed:
/// 8 k3 (2 - eps) / eps * sqrt(log p / n), with k3 the gradient bound and eps
/// the incoherence slack.
inline double theorem_lambda(double k3, double epsilon, std::size_t p, std::size_t n) {
  require(k3 > 0.0, ErrorKind::domain, "gradient bound must be positive");
  require(epsilon > 0.0 && epsilon <= 1.0, ErrorKind::domain, "incoherence slack must lie in (0,1]");
  return select_lambda(8.0 * k3 * (2.0 - epsilon) / epsilon, p, n);
}

// Either a fixed lambda or k * sqrt(log p / n) evaluated per node with that
// node's p and (filtered) n.
struct LambdaRule {
  std::optional<double> fixed;
  double k_const = 0.0;

  static LambdaRule constant(double lambda) { return {lambda, 0.0}; }
  static LambdaRule scaled(double k) { return {std::nullopt, k}; }

  double evaluate(std::size_t p, std::size_t n) const {
    if (fixed) return *fixed;
    if (p < 2 || n == 0) return 0.0;
    return select_lambda(k_const, p, n);
  }
};

struct InferenceOptions {
  LambdaRule lambda = LambdaRule::constant(0.0);
  SolverConfig solver;
  // When set, candidates are restricted to each node's super-neighborhood in
  // this topology and cascades are filtered to those touching it.
  const DirectedNetwork* reference = nullptr;
  std::size_t threads = 1;
};

struct InferredNetwork {
  DirectedNetwork network;
  std::vector<RateEstimate> estimates;  // indexed by target node
  std::vector<double> lambdas;          // lambda used per node
  std::vector<std::size_t> cascades_used;
};

/// Candidates, cascade subset, and p for one node under the options.
struct NodeSetup {
  std::vector<NodeId> candidates;
  CascadeSet cascades;
  std::size_t p = 0;
};

inline NodeSetup setup_node(const CascadeSet& set, NodeId target, const DirectedNetwork* reference) {
  NodeSetup s;
  if (reference) {
    const SuperNeighborhood sn = super_neighborhood(*reference, target);
    s.candidates = sn.candidates();
    s.cascades = filter_by_superneighborhood(set, sn);
    s.p = sn.size();
  } else {
    s.candidates = all_other_nodes(set.num_nodes(), target);
    s.cascades = set;
    s.p = set.num_nodes();
  }
  return s;
}

inline RateEstimate solve_node(const CascadeSet& set, NodeId target, const TransmissionModel& model,
                               const InferenceOptions& opts, double* lambda_used = nullptr,
                               std::size_t* cascades_used = nullptr) {
  NodeSetup s = setup_node(set, target, opts.reference);
  SolverConfig cfg = opts.solver;
  cfg.lambda = opts.lambda.evaluate(s.p, s.cascades.size());
  if (lambda_used) *lambda_used = cfg.lambda;
  if (cascades_used) *cascades_used = s.cascades.size();
  if (s.cascades.empty() || s.candidates.empty()) {
    RateEstimate est;
    est.target = target;
    est.candidates = s.candidates;
    est.alphas.assign(s.candidates.size(), 0.0);
    est.converged = true;
    return est;
  }
  NodeProblem prob(target, std::move(s.candidates), s.cascades, model);
  return prox_grad_solve(prob, cfg);
}

/// Solves every node's subproblem independently and assembles edges j -> i
/// for every alpha_ji > 0. Results are merged by node index.
inline InferredNetwork infer_network(const CascadeSet& set, const TransmissionModel& model,
                                     const InferenceOptions& opts) {
  require(!set.empty(), ErrorKind::invalid_size, "cannot infer a network from an empty cascade set");
  const std::size_t n = set.num_nodes();
  if (opts.reference)
    require(opts.reference->num_nodes() == n, ErrorKind::invalid_parameter, "reference topology size mismatch");
  InferredNetwork out;
  out.estimates.resize(n);
  out.lambdas.resize(n);
  out.cascades_used.resize(n);
  parallel_for(n, opts.threads, [&](std::size_t i) {
    const auto target = static_cast<NodeId>(i);
    try {
      out.estimates[i] = solve_node(set, target, model, opts, &out.lambdas[i], &out.cascades_used[i]);
    } catch (const Error& e) {
      throw Error(e.kind(), "node " + std::to_string(i) + ": " + e.what());
    }
  });
  std::vector<Edge> edges;
  for (const RateEstimate& est : out.estimates)
    for (std::size_t k = 0; k < est.alphas.size(); ++k)
      if (est.alphas[k] > 0.0) edges.push_back({est.candidates[k], est.target, est.alphas[k]});
  out.network = DirectedNetwork(n, std::move(edges));
  return out;
}

using EdgeSet = std::set<std::pair<NodeId, NodeId>>;

/// Links each cascade's source to the first node it infects.
inline EdgeSet first_edge_baseline(const CascadeSet& set) {
  EdgeSet edges;
  for (const Cascade& c : set.cascades) {
    std::optional<NodeId> first;
    for (NodeId v = 0; v < c.num_nodes(); ++v) {
      if (v == c.source() || !c.infected(v)) continue;
      if (!first || c.time(v) < c.time(*first)) first = v;
    }
    if (first) edges.emplace(c.source(), *first);
  }
  return edges;
}

}  // namespace netinf
