#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "netinf/cascade.hpp"
#include "netinf/error.hpp"
#include "netinf/graph.hpp"
#include "netinf/transmission.hpp"

namespace netinf {

// Candidate parent lists.
inline std::vector<NodeId> all_other_nodes(std::size_t num_nodes, NodeId target) {
  std::vector<NodeId> out;
  for (NodeId j = 0; j < num_nodes; ++j)
    if (j != target) out.push_back(j);
  return out;
}

// Columns X(t^c; alpha) = h^{-1} grad h, one per cascade; zero when the target
// is not infected (or is the source).
struct HazardVectorBundle {
  std::size_t num_candidates = 0;
  Eigen::MatrixXd columns;  // num_candidates x num_cascades
};

struct HessianParts {
  Eigen::VectorXd diag;  // D^n(alpha)
  HazardVectorBundle hazard;
  std::size_t n = 0;

  // Q^n = diag(D^n) + (1/n) X X^T
  Eigen::MatrixXd assemble() const {
    Eigen::MatrixXd q = hazard.columns * hazard.columns.transpose();
    if (n > 0) q /= static_cast<double>(n);
    q.diagonal() += diag;
    return q;
  }
};

/// One target node's inference instance. The candidate order fixes the
/// coordinate indexing of every rate vector passed in or returned.
///
/// Per cascade, the elapsed times to the target (or to T if the target stays
/// uninfected) from each earlier-infected candidate are extracted once, so an
/// evaluation costs O(sum of contributors). Cascades whose source is the target
/// carry no information about its incoming rates and contribute nothing, but
/// still count toward n.
class NodeProblem {
 public:
  NodeProblem(NodeId target, std::vector<NodeId> candidates, const CascadeSet& cascades, TransmissionModel model)
      : target_(target), candidates_(std::move(candidates)), model_(model), n_(cascades.size()), window_(cascades.window) {
    for (NodeId j : candidates_)
      require(j != target_, ErrorKind::invalid_parameter, "candidate list contains the target");
    offsets_.push_back(0);
    for (std::size_t pos = 0; pos < cascades.size(); ++pos) {
      const Cascade& c = cascades.cascades[pos];
      require(c.window() == window_, ErrorKind::format, "cascade window does not match the set window");
      require(target_ < c.num_nodes(), ErrorKind::index, "target outside cascade node range");
      if (c.source() == target_) continue;
      const bool hit = c.infected(target_);
      const double horizon = hit ? c.time(target_) : window_;
      const std::size_t begin = terms_.size();
      for (std::size_t k = 0; k < candidates_.size(); ++k) {
        const NodeId j = candidates_[k];
        require(j < c.num_nodes(), ErrorKind::index, "candidate outside cascade node range");
        const double tj = c.time(j);
        if (tj < horizon) {
          const double tau = horizon - tj;
          terms_.push_back({k, tau, -d_log_survival_elapsed(model_, tau), d_hazard_elapsed(model_, tau)});
        }
      }
      if (!hit && terms_.size() == begin) continue;  // nothing to contribute
      infected_.push_back(hit);
      cascade_index_.push_back(pos);
      offsets_.push_back(terms_.size());
    }
  }

  NodeId target() const { return target_; }
  const std::vector<NodeId>& candidates() const { return candidates_; }
  std::size_t dimension() const { return candidates_.size(); }
  std::size_t num_cascades() const { return n_; }
  const TransmissionModel& model() const { return model_; }
  double window() const { return window_; }

  std::size_t num_infected_cascades() const {
    std::size_t m = 0;
    for (bool b : infected_) m += b;
    return m;
  }

  /// l^n(alpha) = -(1/n) sum_c g(t^c; alpha); +infinity when some infected-target
  /// cascade has zero total hazard.
  double neg_log_likelihood(std::span<const double> alpha) const {
    check_point(alpha);
    double total = 0.0;
    for (std::size_t c = 0; c + 1 < offsets_.size(); ++c) {
      double survival = 0.0;
      double h = 0.0;
      for (std::size_t t = offsets_[c]; t < offsets_[c + 1]; ++t) {
        const Term& term = terms_[t];
        survival += alpha[term.k] * term.neg_dy;
        h += alpha[term.k] * term.dh;
      }
      total += survival;
      if (infected_[c]) {
        if (!(h > 0.0)) return std::numeric_limits<double>::infinity();
        total -= std::log(h);
      }
    }
    return n_ == 0 ? 0.0 : total / static_cast<double>(n_);
  }

  /// grad_k = (1/n) sum_c [ -y'(tau_ck) - H'(tau_ck) / h_c ].
  std::vector<double> gradient(std::span<const double> alpha) const {
    check_point(alpha);
    std::vector<double> g(candidates_.size(), 0.0);
    for (std::size_t c = 0; c + 1 < offsets_.size(); ++c) {
      const double h = infected_[c] ? total_hazard(c, alpha) : 0.0;
      for (std::size_t t = offsets_[c]; t < offsets_[c + 1]; ++t) {
        const Term& term = terms_[t];
        g[term.k] += term.neg_dy;
        if (infected_[c]) g[term.k] -= term.dh / h;
      }
    }
    if (n_ > 0)
      for (double& x : g) x /= static_cast<double>(n_);
    return g;
  }

  HazardVectorBundle hazard_bundle(std::span<const double> alpha) const {
    check_point(alpha);
    HazardVectorBundle bundle;
    bundle.num_candidates = candidates_.size();
    bundle.columns = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(candidates_.size()), static_cast<Eigen::Index>(n_));
    for (std::size_t c = 0; c + 1 < offsets_.size(); ++c) {
      if (!infected_[c]) continue;
      const double h = total_hazard(c, alpha);
      const auto col = static_cast<Eigen::Index>(cascade_index_[c]);
      for (std::size_t t = offsets_[c]; t < offsets_[c + 1]; ++t)
        bundle.columns(static_cast<Eigen::Index>(terms_[t].k), col) += terms_[t].dh / h;
    }
    return bundle;
  }

  HessianParts hessian(std::span<const double> alpha) const {
    HessianParts parts;
    parts.hazard = hazard_bundle(alpha);
    parts.n = n_;
    parts.diag = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(candidates_.size()));
    // D_kk = -(1/n) sum_c [ y''(tau_ck) + H''(tau_ck) / h_c ]; the supported
    // families make every term zero, but the assembly follows the general form.
    for (std::size_t c = 0; c + 1 < offsets_.size(); ++c) {
      const double h = infected_[c] ? total_hazard(c, alpha) : 1.0;
      for (std::size_t t = offsets_[c]; t < offsets_[c + 1]; ++t) {
        const Term& term = terms_[t];
        const double a = alpha[term.k];
        double d = -d2_log_survival(model_, term.tau, 0.0, a);
        if (infected_[c]) d -= d2_hazard(model_, term.tau, 0.0, a) / h;
        parts.diag(static_cast<Eigen::Index>(term.k)) += d;
      }
    }
    if (n_ > 0) parts.diag /= static_cast<double>(n_);
    return parts;
  }

 private:
  struct Term {
    std::size_t k;  // candidate index
    double tau;
    double neg_dy;  // -y'(tau) >= 0
    double dh;      // H'(tau) >= 0
  };

  void check_point(std::span<const double> alpha) const {
    require(alpha.size() == candidates_.size(), ErrorKind::invalid_size, "rate vector length != candidate count");
    for (double a : alpha) require(a >= 0.0 && std::isfinite(a), ErrorKind::domain, "rates must be finite and >= 0");
  }

  double total_hazard(std::size_t c, std::span<const double> alpha) const {
    double h = 0.0;
    for (std::size_t t = offsets_[c]; t < offsets_[c + 1]; ++t) h += alpha[terms_[t].k] * terms_[t].dh;
    if (!(h > 0.0))
      fail(ErrorKind::nondifferentiable,
           "zero total hazard on an infected-target cascade for node " + std::to_string(target_));
    return h;
  }

  NodeId target_;
  std::vector<NodeId> candidates_;
  TransmissionModel model_;
  std::size_t n_;
  double window_;

  std::vector<Term> terms_;
  std::vector<std::size_t> offsets_;       // per kept cascade, into terms_
  std::vector<bool> infected_;             // per kept cascade
  std::vector<std::size_t> cascade_index_; // per kept cascade, position in the input set
};

}  // namespace netinf
