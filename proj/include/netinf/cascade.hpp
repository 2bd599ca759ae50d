#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <istream>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <queue>
#include <sstream>
#include <string>
#include <vector>

#include "netinf/error.hpp"
#include "netinf/graph.hpp"
#include "netinf/parallel.hpp"
#include "netinf/rng.hpp"
#include "netinf/transmission.hpp"

namespace netinf {

inline constexpr double kUnobserved = std::numeric_limits<double>::infinity();

// One contagion: per-node infection times in [0, T], kUnobserved for nodes not
// infected inside the window.
class Cascade {
 public:
  Cascade() = default;
  Cascade(NodeId source, double window, std::vector<double> times)
      : source_(source), window_(window), times_(std::move(times)) {}

  NodeId source() const { return source_; }
  double window() const { return window_; }
  std::size_t num_nodes() const { return times_.size(); }
  const std::vector<double>& times() const { return times_; }
  double time(NodeId v) const { return times_[v]; }
  bool infected(NodeId v) const { return v < times_.size() && times_[v] != kUnobserved; }

  // Infected nodes ordered by infection time.
  std::vector<NodeId> infected_by_time() const {
    std::vector<NodeId> out;
    for (NodeId v = 0; v < times_.size(); ++v)
      if (infected(v)) out.push_back(v);
    std::stable_sort(out.begin(), out.end(), [&](NodeId a, NodeId b) { return times_[a] < times_[b]; });
    return out;
  }

  std::size_t infected_count() const {
    return static_cast<std::size_t>(std::count_if(times_.begin(), times_.end(), [](double t) { return t != kUnobserved; }));
  }

  friend bool operator==(const Cascade&, const Cascade&) = default;

 private:
  NodeId source_ = 0;
  double window_ = 0.0;
  std::vector<double> times_;
};

// Checks the type invariants; with a network, also that every infected
// non-source node has an earlier-infected in-neighbor.
inline void validate_cascade(const Cascade& c, const DirectedNetwork* net = nullptr) {
  require(c.window() > 0.0, ErrorKind::format, "cascade window must be positive");
  require(c.source() < c.num_nodes(), ErrorKind::index, "cascade source out of range");
  require(c.time(c.source()) == 0.0, ErrorKind::format, "cascade source must be infected at time 0");
  std::vector<double> finite;
  for (double t : c.times()) {
    if (t == kUnobserved) continue;
    require(t >= 0.0 && t <= c.window(), ErrorKind::format, "infection time outside [0, T]");
    finite.push_back(t);
  }
  std::sort(finite.begin(), finite.end());
  require(std::adjacent_find(finite.begin(), finite.end()) == finite.end(), ErrorKind::format,
          "two infection times coincide");
  if (net == nullptr) return;
  require(net->num_nodes() == c.num_nodes(), ErrorKind::format, "cascade and network sizes differ");
  for (NodeId v = 0; v < c.num_nodes(); ++v) {
    if (v == c.source() || !c.infected(v)) continue;
    bool has_parent = false;
    auto [b, e] = net->in_edges(v);
    for (auto it = b; it != e && !has_parent; ++it) has_parent = c.time(net->edges()[*it].src) < c.time(v);
    require(has_parent, ErrorKind::format, "infected node " + std::to_string(v) + " has no earlier in-neighbor");
  }
}

class SourceDistribution {
 public:
  explicit SourceDistribution(std::vector<double> weights) : weights_(std::move(weights)) {
    double total = 0.0;
    for (double w : weights_) {
      require(w >= 0.0 && std::isfinite(w), ErrorKind::invalid_parameter, "source weights must be finite and >= 0");
      total += w;
    }
    require(total > 0.0, ErrorKind::invalid_parameter, "source distribution has no positive weight");
    for (double& w : weights_) w /= total;
    cumulative_.resize(weights_.size());
    std::partial_sum(weights_.begin(), weights_.end(), cumulative_.begin());
  }

  static SourceDistribution uniform(std::size_t num_nodes) {
    return SourceDistribution(std::vector<double>(num_nodes, 1.0));
  }

  static SourceDistribution uniform_over(std::size_t num_nodes, const std::vector<NodeId>& nodes) {
    std::vector<double> w(num_nodes, 0.0);
    for (NodeId v : nodes) {
      require(v < num_nodes, ErrorKind::index, "source node out of range");
      w[v] = 1.0;
    }
    return SourceDistribution(std::move(w));
  }

  std::size_t num_nodes() const { return weights_.size(); }
  const std::vector<double>& weights() const { return weights_; }

  NodeId sample(Rng& rng) const {
    const double u = uniform01(rng) * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    auto idx = static_cast<std::size_t>(it - cumulative_.begin());
    if (idx >= weights_.size()) idx = weights_.size() - 1;
    while (weights_[idx] == 0.0 && idx > 0) --idx;  // guard against rounding at the top end
    return static_cast<NodeId>(idx);
  }

 private:
  std::vector<double> weights_;
  std::vector<double> cumulative_;
};

struct CascadeSet {
  double window = 0.0;
  std::vector<Cascade> cascades;

  std::size_t size() const { return cascades.size(); }
  bool empty() const { return cascades.empty(); }
  std::size_t num_nodes() const { return cascades.empty() ? 0 : cascades.front().num_nodes(); }

  friend bool operator==(const CascadeSet&, const CascadeSet&) = default;
};

// Earliest-arrival simulation with delays supplied by `delay(edge_index)`.
// Delays along the out-edges of a node are requested when that node's
// infection time is settled, in edge order; arrivals beyond the window are
// never settled.
template <typename DelayFn>
Cascade simulate_cascade_with(const DirectedNetwork& net, NodeId source, double window, DelayFn&& delay) {
  require(source < net.num_nodes(), ErrorKind::index, "source " + std::to_string(source) + " out of range");
  require(window > 0.0, ErrorKind::invalid_parameter, "observation window must be positive");

  std::vector<double> times(net.num_nodes(), kUnobserved);
  using Arrival = std::pair<double, NodeId>;
  std::priority_queue<Arrival, std::vector<Arrival>, std::greater<>> queue;
  queue.emplace(0.0, source);
  while (!queue.empty()) {
    const auto [t, v] = queue.top();
    queue.pop();
    if (t > window) break;
    if (times[v] != kUnobserved) continue;
    times[v] = t;
    auto [b, e] = net.out_edges(v);
    for (auto it = b; it != e; ++it) {
      const NodeId w = net.edges()[*it].dst;
      if (times[w] != kUnobserved) continue;
      queue.emplace(t + delay(*it), w);
    }
  }
  return Cascade(source, window, std::move(times));
}

inline Cascade simulate_cascade(const DirectedNetwork& net, const TransmissionModel& model, NodeId source,
                                double window, Rng& rng) {
  return simulate_cascade_with(net, source, window,
                               [&](std::size_t edge) { return sample_delay(model, net.edges()[edge].rate, rng); });
}

/// n independent cascades; cascade c draws its source and delays from
/// substream (seed, c), so the result does not depend on `threads`.
inline CascadeSet simulate_set(const DirectedNetwork& net, const TransmissionModel& model,
                               const SourceDistribution& sources, std::size_t n, double window, std::uint64_t seed,
                               std::size_t threads = 1) {
  require(n >= 1, ErrorKind::invalid_size, "need at least one cascade");
  require(sources.num_nodes() == net.num_nodes(), ErrorKind::invalid_parameter,
          "source distribution size does not match network");
  CascadeSet set;
  set.window = window;
  set.cascades.resize(n);
  parallel_for(n, threads, [&](std::size_t c) {
    Rng rng = substream(seed, {c});
    const NodeId s = sources.sample(rng);
    set.cascades[c] = simulate_cascade(net, model, s, window, rng);
  });
  return set;
}

/// Keeps cascades with at least one infected node in `members` (which should
/// include the target itself).
inline CascadeSet filter_by_nodes(const CascadeSet& set, const std::vector<NodeId>& members) {
  CascadeSet out;
  out.window = set.window;
  for (const Cascade& c : set.cascades) {
    const bool touches = std::any_of(members.begin(), members.end(), [&](NodeId v) { return c.infected(v); });
    if (touches) out.cascades.push_back(c);
  }
  return out;
}

inline CascadeSet filter_by_superneighborhood(const CascadeSet& set, const SuperNeighborhood& sn) {
  std::vector<NodeId> members = sn.members();
  if (!sn.upstream.empty() || !sn.downstream_of_upstream.empty()) {
    if (!std::binary_search(members.begin(), members.end(), sn.target)) {
      members.insert(std::upper_bound(members.begin(), members.end(), sn.target), sn.target);
    }
  }
  return filter_by_nodes(set, members);
}

// ---------------------------------------------------------------------------
// Text format: optional '#' comments, "T <window>", then one line per cascade
// "source;node:time,node:time,..." in increasing time order. Uninfected nodes
// are omitted. An empty source field means "earliest infected node".

inline void write_cascades(std::ostream& os, const CascadeSet& set, const std::vector<std::string>& comments = {}) {
  for (const std::string& c : comments) os << "# " << c << '\n';
  os << "T " << format_real(set.window) << '\n';
  for (const Cascade& c : set.cascades) {
    os << c.source() << ';';
    bool first = true;
    for (NodeId v : c.infected_by_time()) {
      if (!first) os << ',';
      first = false;
      os << v << ':' << format_real(c.time(v));
    }
    os << '\n';
  }
}

/// num_nodes: cascade vector length; when absent, one past the largest node id
/// seen in the file.
inline CascadeSet read_cascades(std::istream& is, std::optional<std::size_t> num_nodes = std::nullopt) {
  struct Raw {
    std::optional<NodeId> source;
    std::vector<std::pair<NodeId, double>> infections;
  };
  std::optional<double> window;
  std::vector<Raw> raws;
  std::size_t max_id = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const std::string where = "cascade line " + std::to_string(lineno);
    if (!window) {
      require(line.rfind("T ", 0) == 0, ErrorKind::format, where + ": expected 'T <window>'");
      window = parse_real(line.substr(2), where);
      require(*window > 0.0 && std::isfinite(*window), ErrorKind::format, where + ": window must be positive");
      continue;
    }
    const auto semi = line.find(';');
    require(semi != std::string::npos, ErrorKind::format, where + ": expected 'source;node:time,...'");
    Raw raw;
    if (semi > 0) raw.source = static_cast<NodeId>(parse_count(line.substr(0, semi), where));
    std::stringstream ss(line.substr(semi + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto colon = item.find(':');
      require(colon != std::string::npos, ErrorKind::format, where + ": expected 'node:time'");
      const auto v = static_cast<NodeId>(parse_count(item.substr(0, colon), where));
      const double t = parse_real(item.substr(colon + 1), where);
      require(t >= 0.0, ErrorKind::format, where + ": negative infection time");
      require(t <= *window, ErrorKind::format, where + ": infection time exceeds the window");
      raw.infections.emplace_back(v, t);
      max_id = std::max<std::size_t>(max_id, v);
    }
    require(!raw.infections.empty(), ErrorKind::format, where + ": cascade lists no infections");
    if (raw.source) max_id = std::max<std::size_t>(max_id, *raw.source);
    raws.push_back(std::move(raw));
  }
  require(window.has_value(), ErrorKind::format, "cascade file has no 'T' header");
  const std::size_t n = num_nodes.value_or(max_id + 1);
  require(raws.empty() || max_id < n, ErrorKind::format, "cascade file mentions a node beyond the network size");

  CascadeSet set;
  set.window = *window;
  for (std::size_t k = 0; k < raws.size(); ++k) {
    const std::string where = "cascade " + std::to_string(k);
    std::vector<double> times(n, kUnobserved);
    for (auto [v, t] : raws[k].infections) {
      require(times[v] == kUnobserved, ErrorKind::format, where + ": duplicate node " + std::to_string(v));
      times[v] = t;
    }
    NodeId source;
    if (raws[k].source) {
      source = *raws[k].source;
    } else {
      source = static_cast<NodeId>(std::min_element(times.begin(), times.end()) - times.begin());
    }
    Cascade c(source, *window, std::move(times));
    validate_cascade(c);
    set.cascades.push_back(std::move(c));
  }
  return set;
}

}  // namespace netinf
