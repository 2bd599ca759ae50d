#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "netinf/error.hpp"
#include "netinf/rng.hpp"

namespace netinf {

using NodeId = std::uint32_t;

struct Edge {
  NodeId src;
  NodeId dst;
  double rate;

  friend bool operator==(const Edge&, const Edge&) = default;
};

// Immutable weighted digraph. Edges are kept sorted by (src, dst) and indexed
// in both directions.
class DirectedNetwork {
 public:
  DirectedNetwork() = default;

  DirectedNetwork(std::size_t num_nodes, std::vector<Edge> edges) : num_nodes_(num_nodes), edges_(std::move(edges)) {
    require(num_nodes_ >= 1, ErrorKind::invalid_size, "network needs at least one node");
    for (const Edge& e : edges_) {
      require(e.src < num_nodes_ && e.dst < num_nodes_, ErrorKind::index,
              "edge " + std::to_string(e.src) + "->" + std::to_string(e.dst) + " outside node range");
      require(e.src != e.dst, ErrorKind::invalid_parameter, "self-loop on node " + std::to_string(e.src));
      require(e.rate > 0.0 && std::isfinite(e.rate), ErrorKind::invalid_parameter,
              "edge rates must be positive and finite");
    }
    std::sort(edges_.begin(), edges_.end(),
              [](const Edge& a, const Edge& b) { return std::pair(a.src, a.dst) < std::pair(b.src, b.dst); });
    for (std::size_t k = 1; k < edges_.size(); ++k) {
      require(edges_[k - 1].src != edges_[k].src || edges_[k - 1].dst != edges_[k].dst, ErrorKind::invalid_parameter,
              "duplicate edge " + std::to_string(edges_[k].src) + "->" + std::to_string(edges_[k].dst));
    }
    build_index();
  }

  std::size_t num_nodes() const { return num_nodes_; }
  std::size_t num_edges() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }

  // Indices into edges() of the out-/in-edges of a node.
  std::pair<const std::size_t*, const std::size_t*> out_edges(NodeId u) const {
    return {out_index_.data() + out_offsets_[u], out_index_.data() + out_offsets_[u + 1]};
  }
  std::pair<const std::size_t*, const std::size_t*> in_edges(NodeId v) const {
    return {in_index_.data() + in_offsets_[v], in_index_.data() + in_offsets_[v + 1]};
  }

  std::optional<double> rate(NodeId src, NodeId dst) const {
    auto [b, e] = in_edges(dst);
    for (auto it = b; it != e; ++it)
      if (edges_[*it].src == src) return edges_[*it].rate;
    return std::nullopt;
  }
  bool has_edge(NodeId src, NodeId dst) const { return rate(src, dst).has_value(); }

  std::set<std::pair<NodeId, NodeId>> edge_set() const {
    std::set<std::pair<NodeId, NodeId>> out;
    for (const Edge& e : edges_) out.emplace(e.src, e.dst);
    return out;
  }

  friend bool operator==(const DirectedNetwork& a, const DirectedNetwork& b) {
    return a.num_nodes_ == b.num_nodes_ && a.edges_ == b.edges_;
  }

 private:
  void build_index() {
    out_offsets_.assign(num_nodes_ + 1, 0);
    in_offsets_.assign(num_nodes_ + 1, 0);
    for (const Edge& e : edges_) {
      ++out_offsets_[e.src + 1];
      ++in_offsets_[e.dst + 1];
    }
    for (std::size_t v = 0; v < num_nodes_; ++v) {
      out_offsets_[v + 1] += out_offsets_[v];
      in_offsets_[v + 1] += in_offsets_[v];
    }
    out_index_.resize(edges_.size());
    in_index_.resize(edges_.size());
    std::vector<std::size_t> out_fill(out_offsets_.begin(), out_offsets_.end() - 1);
    std::vector<std::size_t> in_fill(in_offsets_.begin(), in_offsets_.end() - 1);
    for (std::size_t k = 0; k < edges_.size(); ++k) {
      out_index_[out_fill[edges_[k].src]++] = k;
      in_index_[in_fill[edges_[k].dst]++] = k;
    }
  }

  std::size_t num_nodes_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> out_offsets_, out_index_;
  std::vector<std::size_t> in_offsets_, in_index_;
};

// Drops repeated ordered pairs, keeping the first occurrence.
inline std::vector<Edge> dedup_edges(const std::vector<Edge>& edges) {
  std::set<std::pair<NodeId, NodeId>> seen;
  std::vector<Edge> out;
  out.reserve(edges.size());
  for (const Edge& e : edges)
    if (seen.emplace(e.src, e.dst).second) out.push_back(e);
  return out;
}

struct ParentSet {
  NodeId target = 0;
  std::vector<NodeId> parents;  // sorted
  double min_rate = 0.0;        // 0 when there are no parents

  std::size_t in_degree() const { return parents.size(); }
  bool contains(NodeId j) const { return std::binary_search(parents.begin(), parents.end(), j); }
};

inline ParentSet parent_set(const DirectedNetwork& net, NodeId target) {
  require(target < net.num_nodes(), ErrorKind::index, "target " + std::to_string(target) + " out of range");
  ParentSet ps;
  ps.target = target;
  auto [b, e] = net.in_edges(target);
  for (auto it = b; it != e; ++it) {
    const Edge& edge = net.edges()[*it];
    ps.parents.push_back(edge.src);
    ps.min_rate = ps.parents.size() == 1 ? edge.rate : std::min(ps.min_rate, edge.rate);
  }
  std::sort(ps.parents.begin(), ps.parents.end());
  return ps;
}

// R = nodes with a directed path to the target, U = nodes reachable from R.
struct SuperNeighborhood {
  NodeId target = 0;
  std::vector<NodeId> upstream;                // R, sorted
  std::vector<NodeId> downstream_of_upstream;  // U, sorted

  std::vector<NodeId> members() const {
    std::vector<NodeId> out;
    std::set_union(upstream.begin(), upstream.end(), downstream_of_upstream.begin(), downstream_of_upstream.end(),
                   std::back_inserter(out));
    return out;
  }
  std::size_t size() const { return members().size(); }
  bool contains(NodeId v) const {
    return std::binary_search(upstream.begin(), upstream.end(), v) ||
           std::binary_search(downstream_of_upstream.begin(), downstream_of_upstream.end(), v);
  }
  // Candidate parents for the target: the super-neighborhood minus the target.
  std::vector<NodeId> candidates() const {
    std::vector<NodeId> out = members();
    out.erase(std::remove(out.begin(), out.end(), target), out.end());
    return out;
  }
};

inline SuperNeighborhood super_neighborhood(const DirectedNetwork& net, NodeId target) {
  require(target < net.num_nodes(), ErrorKind::index, "target " + std::to_string(target) + " out of range");
  const std::size_t n = net.num_nodes();
  std::vector<char> in_r(n, 0), in_u(n, 0);

  std::vector<NodeId> stack{target};
  while (!stack.empty()) {
    const NodeId v = stack.back();
    stack.pop_back();
    auto [b, e] = net.in_edges(v);
    for (auto it = b; it != e; ++it) {
      const NodeId u = net.edges()[*it].src;
      if (u != target && !in_r[u]) {
        in_r[u] = 1;
        stack.push_back(u);
      }
    }
  }
  for (NodeId r = 0; r < n; ++r)
    if (in_r[r]) stack.push_back(r);
  while (!stack.empty()) {
    const NodeId u = stack.back();
    stack.pop_back();
    auto [b, e] = net.out_edges(u);
    for (auto it = b; it != e; ++it) {
      const NodeId v = net.edges()[*it].dst;
      if (!in_u[v]) {
        in_u[v] = 1;
        stack.push_back(v);
      }
    }
  }

  SuperNeighborhood sn;
  sn.target = target;
  for (NodeId v = 0; v < n; ++v) {
    if (in_r[v]) sn.upstream.push_back(v);
    if (in_u[v]) sn.downstream_of_upstream.push_back(v);
  }
  return sn;
}

// ---------------------------------------------------------------------------
// Generators. Topology-only generators emit unit rates; use sample_rates().

inline DirectedNetwork generate_chain(std::size_t n) {
  require(n >= 2, ErrorKind::invalid_size, "chain needs at least 2 nodes");
  std::vector<Edge> edges;
  for (NodeId i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, 1.0});
  return DirectedNetwork(n, std::move(edges));
}

inline DirectedNetwork generate_star(std::size_t num_leaves) {
  require(num_leaves >= 1, ErrorKind::invalid_size, "star needs at least one leaf");
  std::vector<Edge> edges;
  for (NodeId k = 1; k <= num_leaves; ++k) edges.push_back({0, k, 1.0});
  return DirectedNetwork(num_leaves + 1, std::move(edges));
}

// Fixed 7-node, two-level tree whose edges all point toward node 0 (in-degree 3).
inline DirectedNetwork tree_fixture() {
  return DirectedNetwork(7, {{1, 0, 1.0}, {2, 0, 1.0}, {3, 0, 1.0}, {4, 1, 1.0}, {5, 2, 1.0}, {6, 2, 1.0}});
}

using KroneckerSeed = std::array<std::array<double, 2>, 2>;

inline constexpr KroneckerSeed kDefaultKroneckerSeed{{{0.9, 0.1}, {0.1, 0.9}}};

inline double kronecker_edge_probability(const KroneckerSeed& seed, unsigned power, NodeId u, NodeId v) {
  double p = 1.0;
  for (unsigned bit = 0; bit < power; ++bit) p *= seed[(u >> bit) & 1U][(v >> bit) & 1U];
  return p;
}

inline DirectedNetwork generate_kronecker(const KroneckerSeed& seed, unsigned power, Rng& rng) {
  for (const auto& row : seed)
    for (double p : row)
      require(p >= 0.0 && p <= 1.0, ErrorKind::invalid_parameter, "kronecker seed entries must lie in [0,1]");
  require(power >= 1 && power <= 20, ErrorKind::invalid_parameter, "kronecker power must be in [1,20]");
  const NodeId n = NodeId{1} << power;
  std::vector<Edge> edges;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = 0; v < n; ++v) {
      const double p = kronecker_edge_probability(seed, power, u, v);
      // Draw for every pair, including self-loops, so the stream layout is
      // independent of the seed matrix.
      const bool present = uniform01(rng) < p;
      if (present && u != v) edges.push_back({u, v, 1.0});
    }
  }
  return DirectedNetwork(n, std::move(edges));
}

inline DirectedNetwork generate_forest_fire(std::size_t n, double p_fwd, double p_bwd, Rng& rng) {
  require(n >= 1, ErrorKind::invalid_size, "forest fire needs at least one node");
  require(p_fwd >= 0.0 && p_fwd < 1.0 && p_bwd >= 0.0 && p_bwd < 1.0, ErrorKind::invalid_parameter,
          "forest fire burning probabilities must lie in [0,1)");

  std::vector<std::vector<NodeId>> out_adj(n), in_adj(n);
  std::vector<Edge> edges;
  auto geometric = [&](double p) {
    std::size_t k = 0;
    while (uniform01(rng) < p) ++k;
    return k;
  };
  // Picks up to k distinct unvisited entries of `pool`, uniformly.
  auto pick = [&](const std::vector<NodeId>& pool, const std::vector<char>& visited, std::size_t k) {
    std::vector<NodeId> open;
    for (NodeId w : pool)
      if (!visited[w]) open.push_back(w);
    for (std::size_t j = 0; j < open.size() && j < k; ++j)
      std::swap(open[j], open[j + uniform_index(rng, open.size() - j)]);
    if (open.size() > k) open.resize(k);
    return open;
  };

  for (NodeId v = 1; v < n; ++v) {
    std::vector<char> visited(v, 0);
    std::vector<NodeId> burned;
    const auto ambassador = static_cast<NodeId>(uniform_index(rng, v));
    visited[ambassador] = 1;
    std::vector<NodeId> frontier{ambassador};
    burned.push_back(ambassador);
    while (!frontier.empty()) {
      const NodeId w = frontier.front();
      frontier.erase(frontier.begin());
      const std::size_t x = geometric(p_fwd);
      const std::size_t y = geometric(p_bwd);
      std::vector<NodeId> next = pick(out_adj[w], visited, x);
      for (NodeId z : next) visited[z] = 1;
      std::vector<NodeId> back = pick(in_adj[w], visited, y);
      for (NodeId z : back) visited[z] = 1;
      next.insert(next.end(), back.begin(), back.end());
      for (NodeId z : next) {
        burned.push_back(z);
        frontier.push_back(z);
      }
    }
    for (NodeId z : burned) {
      edges.push_back({v, z, 1.0});
      out_adj[v].push_back(z);
      in_adj[z].push_back(v);
    }
  }
  return DirectedNetwork(n, dedup_edges(edges));
}

// Redraws each edge rate i.i.d. uniform on [lo, hi]; edges are visited in
// sorted (src, dst) order.
inline DirectedNetwork sample_rates(const DirectedNetwork& topology, double lo, double hi, Rng& rng) {
  require(lo > 0.0, ErrorKind::invalid_parameter, "rate lower bound must be positive");
  require(lo <= hi, ErrorKind::invalid_parameter, "rate range must satisfy lo <= hi");
  std::vector<Edge> edges = topology.edges();
  for (Edge& e : edges) e.rate = lo == hi ? lo : uniform_real(rng, lo, hi);
  return DirectedNetwork(topology.num_nodes(), std::move(edges));
}

// ---------------------------------------------------------------------------
// Text format: optional '#' comment lines, "N <num_nodes>", then "src,dst,rate".

inline std::string format_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

inline void write_graph(std::ostream& os, const DirectedNetwork& net, const std::vector<std::string>& comments = {}) {
  for (const std::string& c : comments) os << "# " << c << '\n';
  os << "N " << net.num_nodes() << '\n';
  for (const Edge& e : net.edges()) os << e.src << ',' << e.dst << ',' << format_real(e.rate) << '\n';
}

inline double parse_real(const std::string& s, const std::string& context) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(s, &used);
  } catch (const std::exception&) {
    fail(ErrorKind::format, "bad number '" + s + "' in " + context);
  }
  require(used == s.size(), ErrorKind::format, "bad number '" + s + "' in " + context);
  return x;
}

inline std::uint64_t parse_count(const std::string& s, const std::string& context) {
  require(!s.empty() && s.find_first_not_of("0123456789") == std::string::npos, ErrorKind::format,
          "bad integer '" + s + "' in " + context);
  try {
    return std::stoull(s);
  } catch (const std::exception&) {
    fail(ErrorKind::format, "integer out of range '" + s + "' in " + context);
  }
}

inline DirectedNetwork read_graph(std::istream& is) {
  std::string line;
  std::optional<std::size_t> n;
  std::vector<Edge> edges;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const std::string where = "graph line " + std::to_string(lineno);
    if (!n) {
      require(line.rfind("N ", 0) == 0, ErrorKind::format, where + ": expected 'N <num_nodes>'");
      n = parse_count(line.substr(2), where);
      continue;
    }
    std::stringstream ss(line);
    std::string a, b, r;
    require(std::getline(ss, a, ',') && std::getline(ss, b, ',') && std::getline(ss, r) &&
                r.find(',') == std::string::npos,
            ErrorKind::format, where + ": expected 'src,dst,rate'");
    edges.push_back({static_cast<NodeId>(parse_count(a, where)), static_cast<NodeId>(parse_count(b, where)),
                     parse_real(r, where)});
  }
  require(n.has_value(), ErrorKind::format, "graph file has no 'N' header");
  return DirectedNetwork(*n, std::move(edges));
}

}  // namespace netinf
