#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "netinf/cascade.hpp"
#include "netinf/error.hpp"
#include "netinf/graph.hpp"
#include "netinf/parallel.hpp"
#include "netinf/rng.hpp"
#include "netinf/solver.hpp"
#include "netinf/transmission.hpp"

namespace netinf {

struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t true_edge_count = 0;
  std::size_t inferred_edge_count = 0;
};

/// Precision, recall and F1 = 2PR/(P+R); every 0/0 is taken as 0.
inline Metrics score(const EdgeSet& inferred, const EdgeSet& truth) {
  std::size_t hits = 0;
  for (const auto& e : inferred) hits += truth.count(e);
  Metrics m;
  m.true_edge_count = truth.size();
  m.inferred_edge_count = inferred.size();
  m.precision = inferred.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(inferred.size());
  m.recall = truth.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(truth.size());
  m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  return m;
}

// Per-node parent-set view of an edge set.
inline EdgeSet incoming(const EdgeSet& edges, NodeId target) {
  EdgeSet out;
  for (const auto& e : edges)
    if (e.second == target) out.insert(e);
  return out;
}

enum class Method { regularized, lambda_zero, first_edge };

inline std::string method_token(Method m) {
  switch (m) {
    case Method::regularized: return "l1";
    case Method::lambda_zero: return "l0";
    case Method::first_edge: return "first-edge";
  }
  return "?";
}

inline Method parse_method(const std::string& token) {
  if (token == "l1" || token == "regularized") return Method::regularized;
  if (token == "l0" || token == "lambda-zero" || token == "netrate") return Method::lambda_zero;
  if (token == "first-edge") return Method::first_edge;
  fail(ErrorKind::spec, "unknown method '" + token + "'");
}

struct ExperimentSpec {
  std::string name = "experiment";
  std::string network_recipe;  // informational, e.g. "chain:8"
  DirectedNetwork network;
  TransmissionModel model;
  std::optional<SourceDistribution> sources;  // uniform over all nodes when unset
  double window = 10.0;
  double lambda_const = 1.0;
  std::vector<double> betas;                // n = round(10 beta d log p), min 1
  std::vector<std::size_t> cascade_counts;  // used when betas is empty
  std::size_t trials = 100;
  std::uint64_t base_seed = 1;
  std::optional<NodeId> target;              // per-node success when set, else whole network
  bool restrict_to_superneighborhood = true;
  SolverConfig solver;
  std::size_t threads = 1;

  SourceDistribution source_distribution() const {
    return sources ? *sources : SourceDistribution::uniform(network.num_nodes());
  }
};

struct TrialRow {
  std::string experiment;
  std::size_t point = 0;
  double beta = std::nan("");
  std::size_t n = 0;
  long trial = 0;  // -1 on aggregate rows
  std::uint64_t seed = 0;
  double outcome = 0.0;  // success indicator, or mean success on aggregate rows
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double stderr_ = 0.0;  // aggregate rows only
  std::string error;     // non-empty when the trial failed
};

struct ResultTable {
  std::vector<TrialRow> rows;

  std::vector<TrialRow> aggregates() const {
    std::vector<TrialRow> out;
    for (const auto& r : rows)
      if (r.trial < 0) out.push_back(r);
    return out;
  }
  std::vector<TrialRow> trials_of(const std::string& experiment, std::size_t point) const {
    std::vector<TrialRow> out;
    for (const auto& r : rows)
      if (r.trial >= 0 && r.experiment == experiment && r.point == point) out.push_back(r);
    return out;
  }
  const TrialRow* aggregate(const std::string& experiment, std::size_t point) const {
    for (const auto& r : rows)
      if (r.trial < 0 && r.experiment == experiment && r.point == point) return &r;
    return nullptr;
  }
  void append(const ResultTable& other) { rows.insert(rows.end(), other.rows.begin(), other.rows.end()); }
};

inline std::size_t cascades_for_beta(double beta, std::size_t d, std::size_t p) {
  require(beta > 0.0 && std::isfinite(beta), ErrorKind::spec, "beta must be positive");
  require(d >= 1 && p >= 2, ErrorKind::spec, "beta scaling needs d >= 1 and p >= 2");
  const double n = std::round(10.0 * beta * static_cast<double>(d) * std::log(static_cast<double>(p)));
  return std::max<std::size_t>(1, static_cast<std::size_t>(n));
}

inline std::uint64_t trial_seed(std::uint64_t base, std::size_t point, std::size_t trial) {
  return derive_seed(base, {point, trial});
}

namespace detail {

struct GridPoint {
  double beta;
  std::size_t n;
};

inline std::vector<GridPoint> grid_of(const ExperimentSpec& spec) {
  std::vector<GridPoint> grid;
  if (!spec.betas.empty()) {
    require(spec.target.has_value(), ErrorKind::spec, "beta grids need a target node (d and p are per node)");
    const std::size_t d = parent_set(spec.network, *spec.target).in_degree();
    const std::size_t p = super_neighborhood(spec.network, *spec.target).size();
    for (double b : spec.betas) grid.push_back({b, cascades_for_beta(b, d, p)});
  } else {
    for (std::size_t n : spec.cascade_counts) {
      require(n >= 1, ErrorKind::spec, "cascade counts must be >= 1");
      grid.push_back({std::nan(""), n});
    }
  }
  require(!grid.empty(), ErrorKind::spec, "experiment grid is empty");
  return grid;
}

inline void validate(const ExperimentSpec& spec) {
  require(spec.trials >= 1, ErrorKind::spec, "trials must be >= 1");
  require(spec.window > 0.0, ErrorKind::spec, "window must be positive");
  require(spec.lambda_const >= 0.0, ErrorKind::spec, "lambda constant must be >= 0");
  if (spec.target)
    require(*spec.target < spec.network.num_nodes(), ErrorKind::spec, "target outside the network");
}

// Inferred edge set for one method on one cascade set.
inline EdgeSet run_method(Method method, const ExperimentSpec& spec, const CascadeSet& set) {
  if (method == Method::first_edge) {
    EdgeSet e = first_edge_baseline(set);
    return spec.target ? incoming(e, *spec.target) : e;
  }
  InferenceOptions opts;
  opts.solver = spec.solver;
  opts.lambda = method == Method::regularized ? LambdaRule::scaled(spec.lambda_const) : LambdaRule::constant(0.0);
  opts.reference = spec.restrict_to_superneighborhood ? &spec.network : nullptr;
  if (spec.target) {
    const RateEstimate est = solve_node(set, *spec.target, spec.model, opts);
    EdgeSet e;
    for (NodeId j : est.support()) e.emplace(j, *spec.target);
    return e;
  }
  return infer_network(set, spec.model, opts).network.edge_set();
}

inline TrialRow aggregate_rows(const std::vector<TrialRow>& trials, const std::string& experiment, std::size_t point,
                               double beta, std::size_t n, std::uint64_t base_seed) {
  TrialRow agg;
  agg.experiment = experiment;
  agg.point = point;
  agg.beta = beta;
  agg.n = n;
  agg.trial = -1;
  agg.seed = base_seed;
  std::size_t ok = 0;
  for (const auto& r : trials) {
    if (!r.error.empty()) continue;  // failed trials are reported, not averaged
    ++ok;
    agg.outcome += r.outcome;
    agg.f1 += r.f1;
    agg.precision += r.precision;
    agg.recall += r.recall;
  }
  if (ok > 0) {
    const double k = static_cast<double>(ok);
    agg.outcome /= k;
    agg.f1 /= k;
    agg.precision /= k;
    agg.recall /= k;
    agg.stderr_ = std::sqrt(agg.outcome * (1.0 - agg.outcome) / k);
  } else {
    agg.error = "all trials failed";
  }
  return agg;
}

}  // namespace detail

/// Runs `methods` on shared cascade sets for every grid point and trial.
/// Experiment names are "<spec.name>:<method>". Trial t at point k always uses
/// seed hash(base_seed, k, t).
inline ResultTable run_methods(const ExperimentSpec& spec, const std::vector<Method>& methods) {
  detail::validate(spec);
  require(!methods.empty(), ErrorKind::spec, "method list is empty");
  const auto grid = detail::grid_of(spec);
  const EdgeSet truth_all = spec.network.edge_set();
  const EdgeSet truth = spec.target ? incoming(truth_all, *spec.target) : truth_all;
  const SourceDistribution sources = spec.source_distribution();

  const std::size_t jobs = grid.size() * spec.trials;
  std::vector<std::vector<TrialRow>> results(jobs);
  parallel_for(jobs, spec.threads, [&](std::size_t job) {
    const std::size_t point = job / spec.trials;
    const std::size_t trial = job % spec.trials;
    const std::uint64_t seed = trial_seed(spec.base_seed, point, trial);
    std::vector<TrialRow> rows;
    std::optional<CascadeSet> set;
    std::string sim_error;
    try {
      set = simulate_set(spec.network, spec.model, sources, grid[point].n, spec.window, seed);
    } catch (const Error& e) {
      sim_error = e.what();
    }
    for (Method m : methods) {
      TrialRow row;
      row.experiment = spec.name + ":" + method_token(m);
      row.point = point;
      row.beta = grid[point].beta;
      row.n = grid[point].n;
      row.trial = static_cast<long>(trial);
      row.seed = seed;
      if (!set) {
        row.error = sim_error;
      } else {
        try {
          const EdgeSet inferred = detail::run_method(m, spec, *set);
          const Metrics met = score(inferred, truth);
          row.outcome = inferred == truth ? 1.0 : 0.0;
          row.f1 = met.f1;
          row.precision = met.precision;
          row.recall = met.recall;
        } catch (const Error& e) {
          row.error = e.what();
        }
      }
      rows.push_back(std::move(row));
    }
    results[job] = std::move(rows);
  });

  ResultTable table;
  for (std::size_t mi = 0; mi < methods.size(); ++mi) {
    const std::string name = spec.name + ":" + method_token(methods[mi]);
    for (std::size_t point = 0; point < grid.size(); ++point) {
      std::vector<TrialRow> trials;
      for (std::size_t t = 0; t < spec.trials; ++t) trials.push_back(results[point * spec.trials + t][mi]);
      table.rows.insert(table.rows.end(), trials.begin(), trials.end());
      table.rows.push_back(
          detail::aggregate_rows(trials, name, point, grid[point].beta, grid[point].n, spec.base_seed));
    }
  }
  return table;
}

/// Exact-support success probability per grid point for the regularized
/// estimator: parent-set equality when spec.target is set, edge-set equality
/// otherwise.
inline ResultTable success_probability(const ExperimentSpec& spec) {
  return run_methods(spec, {Method::regularized});
}

/// One success curve per network over a shared beta grid. Every network's
/// target must have the same in-degree. Curves are named "<name>:p=<p>".
inline ResultTable run_scaling_experiment(const std::vector<ExperimentSpec>& specs) {
  require(!specs.empty(), ErrorKind::spec, "no networks given");
  std::optional<std::size_t> d;
  ResultTable table;
  for (const ExperimentSpec& spec : specs) {
    require(spec.target.has_value(), ErrorKind::spec, "scaling experiments need a target per network");
    require(!spec.betas.empty(), ErrorKind::spec, "scaling experiments need a beta grid");
    const std::size_t di = parent_set(spec.network, *spec.target).in_degree();
    if (!d) d = di;
    require(di == *d, ErrorKind::spec, "target in-degrees differ across networks");
  }
  for (const ExperimentSpec& spec : specs) {
    ExperimentSpec named = spec;
    named.name = spec.name + ":p=" + std::to_string(super_neighborhood(spec.network, *spec.target).size());
    table.append(success_probability(named));
  }
  return table;
}

/// Mean F1 per method per cascade count.
inline ResultTable run_comparison(const ExperimentSpec& spec, const std::vector<Method>& methods) {
  require(!methods.empty(), ErrorKind::spec, "method list is empty");
  return run_methods(spec, methods);
}

// ---------------------------------------------------------------------------
// Output

inline std::string csv_real(double x) {
  if (std::isnan(x)) return "";
  return format_real(x);
}

inline void write_csv(std::ostream& os, const ResultTable& table, const std::vector<std::string>& comments = {}) {
  for (const std::string& c : comments) os << "# " << c << '\n';
  os << "experiment,point,beta,n,trial,seed,outcome,f1,precision,recall\n";
  for (const TrialRow& r : table.rows) {
    os << r.experiment << ',' << r.point << ',' << csv_real(r.beta) << ',' << r.n << ',' << r.trial << ',' << r.seed
       << ',' << (r.error.empty() ? csv_real(r.outcome) : "error") << ',' << csv_real(r.f1) << ','
       << csv_real(r.precision) << ',' << csv_real(r.recall) << '\n';
  }
}

/// Static line plot of aggregate rows: x = beta (or n), y = outcome or f1.
inline void write_svg(std::ostream& os, const ResultTable& table, bool plot_f1, const std::string& title) {
  std::map<std::string, std::vector<std::pair<double, double>>> curves;
  double xmax = 0.0;
  for (const TrialRow& r : table.aggregates()) {
    const double x = std::isnan(r.beta) ? static_cast<double>(r.n) : r.beta;
    curves[r.experiment].emplace_back(x, plot_f1 ? r.f1 : r.outcome);
    xmax = std::max(xmax, x);
  }
  if (xmax <= 0.0) xmax = 1.0;
  const double w = 640, h = 400, left = 60, right = 180, top = 40, bottom = 50;
  auto px = [&](double x) { return left + (w - left - right) * x / xmax; };
  auto py = [&](double y) { return top + (h - top - bottom) * (1.0 - y); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  os << "<text x=\"" << left << "\" y=\"24\" font-size=\"14\">" << title << "</text>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << py(0) << "\" x2=\"" << w - right << "\" y2=\"" << py(0)
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << py(0) << "\" x2=\"" << left << "\" y2=\"" << py(1)
     << "\" stroke=\"black\"/>\n";
  for (double y : {0.0, 0.5, 1.0})
    os << "<text x=\"" << left - 30 << "\" y=\"" << py(y) + 4 << "\" font-size=\"11\">" << y << "</text>\n";
  os << "<text x=\"" << left << "\" y=\"" << h - 15 << "\" font-size=\"11\">0</text>\n";
  os << "<text x=\"" << w - right - 20 << "\" y=\"" << h - 15 << "\" font-size=\"11\">" << format_real(xmax)
     << "</text>\n";
  std::size_t ci = 0;
  for (auto& [name, pts] : curves) {
    std::sort(pts.begin(), pts.end());
    const char* color = colors[ci % 6];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (auto [x, y] : pts) os << px(x) << ',' << py(y) << ' ';
    os << "\"/>\n";
    os << "<text x=\"" << w - right + 10 << "\" y=\"" << top + 16 * ci + 10 << "\" font-size=\"11\" fill=\"" << color
       << "\">" << name << "</text>\n";
    ++ci;
  }
  os << "</svg>\n";
}

}  // namespace netinf
