#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "netinf/netinf.hpp"

namespace netinf::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

inline std::pair<double, double> parse_pair(const std::string& s, const std::string& what) {
  const auto parts = split(s, ',');
  if (parts.size() != 2) throw UsageError(what + " expects 'a,b', got '" + s + "'");
  try {
    return {parse_real(parts[0], what), parse_real(parts[1], what)};
  } catch (const Error&) {
    throw UsageError(what + " expects two numbers, got '" + s + "'");
  }
}

template <typename T>
std::vector<T> parse_list(const std::string& s, const std::string& what) {
  std::vector<T> out;
  for (const auto& item : split(s, ',')) {
    try {
      if constexpr (std::is_floating_point_v<T>)
        out.push_back(static_cast<T>(parse_real(item, what)));
      else
        out.push_back(static_cast<T>(parse_count(item, what)));
    } catch (const Error&) {
      throw UsageError(what + ": bad list entry '" + item + "'");
    }
  }
  if (out.empty()) throw UsageError(what + " must not be empty");
  return out;
}

inline TransmissionModel parse_model(const std::string& token) {
  try {
    return TransmissionModel::parse(token);
  } catch (const Error&) {
    throw UsageError("unknown model token '" + token + "' (expected exp, ray or pow:<delta>)");
  }
}

// ---------------------------------------------------------------------------
// Network recipes: chain:<n>, star:<k>, tree, kronecker:<k>, forestfire:<n>.

struct NetworkRecipe {
  std::string token;
  double rate_lo = 0.5;
  double rate_hi = 1.5;
  KroneckerSeed kron_seed = kDefaultKroneckerSeed;
  double p_fwd = 0.35;
  double p_bwd = 0.2;
};

inline void check_recipe_token(const std::string& token) {
  const auto colon = token.find(':');
  const std::string kind = token.substr(0, colon);
  if (kind == "tree") {
    if (colon != std::string::npos) throw UsageError("'tree' takes no size");
    return;
  }
  if (kind != "chain" && kind != "star" && kind != "kronecker" && kind != "forestfire")
    throw UsageError("unknown network token '" + token + "'");
  if (colon == std::string::npos) throw UsageError("network token '" + token + "' needs a size, e.g. " + kind + ":8");
  const std::string arg = token.substr(colon + 1);
  if (arg.empty() || arg.find_first_not_of("0123456789") != std::string::npos)
    throw UsageError("bad size in network token '" + token + "'");
}

inline DirectedNetwork build_network(const NetworkRecipe& r, std::uint64_t seed) {
  check_recipe_token(r.token);
  const auto colon = r.token.find(':');
  const std::string kind = r.token.substr(0, colon);
  const std::size_t size = colon == std::string::npos ? 0 : parse_count(r.token.substr(colon + 1), "network token");
  Rng topo = substream(seed, {0});
  Rng rates = substream(seed, {1});
  DirectedNetwork net;
  if (kind == "chain") net = generate_chain(size);
  else if (kind == "star") net = generate_star(size);
  else if (kind == "tree") net = tree_fixture();
  else if (kind == "kronecker") net = generate_kronecker(r.kron_seed, static_cast<unsigned>(size), topo);
  else net = generate_forest_fire(size, r.p_fwd, r.p_bwd, topo);
  return sample_rates(net, r.rate_lo, r.rate_hi, rates);
}

// ---------------------------------------------------------------------------
// I/O helpers

inline DirectedNetwork load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::format, "cannot open graph file '" + path + "'");
  return read_graph(in);
}

inline CascadeSet load_cascades(const std::string& path, std::optional<std::size_t> num_nodes) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::format, "cannot open cascade file '" + path + "'");
  return read_cascades(in, num_nodes);
}

inline SourceDistribution load_sources(const std::string& spec, std::size_t num_nodes) {
  if (spec == "uniform") return SourceDistribution::uniform(num_nodes);
  if (spec.rfind("nodes:", 0) == 0) {
    std::vector<NodeId> nodes;
    for (auto v : parse_list<std::uint64_t>(spec.substr(6), "--sources")) nodes.push_back(static_cast<NodeId>(v));
    return SourceDistribution::uniform_over(num_nodes, nodes);
  }
  std::ifstream in(spec);
  if (!in) throw Error(ErrorKind::format, "cannot open source weights file '" + spec + "'");
  std::vector<double> w;
  std::string tok;
  while (in >> tok) {
    if (tok[0] == '#') {
      std::getline(in, tok);
      continue;
    }
    for (const auto& piece : split(tok, ',')) w.push_back(parse_real(piece, "source weights"));
  }
  require(w.size() == num_nodes, ErrorKind::format, "source weights file must list one weight per node");
  return SourceDistribution(std::move(w));
}

// Writes to `path`, or to `fallback` when path is "-" or empty.
template <typename F>
void emit(const std::string& path, std::ostream& fallback, F&& write) {
  if (path.empty() || path == "-") {
    write(fallback);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::format, "cannot write '" + path + "'");
  write(out);
}

// "netinf <cmd> --opt value ..." with every resolved option except output
// paths, thread count and help; rerunning it reproduces the file.
inline std::string resolved_command(const CLI::App& sub) {
  std::string line = "netinf";
  std::vector<std::string> path;
  for (const CLI::App* a = &sub; a != nullptr && a->get_parent() != nullptr; a = a->get_parent())
    path.insert(path.begin(), a->get_name());
  for (const auto& p : path) line += " " + p;
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help" || name == "out" || name == "threads" || name == "config" || name == "svg")
      continue;
    if (opt->get_items_expected_max() == 0) {  // flag
      if (opt->count() > 0 && opt->as<bool>()) line += " --" + name;
      continue;
    }
    std::string value;
    if (opt->count() > 0) value = opt->results().back();
    else value = opt->get_default_str();
    if (value.empty()) continue;
    if (value.find_first_of(" ;*()'\"") != std::string::npos) value = "'" + value + "'";
    line += " --" + name + " " + value;
  }
  return line;
}

// key=value config: lines become --key=value tokens placed ahead of the
// explicit arguments, so explicit flags win (options take the last value).
inline std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> out;
  std::optional<std::string> config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[++i];
      continue;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
      continue;
    }
    out.push_back(args[i]);
  }
  if (!config_path) return out;
  std::ifstream in(*config_path);
  if (!in) throw Error(ErrorKind::format, "cannot open config file '" + *config_path + "'");
  std::vector<std::string> from_file;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#' || line[first] == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError("config line without '=': " + line);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    from_file.push_back("--" + trim(line.substr(0, eq)) + "=" + value);
  }
  // Insert after the subcommand tokens (first one or two non-option words).
  std::size_t pos = 0;
  while (pos < out.size() && pos < 2 && out[pos].rfind("-", 0) != 0) ++pos;
  out.insert(out.begin() + static_cast<std::ptrdiff_t>(pos), from_file.begin(), from_file.end());
  return out;
}

// ---------------------------------------------------------------------------

struct Options {
  // shared
  std::string out = "-";
  std::uint64_t seed = 1;
  std::size_t threads = default_threads();
  std::string model = "exp";
  double window = 10.0;
  std::string sources = "uniform";
  // generate
  std::string net;
  std::string rates = "0.5,1.5";
  std::string kron_seed = "0.9,0.1,0.1,0.9";
  std::string burn = "0.35,0.2";
  // simulate
  std::string graph;
  std::size_t n = 1000;
  // infer
  std::string cascades;
  std::optional<double> lambda;
  double lambda_const = 1.0;
  std::string truth;
  bool no_restrict = false;
  std::string method = "l1";
  int max_iters = 5000;
  double tol = 1e-8;
  std::optional<std::size_t> nodes;
  // diagnose
  std::string target = "all";
  std::size_t bootstrap = 0;
  double rank_tol = 1e-10;
  // experiment
  std::string nets = "chain:4;chain:8;chain:16";
  std::string targets = "last";
  std::string betas = "2,4,8,16";
  std::string ns = "250,500,1000,2000";
  std::string methods = "l1,l0,first-edge";
  std::size_t trials = 100;
  std::string success = "node";
  std::string comparison_success = "network";
  std::string svg;
};

inline NetworkRecipe recipe_from(const Options& o, const std::string& token) {
  NetworkRecipe r;
  r.token = token;
  std::tie(r.rate_lo, r.rate_hi) = parse_pair(o.rates, "--rates");
  const auto k = parse_list<double>(o.kron_seed, "--kron-seed");
  if (k.size() != 4) throw UsageError("--kron-seed expects four entries a,b,c,d");
  r.kron_seed = {{{k[0], k[1]}, {k[2], k[3]}}};
  std::tie(r.p_fwd, r.p_bwd) = parse_pair(o.burn, "--burn");
  return r;
}

inline void add_recipe_options(CLI::App* sub, Options& o) {
  sub->add_option("--rates", o.rates, "edge rate range lo,hi (uniform)");
  sub->add_option("--kron-seed", o.kron_seed, "Kronecker 2x2 seed matrix a,b,c,d");
  sub->add_option("--burn", o.burn, "Forest Fire forward,backward burning probabilities");
}

inline int cmd_generate(const Options& o, const CLI::App& sub, std::ostream& out, std::ostream& err) {
  const DirectedNetwork net = build_network(recipe_from(o, o.net), o.seed);
  emit(o.out, out, [&](std::ostream& os) { write_graph(os, net, {resolved_command(sub)}); });
  (o.out == "-" ? err : out) << "nodes=" << net.num_nodes() << " edges=" << net.num_edges() << '\n';
  return kExitOk;
}

inline int cmd_simulate(const Options& o, const CLI::App& sub, std::ostream& out, std::ostream& err) {
  const TransmissionModel model = parse_model(o.model);
  const DirectedNetwork net = load_graph(o.graph);
  const SourceDistribution src = load_sources(o.sources, net.num_nodes());
  const CascadeSet set = simulate_set(net, model, src, o.n, o.window, o.seed, o.threads);
  emit(o.out, out, [&](std::ostream& os) { write_cascades(os, set, {resolved_command(sub)}); });
  double mean = 0.0;
  for (const Cascade& c : set.cascades) mean += static_cast<double>(c.infected_count());
  mean /= static_cast<double>(set.size());
  (o.out == "-" ? err : out) << "cascades=" << set.size() << " mean_infected=" << format_real(mean) << '\n';
  return kExitOk;
}

inline void print_metrics(std::ostream& os, const Metrics& m) {
  os << std::fixed << std::setprecision(4) << "precision=" << m.precision << " recall=" << m.recall << " f1=" << m.f1
     << " true_edges=" << m.true_edge_count << " inferred_edges=" << m.inferred_edge_count << '\n';
  os.unsetf(std::ios::floatfield);
}

inline int cmd_infer(const Options& o, const CLI::App& sub, std::ostream& out, std::ostream& err) {
  const TransmissionModel model = parse_model(o.model);
  const Method method = [&] {
    try {
      return parse_method(o.method);
    } catch (const Error&) {
      throw UsageError("unknown method '" + o.method + "'");
    }
  }();
  std::optional<DirectedNetwork> truth;
  if (!o.truth.empty()) truth = load_graph(o.truth);
  std::optional<std::size_t> num_nodes = o.nodes;
  if (truth && !num_nodes) num_nodes = truth->num_nodes();
  const CascadeSet set = load_cascades(o.cascades, num_nodes);
  require(!set.empty(), ErrorKind::invalid_size, "cascade file holds no cascades");

  std::vector<std::string> header{resolved_command(sub)};
  DirectedNetwork inferred;
  if (method == Method::first_edge) {
    std::vector<Edge> edges;
    for (auto [s, d] : first_edge_baseline(set)) edges.push_back({s, d, 1.0});
    inferred = DirectedNetwork(set.num_nodes(), std::move(edges));
    header.push_back("method=first-edge rates=none");
  } else {
    InferenceOptions opts;
    opts.solver.max_iters = o.max_iters;
    opts.solver.tol = o.tol;
    opts.threads = o.threads;
    if (method == Method::lambda_zero) opts.lambda = LambdaRule::constant(0.0);
    else if (o.lambda) opts.lambda = LambdaRule::constant(*o.lambda);
    else opts.lambda = LambdaRule::scaled(o.lambda_const);
    if (truth && !o.no_restrict) opts.reference = &*truth;
    const InferredNetwork result = infer_network(set, model, opts);
    inferred = result.network;
    int iters = 0;
    bool uniform = true;
    for (std::size_t i = 0; i < result.estimates.size(); ++i) {
      iters = std::max(iters, result.estimates[i].iterations_used);
      uniform = uniform && result.lambdas[i] == result.lambdas[0];
    }
    const std::string lam = uniform ? format_real(result.lambdas[0])
                                    : format_real(opts.lambda.k_const) + "*sqrt(log(p)/n)";
    header.push_back("lambda=" + lam + " iters=" + std::to_string(iters) + " model=" + model.token());
    for (std::size_t i = 0; i < result.estimates.size(); ++i) {
      const RateEstimate& e = result.estimates[i];
      header.push_back("node=" + std::to_string(i) + " lambda=" + format_real(result.lambdas[i]) +
                       " iters=" + std::to_string(e.iterations_used) + " n=" +
                       std::to_string(result.cascades_used[i]) + " converged=" + (e.converged ? "1" : "0"));
    }
  }
  emit(o.out, out, [&](std::ostream& os) { write_graph(os, inferred, header); });
  std::ostream& report = o.out == "-" ? err : out;
  report << "inferred_edges=" << inferred.num_edges() << '\n';
  if (truth) print_metrics(report, score(inferred.edge_set(), truth->edge_set()));
  return kExitOk;
}

inline int cmd_diagnose(const Options& o, const CLI::App& sub, std::ostream& out, std::ostream&) {
  const TransmissionModel model = parse_model(o.model);
  const DirectedNetwork net = load_graph(o.graph);
  const SourceDistribution src = load_sources(o.sources, net.num_nodes());
  std::vector<NodeId> targets;
  if (o.target == "all") {
    for (NodeId i = 0; i < net.num_nodes(); ++i)
      if (parent_set(net, i).in_degree() > 0) targets.push_back(i);
  } else {
    for (auto t : parse_list<std::uint64_t>(o.target, "--target")) targets.push_back(static_cast<NodeId>(t));
  }
  std::ostringstream body;
  body << "target,d,p,lambda_min,lambda_max,incoherence_norm,epsilon_slack,hazard_rank,n\n";
  for (NodeId i : targets) {
    require(i < net.num_nodes(), ErrorKind::index, "target " + std::to_string(i) + " out of range");
    const ConditionReport r =
        diagnose_target(net, model, src, i, o.n, o.window, derive_seed(o.seed, {i}), o.bootstrap, o.rank_tol, o.threads);
    body << i << ',' << r.d << ',' << r.p << ',' << format_real(r.lambda_min_SS) << ','
         << format_real(r.lambda_max_SS) << ',' << format_real(r.incoherence_norm) << ','
         << format_real(r.epsilon_slack) << ',' << r.hazard_rank << ',' << r.sample_n << '\n';
  }
  emit(o.out, out, [&](std::ostream& os) { os << "# " << resolved_command(sub) << '\n' << body.str(); });
  return kExitOk;
}

inline NodeId resolve_target(const std::string& token, const DirectedNetwork& net) {
  if (token == "last") return static_cast<NodeId>(net.num_nodes() - 1);
  return static_cast<NodeId>(parse_count(token, "--targets"));
}

inline ExperimentSpec base_spec(const Options& o) {
  ExperimentSpec spec;
  spec.model = parse_model(o.model);
  spec.window = o.window;
  spec.lambda_const = o.lambda_const;
  spec.trials = o.trials;
  spec.base_seed = o.seed;
  spec.threads = o.threads;
  spec.solver.max_iters = o.max_iters;
  spec.solver.tol = o.tol;
  spec.restrict_to_superneighborhood = !o.no_restrict;
  return spec;
}

inline void emit_table(const Options& o, const CLI::App& sub, std::ostream& out, const ResultTable& table, bool f1,
                       const std::string& title) {
  emit(o.out, out, [&](std::ostream& os) { write_csv(os, table, {resolved_command(sub)}); });
  if (!o.svg.empty()) {
    std::ofstream svg(o.svg, std::ios::binary);
    if (!svg) throw Error(ErrorKind::format, "cannot write '" + o.svg + "'");
    write_svg(svg, table, f1, title);
  }
}

inline int cmd_scaling(const Options& o, const CLI::App& sub, std::ostream& out, std::ostream&) {
  const auto tokens = split(o.nets, ';');
  if (tokens.empty()) throw UsageError("--nets must list at least one network");
  for (const auto& t : tokens) check_recipe_token(t);
  const auto target_tokens = split(o.targets, ',');
  if (target_tokens.size() != 1 && target_tokens.size() != tokens.size())
    throw UsageError("--targets must give one target or one per network");
  if (o.success != "node") throw UsageError("scaling experiments measure per-node success (--success node)");
  std::vector<ExperimentSpec> specs;
  for (std::size_t k = 0; k < tokens.size(); ++k) {
    ExperimentSpec spec = base_spec(o);
    spec.name = "scaling";
    spec.network_recipe = tokens[k];
    spec.network = build_network(recipe_from(o, tokens[k]), derive_seed(o.seed, {0x6e6574ULL, k}));
    spec.target = resolve_target(target_tokens.size() == 1 ? target_tokens[0] : target_tokens[k], spec.network);
    require(*spec.target < spec.network.num_nodes(), ErrorKind::index, "target outside network " + tokens[k]);
    spec.betas = parse_list<double>(o.betas, "--betas");
    spec.sources = load_sources(o.sources, spec.network.num_nodes());
    spec.base_seed = derive_seed(o.seed, {k});
    specs.push_back(std::move(spec));
  }
  emit_table(o, sub, out, run_scaling_experiment(specs), false, "success probability vs beta");
  return kExitOk;
}

inline int cmd_comparison(const Options& o, const CLI::App& sub, std::ostream& out, std::ostream&) {
  std::vector<Method> methods;
  for (const auto& m : split(o.methods, ',')) {
    try {
      methods.push_back(parse_method(m));
    } catch (const Error&) {
      throw UsageError("unknown method '" + m + "'");
    }
  }
  if (methods.empty()) throw UsageError("--methods must list at least one method");
  ExperimentSpec spec = base_spec(o);
  spec.name = "comparison";
  if (!o.graph.empty()) {
    spec.network = load_graph(o.graph);
    spec.network_recipe = o.graph;
  } else {
    const std::string token = o.net.empty() ? "kronecker:4" : o.net;
    check_recipe_token(token);
    spec.network = build_network(recipe_from(o, token), derive_seed(o.seed, {0x6e6574ULL, 0}));
    spec.network_recipe = token;
  }
  spec.sources = load_sources(o.sources, spec.network.num_nodes());
  spec.cascade_counts = parse_list<std::size_t>(o.ns, "--ns");
  if (o.comparison_success == "node") {
    spec.target = resolve_target(o.targets, spec.network);
  } else if (o.comparison_success != "network") {
    throw UsageError("--success must be 'node' or 'network'");
  }
  emit_table(o, sub, out, run_comparison(spec, methods), true, "F1 vs number of cascades");
  return kExitOk;
}

/// Entry point; returns the process exit code (0 ok, 1 runtime/data, 2 usage).
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Diffusion network inference from cascades", "netinf"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)->always_capture_default();
  app.require_subcommand(1);
  app.add_option("--config", "key=value config file; explicit flags take precedence");

  auto* gen = app.add_subcommand("generate", "write a synthetic network");
  gen->add_option("--net", o.net, "chain:<n> | star:<k> | tree | kronecker:<k> | forestfire:<n>")->required();
  add_recipe_options(gen, o);
  gen->add_option("--seed", o.seed, "random seed");
  gen->add_option("-o,--out", o.out, "output graph file ('-' = stdout)");

  auto* sim = app.add_subcommand("simulate", "simulate cascades over a network");
  sim->add_option("--graph", o.graph, "graph file")->required();
  sim->add_option("--n", o.n, "number of cascades");
  sim->add_option("--T", o.window, "observation window");
  sim->add_option("--model", o.model, "exp | ray | pow:<delta>");
  sim->add_option("--sources", o.sources, "uniform | nodes:<i,j,...> | weights file");
  sim->add_option("--seed", o.seed, "random seed");
  sim->add_option("--threads", o.threads, "worker threads (output does not depend on it)");
  sim->add_option("-o,--out", o.out, "output cascade file ('-' = stdout)");

  auto* inf = app.add_subcommand("infer", "infer a network from cascades");
  inf->add_option("--cascades", o.cascades, "cascade file")->required();
  auto* lam = inf->add_option("--lambda", o.lambda, "fixed regularization value");
  inf->add_option("--lambda-const", o.lambda_const, "K in lambda = K sqrt(log p / n)")->excludes(lam);
  inf->add_option("--model", o.model, "exp | ray | pow:<delta>");
  inf->add_option("--method", o.method, "l1 | l0 | first-edge");
  inf->add_option("--truth", o.truth, "true graph: restricts candidates and prints metrics");
  inf->add_flag("--no-restrict", o.no_restrict, "with --truth, score only (all-pairs candidates)");
  inf->add_option("--max-iters", o.max_iters, "iteration cap per node");
  inf->add_option("--tol", o.tol, "stop when max |alpha change| <= tol");
  inf->add_option("--nodes", o.nodes, "node count (default: from --truth or the cascade file)");
  inf->add_option("--threads", o.threads, "worker threads (output does not depend on it)");
  inf->add_option("-o,--out", o.out, "output graph file ('-' = stdout)");

  auto* dia = app.add_subcommand("diagnose", "check recovery conditions at the true rates");
  dia->add_option("--net,--graph", o.graph, "graph file")->required();
  dia->add_option("--target", o.target, "node id list or 'all' (nodes with parents)");
  dia->add_option("--n", o.n, "Monte Carlo cascades");
  dia->add_option("--T", o.window, "observation window");
  dia->add_option("--model", o.model, "exp | ray | pow:<delta>");
  dia->add_option("--sources", o.sources, "uniform | nodes:<i,j,...> | weights file");
  dia->add_option("--seed", o.seed, "random seed");
  dia->add_option("--bootstrap", o.bootstrap, "bootstrap replicates for the incoherence stderr");
  dia->add_option("--rank-tol", o.rank_tol, "relative singular-value tolerance for the hazard rank");
  dia->add_option("--threads", o.threads, "worker threads (output does not depend on it)");
  dia->add_option("-o,--out", o.out, "output CSV ('-' = stdout)");

  auto* exp = app.add_subcommand("experiment", "run a seeded experiment grid");
  exp->require_subcommand(1);
  auto common = [&](CLI::App* s) {
    s->add_option("--trials", o.trials, "independent cascade sets per grid point");
    s->add_option("--lambda-const", o.lambda_const, "K in lambda = K sqrt(log p / n)");
    s->add_option("--T", o.window, "observation window");
    s->add_option("--model", o.model, "exp | ray | pow:<delta>");
    s->add_option("--sources", o.sources, "uniform | nodes:<i,j,...> | weights file");
    s->add_option("--seed", o.seed, "base seed");
    s->add_option("--max-iters", o.max_iters, "iteration cap per node");
    s->add_option("--tol", o.tol, "solver tolerance");
    s->add_flag("--no-restrict", o.no_restrict, "use all-pairs candidates instead of super-neighborhoods");
    add_recipe_options(s, o);
    s->add_option("--threads", o.threads, "worker threads (output does not depend on it)");
    s->add_option("-o,--out", o.out, "output CSV ('-' = stdout)");
    s->add_option("--svg", o.svg, "optional SVG plot path");
  };
  auto* scal = exp->add_subcommand("scaling", "success probability vs beta, one curve per network");
  scal->add_option("--nets", o.nets, "';'-separated network tokens");
  scal->add_option("--targets", o.targets, "target per network ('last' = highest id)");
  scal->add_option("--betas", o.betas, "beta grid; n = round(10 beta d log p)");
  scal->add_option("--success", o.success, "success granularity (node)");
  common(scal);
  auto* comp = exp->add_subcommand("comparison", "F1 vs cascades for several methods");
  comp->add_option("--net", o.net, "network token (default kronecker:4)");
  comp->add_option("--graph", o.graph, "graph file instead of --net");
  comp->add_option("--methods", o.methods, "comma list of l1, l0, first-edge");
  comp->add_option("--ns", o.ns, "cascade-count grid");
  comp->add_option("--success", o.comparison_success, "node | network");
  comp->add_option("--targets", o.targets, "target node for --success node");
  common(comp);

  try {
    std::vector<std::string> expanded = expand_config(args);
    std::reverse(expanded.begin(), expanded.end());
    app.parse(expanded);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {  // --help
      out << app.help();
      return kExitOk;
    }
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }

  try {
    if (o.threads == 0) throw UsageError("--threads must be >= 1");
    if (gen->parsed()) return cmd_generate(o, *gen, out, err);
    if (sim->parsed()) return cmd_simulate(o, *sim, out, err);
    if (inf->parsed()) return cmd_infer(o, *inf, out, err);
    if (dia->parsed()) return cmd_diagnose(o, *dia, out, err);
    if (scal->parsed()) return cmd_scaling(o, *scal, out, err);
    if (comp->parsed()) return cmd_comparison(o, *comp, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace netinf::cli
