// opdyn command-line driver: graph generation, weak-selection theory, fixation sweeps and
// convention arbitration.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "opdyn/opdyn.hpp"

namespace {

using namespace opdyn;

constexpr const char* kDefaultConfig = "opdyn-convention.json";

struct ScoreFlags {
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0, delta_a = 0.0, delta_b = 0.0;

  void add(CLI::App* app, double default_d = 0.0) {
    d = default_d;
    app->add_option("--a", a, "score of A meeting A")->capture_default_str();
    app->add_option("--b", b, "score of A meeting B")->capture_default_str();
    app->add_option("--c", c, "score of B meeting A")->capture_default_str();
    app->add_option("--d", d, "score of B meeting B")->capture_default_str();
    app->add_option("--delta-a", delta_a, "basic score of opinion A")->capture_default_str();
    app->add_option("--delta-b", delta_b, "basic score of opinion B")->capture_default_str();
  }
  GameScores scores() const { return {a, b, c, d, delta_a, delta_b}; }
};

void warn_signs(const GameScores& s) {
  for (const auto& w : s.sign_warnings()) std::cerr << "warning: " << w << "\n";
}

/// Parses "label:a,b,c,d,delta_a,delta_b" (label optional).
LabeledScores parse_score_spec(const std::string& text) {
  LabeledScores out;
  std::string body = text;
  if (auto colon = text.find(':'); colon != std::string::npos) {
    out.label = text.substr(0, colon);
    body = text.substr(colon + 1);
  } else {
    out.label = text;
  }
  std::vector<double> v;
  std::stringstream ss(body);
  std::string field;
  while (std::getline(ss, field, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(field, &used));
      if (used != field.size()) throw std::invalid_argument(field);
    } catch (const std::exception&) {
      throw Error(ErrorKind::InvalidArgument, "bad score field '" + field + "' in '" + text + "'");
    }
  }
  if (v.size() != 6) throw Error(ErrorKind::InvalidArgument, "score spec needs six values a,b,c,d,delta_a,delta_b");
  out.scores = {v[0], v[1], v[2], v[3], v[4], v[5]};
  return out;
}

WeightedGraph load_graph(const std::string& path) {
  WeightedGraph g = read_edge_list_file(path);
  std::cerr << "# input " << path << " hash=" << g.hash_hex() << " n=" << g.size() << "\n";
  return g;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path);
}

std::size_t resolve_workers(std::size_t flag) { return flag == 0 ? default_workers() : flag; }

// ---------------------------------------------------------------------------

struct GenArgs {
  std::string family;
  std::size_t n = 0, k = 8, m0 = 3, m = 3;
  double p = 0.4;
  std::uint64_t seed = 1;
  std::string output;
};

int cmd_gen(const GenArgs& a) {
  WeightedGraph g = [&] {
    if (a.family == "complete") return complete_graph(a.n);
    if (a.family == "ring") return ring_graph(a.n);
    if (a.family == "star") return star_graph(a.n);
    if (a.family == "path") return path_graph(a.n);
    if (a.family == "nw") return newman_watts(a.n, a.k, a.p, a.seed);
    if (a.family == "ba") return barabasi_albert(a.n, a.m0, a.m, a.seed);
    throw Error(ErrorKind::InvalidArgument, "unknown family " + a.family);
  }();
  std::vector<std::string> meta{"family=" + a.family + " n=" + std::to_string(a.n)};
  if (a.family == "nw") meta[0] += " k=" + std::to_string(a.k) + " p=" + format_double(a.p);
  if (a.family == "ba") meta[0] += " m0=" + std::to_string(a.m0) + " m=" + std::to_string(a.m);
  if (a.family == "nw" || a.family == "ba") meta[0] += " seed=" + std::to_string(a.seed);
  std::ostringstream os;
  write_edge_list(os, g, meta);
  emit(a.output, os.str());
  std::cerr << "# generated hash=" << g.hash_hex() << " n=" << g.size() << " edges=" << g.edge_count() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct TheoryArgs {
  std::string graph;
  ScoreFlags scores;
  std::string convention = "both";
  std::string config = kDefaultConfig;
  std::string cache;
  double beta = 0.01;
  std::string output;
};

int cmd_theory(const TheoryArgs& a) {
  const WeightedGraph g = load_graph(a.graph);
  const GameScores sc = a.scores.scores();
  warn_signs(sc);
  const Convention selected = read_convention_config(a.config);
  std::vector<Convention> convs;
  if (a.convention == "both")
    convs = {Convention::PaperLiteral, Convention::Lineage};
  else if (a.convention == "auto")
    convs = {selected};
  else
    convs = {parse_convention(a.convention)};

  nlohmann::json j;
  j["input"] = {{"graph", a.graph}, {"hash", g.hash_hex()}};
  j["graph"] = graph_summary(g);
  j["scores"] = to_json(sc);
  j["selected_convention"] = std::string(to_string(selected));
  j["results"] = nlohmann::json::array();
  for (auto conv : convs) {
    const auto tables = solve_tables(g, conv, {}, a.cache);
    j["results"].push_back(to_json(convention_report(g, sc, tables), a.beta));
  }
  emit(a.output, j.dump(2) + "\n");
  return 0;
}

// ---------------------------------------------------------------------------

struct SweepArgs {
  std::string graph;
  ScoreFlags scores;
  std::string param = "a/d";
  std::string grid;
  bool log = false;
  double beta = 0.01;
  std::size_t runs = 10000;
  std::uint64_t seed = 1;
  std::string focal = "uniform";
  std::string convention = "auto";
  std::string config = kDefaultConfig;
  std::string cache;
  std::size_t workers = 0;
  std::string output;
  std::string json;
};

int cmd_sweep(const SweepArgs& a) {
  const WeightedGraph g = load_graph(a.graph);
  SweepSpec spec;
  spec.base = a.scores.scores();
  spec.param = parse_sweep_param(a.param);
  spec.grid = Grid::parse(a.grid, a.log);
  spec.beta = a.beta;
  spec.runs = a.runs;
  spec.seed = a.seed;
  if (a.focal == "uniform")
    spec.options.focal = FocalChoice::Uniform;
  else if (a.focal == "stationary")
    spec.options.focal = FocalChoice::Stationary;
  else
    throw Error(ErrorKind::InvalidArgument, "focal must be uniform or stationary");
  spec.validate();

  const Convention conv = a.convention == "auto" ? read_convention_config(a.config) : parse_convention(a.convention);
  const auto tables = solve_tables(g, conv, {}, a.cache);
  const auto threshold = sweep_threshold(g, tables, spec.param);
  const auto result = run_sweep(g, spec, threshold, conv, resolve_workers(a.workers));
  emit(a.output, sweep_csv_text(result));
  if (!a.json.empty()) {
    nlohmann::json j = to_json(result);
    j["input"] = {{"graph", a.graph}, {"hash", g.hash_hex()}};
    j["template"] = to_json(spec.base);
    emit(a.json, j.dump(2) + "\n");
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string graph;
  ScoreFlags scores;
  double beta = 0.01;
  std::size_t runs = 10000;
  std::uint64_t seed = 1;
  std::string focal = "uniform";
  bool exact = false;
  std::size_t workers = 0;
  std::string output;
};

int cmd_simulate(const SimulateArgs& a) {
  const WeightedGraph g = load_graph(a.graph);
  const GameScores sc = a.scores.scores();
  FixationOptions opt;
  if (a.focal == "stationary")
    opt.focal = FocalChoice::Stationary;
  else if (a.focal != "uniform")
    throw Error(ErrorKind::InvalidArgument, "focal must be uniform or stationary");
  nlohmann::json j;
  j["input"] = {{"graph", a.graph}, {"hash", g.hash_hex()}};
  j["scores"] = to_json(sc);
  j["focal"] = std::string(to_string(opt.focal));
  const auto est = estimate_fixation(g, sc, a.beta, a.runs, a.seed, opt, resolve_workers(a.workers));
  j["estimate"] = to_json(est);
  j["n_rho"] = static_cast<double>(g.size()) * est.rho_hat;
  if (a.exact) j["exact_rho"] = exact_fixation(g, sc, a.beta, ExactInitial::uniform(), opt.focal);
  emit(a.output, j.dump(2) + "\n");
  return 0;
}

// ---------------------------------------------------------------------------

struct ArbitrateArgs {
  std::vector<std::string> graphs;
  std::vector<std::string> scores;
  bool standard = false;
  double tolerance = 0.005;
  std::string config = kDefaultConfig;
  std::string report;
  std::size_t workers = 0;
};

std::vector<LabeledGraph> standard_graphs() {
  return {{"complete6", complete_graph(6)},
          {"ring8", ring_graph(8)},
          {"star7", star_graph(7)},
          {"nw9-k2-p0.5-s3", newman_watts(9, 2, 0.5, 3)},
          {"ba10-m0_2-m1-s5", barabasi_albert(10, 2, 1, 5)}};
}

std::vector<LabeledScores> standard_scores() {
  return {{"caseII", {1.0, 0.0, 0.0, 1.0, 0.0, 0.0}},
          {"caseIII", {0.0, -1.0, -0.4, 0.0, 0.0, 0.0}},
          {"mixed", {1.3, -0.4, -0.7, 0.9, 0.25, -0.15}}};
}

int cmd_arbitrate(const ArbitrateArgs& a) {
  std::vector<LabeledGraph> graphs = a.standard ? standard_graphs() : std::vector<LabeledGraph>{};
  for (const auto& path : a.graphs) graphs.push_back({path, load_graph(path)});
  std::vector<LabeledScores> scores;
  for (const auto& s : a.scores) scores.push_back(parse_score_spec(s));
  if (scores.empty()) scores = standard_scores();

  const auto r = arbitrate(graphs, scores, a.tolerance, resolve_workers(a.workers));
  std::printf("%-18s %-10s %14s %14s %14s %10s %10s  %s\n", "graph", "scores", "exact_slope", "dprime_lit",
              "dprime_lin", "err_lit", "err_lin", "winner");
  for (const auto& i : r.instances) {
    const char* w = i.lineage_matches && i.literal_matches ? "both"
                    : i.lineage_matches                    ? "lineage"
                    : i.literal_matches                    ? "paper-literal"
                                                           : "neither";
    std::printf("%-18s %-10s %14.6e %14.6e %14.6e %10.2e %10.2e  %s\n", i.graph.c_str(), i.scores.c_str(), i.slope,
                i.dprime_literal, i.dprime_lineage, i.err_literal, i.err_lineage, w);
  }
  std::printf("matches within %.3g%%: paper-literal %zu/%zu, lineage %zu/%zu\n", 100.0 * r.tolerance,
              r.literal_matches, r.instances.size(), r.lineage_matches, r.instances.size());
  if (!a.report.empty()) emit(a.report, to_json(r).dump(2) + "\n");
  if (!r.winner) {
    std::printf("no unique winning convention; config unchanged\n");
    return exit_code(ErrorKind::Undecided);
  }
  write_convention_config(a.config, r);
  std::printf("winner: %s (written to %s)\n", std::string(to_string(*r.winner)).c_str(), a.config.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Opinion spreading on weighted networks: weak-selection theory and simulation"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "generate a graph and write its edge list");
  g->add_option("family", gen.family, "complete | ring | star | path | nw | ba")
      ->required()
      ->check(CLI::IsMember({"complete", "ring", "star", "path", "nw", "ba"}));
  g->add_option("--n", gen.n, "vertex count")->required();
  g->add_option("--k", gen.k, "nw: lattice degree (even)")->capture_default_str();
  g->add_option("--p", gen.p, "nw: shortcut probability per lattice edge")->capture_default_str();
  g->add_option("--m0", gen.m0, "ba: seed clique size")->capture_default_str();
  g->add_option("--m", gen.m, "ba: edges per new vertex")->capture_default_str();
  g->add_option("--seed", gen.seed, "generator seed")->capture_default_str();
  g->add_option("-o,--output", gen.output, "output file (default stdout)");

  TheoryArgs th;
  auto* t = app.add_subcommand("theory", "weak-selection report for one graph and score vector");
  t->add_option("--graph", th.graph, "edge-list file")->required();
  th.scores.add(t);
  t->add_option("--convention", th.convention, "both | auto | paper-literal | lineage")->capture_default_str();
  t->add_option("--config", th.config, "arbitration config read by 'auto'")->capture_default_str();
  t->add_option("--cache", th.cache, "directory for cached coalescence tables");
  t->add_option("--beta", th.beta, "selection intensity for the rho line")->capture_default_str();
  t->add_option("-o,--output", th.output, "JSON output file (default stdout)");

  SweepArgs sw;
  auto* s = app.add_subcommand("sweep", "Monte Carlo fixation over a grid of a/d or b/c");
  s->add_option("--graph", sw.graph, "edge-list file")->required();
  sw.scores.add(s, 1.0);
  s->add_option("--param", sw.param, "swept ratio: a/d or b/c")->capture_default_str();
  s->add_option("--grid", sw.grid, "min:max:points")->required();
  s->add_flag("--log", sw.log, "logarithmic grid spacing");
  s->add_option("--beta", sw.beta, "selection intensity")->capture_default_str();
  s->add_option("--runs", sw.runs, "runs per grid point")->capture_default_str();
  s->add_option("--seed", sw.seed, "master seed")->capture_default_str();
  s->add_option("--focal", sw.focal, "uniform | stationary")->capture_default_str();
  s->add_option("--convention", sw.convention, "auto | paper-literal | lineage")->capture_default_str();
  s->add_option("--config", sw.config, "arbitration config read by 'auto'")->capture_default_str();
  s->add_option("--cache", sw.cache, "directory for cached coalescence tables");
  s->add_option("--workers", sw.workers, "worker threads (default OPDYN_WORKERS or all cores)");
  s->add_option("-o,--output", sw.output, "CSV output file (default stdout)");
  s->add_option("--json", sw.json, "also write a JSON summary here");

  SimulateArgs si;
  auto* m = app.add_subcommand("simulate", "fixation probability estimate at one score vector");
  m->add_option("--graph", si.graph, "edge-list file")->required();
  si.scores.add(m);
  m->add_option("--beta", si.beta, "selection intensity")->capture_default_str();
  m->add_option("--runs", si.runs, "independent runs")->capture_default_str();
  m->add_option("--seed", si.seed, "master seed")->capture_default_str();
  m->add_option("--focal", si.focal, "uniform | stationary")->capture_default_str();
  m->add_flag("--exact", si.exact, "also solve the exact chain (n <= 14)");
  m->add_option("--workers", si.workers, "worker threads");
  m->add_option("-o,--output", si.output, "JSON output file (default stdout)");

  ArbitrateArgs ar;
  auto* r = app.add_subcommand("arbitrate", "pick the triple-time convention that matches the exact slope");
  r->add_option("--graph", ar.graphs, "edge-list file (repeatable, n <= 14)");
  r->add_flag("--standard", ar.standard, "include the built-in graph set");
  r->add_option("--scores", ar.scores, "label:a,b,c,d,delta_a,delta_b (repeatable)");
  r->add_option("--tolerance", ar.tolerance, "relative tolerance")->capture_default_str();
  r->add_option("--config", ar.config, "config file to stamp the winner into")->capture_default_str();
  r->add_option("--report", ar.report, "JSON report file");
  r->add_option("--workers", ar.workers, "worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (g->parsed()) return cmd_gen(gen);
    if (t->parsed()) return cmd_theory(th);
    if (s->parsed()) return cmd_sweep(sw);
    if (m->parsed()) return cmd_simulate(si);
    if (r->parsed()) return cmd_arbitrate(ar);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
