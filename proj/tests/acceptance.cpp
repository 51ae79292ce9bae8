// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
// `acceptance --slow` adds the n = 50 figure reproduction.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "opdyn/opdyn.hpp"
#include "test_support.hpp"

using namespace opdyn;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Tolerances, pinned.
constexpr double kTolComplete = 1e-9;
constexpr double kTolPath = 1e-10;
constexpr double kTolNeutralExact = 1e-12;
constexpr double kTolSlopeRel = 1e-6;
constexpr double kTolArbitration = 0.005;
constexpr double kTolRoot = 1e-10;
constexpr double kTolUnweighted = 1e-10;
constexpr double kZ95 = 1.959963984540054;

std::optional<Convention> g_arbitrated;  // set by criterion 5, consumed by criterion 7

Verdict c1_complete_pairs() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (std::size_t n = 2; n <= 50; ++n) {
    const auto tau = pair_times(complete_graph(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        worst = std::max(worst, std::abs(tau(i, j) - (i == j ? 0.0 : 2.0 * (static_cast<double>(n) - 1.0))));
  }
  const double secs = seconds_since(t0);
  return {worst <= kTolComplete && secs < 5.0,
          fmt("max |tau - 2(n-1)| = %.2e over n=2..50 (tol %.0e), %.2f s (limit 5 s)", worst, kTolComplete, secs)};
}

Verdict c2_path_pairs() {
  const auto tau = pair_times(path_graph(3));
  const double e = std::max({std::abs(tau(0, 1) - 10.0 / 3.0), std::abs(tau(1, 2) - 10.0 / 3.0),
                             std::abs(tau(0, 2) - 16.0 / 3.0)});
  return {e <= kTolPath, fmt("tau = (%.12f, %.12f, %.12f), max err %.2e (tol %.0e)", tau(0, 1), tau(1, 2), tau(0, 2),
                             e, kTolPath)};
}

Verdict c3_neutral() {
  bool pass = true;
  std::string detail;
  const std::vector<std::pair<std::string, WeightedGraph>> graphs{
      {"K20", complete_graph(20)}, {"NW(20,8,0.4)", newman_watts(20, 8, 0.4, 1)}, {"BA(20,3,3)", barabasi_albert(20, 3, 3, 1)}};
  const GameScores scores{1.3, -0.4, -0.7, 0.9, 0.25, -0.15};
  for (std::size_t k = 0; k < graphs.size(); ++k) {
    const auto est = estimate_fixation(graphs[k].second, scores, 0.0, 100000, 300 + k);
    const double dev = std::abs(est.rho_hat - 0.05);
    pass = pass && dev <= 3.0 * est.se;
    detail += fmt("%s rho=%.5f (|dev|/se=%.2f); ", graphs[k].first.c_str(), est.rho_hat, dev / est.se);
  }
  double worst = 0.0;
  for (std::size_t n = 2; n <= 12; ++n) {
    const auto g = testing_support::random_weighted_graph(n, 900 + n);
    worst = std::max(worst, std::abs(exact_fixation(g, scores, 0.0) - 1.0 / static_cast<double>(n)));
  }
  pass = pass && worst <= kTolNeutralExact;
  detail += fmt("exact u-average max |rho - 1/n| = %.2e for n=2..12 (tol %.0e)", worst, kTolNeutralExact);
  return {pass, detail};
}

Verdict c4_two_vertex_slope() {
  bool pass = true;
  std::string detail;
  const auto g = complete_graph(2);
  for (double delta : {1.0, 0.3}) {
    const GameScores sc{0, 0, 0, 0, delta, 0.0};
    const double want = delta / 4.0;
    for (auto conv : {Convention::PaperLiteral, Convention::Lineage}) {
      const auto t = solve_tables(g, conv);
      const double dp = dprime_expectation(g, sc, t.pair, t.triple).dprime;
      pass = pass && relative_error(dp, want) <= kTolSlopeRel;
    }
    const double slope = weak_slope_oracle(g, sc).slope;
    pass = pass && relative_error(slope, want) <= kTolSlopeRel;
    detail += fmt("delta=%.1f: slope %.9f vs %.9f (rel %.1e); ", delta, slope, want, relative_error(slope, want));
  }
  detail += fmt("<D'> both conventions within %.0e rel", kTolSlopeRel);
  return {pass, detail};
}

std::vector<LabeledGraph> arbitration_graphs() {
  return {{"K6", complete_graph(6)},
          {"ring8", ring_graph(8)},
          {"star7", star_graph(7)},
          {"random8-weighted", testing_support::random_weighted_graph(8, 1001)},
          {"random9-unweighted", testing_support::random_weighted_graph(9, 1002, true)},
          {"path5", path_graph(5)}};
}

Verdict c5_arbitration() {
  const auto t0 = Clock::now();
  const std::vector<LabeledScores> scores{{"generic1", {1.3, -0.4, -0.7, 0.9, 0.25, -0.15}},
                                          {"generic2", {0.6, -1.1, -0.2, 1.4, -0.3, 0.2}},
                                          {"generic3", {2.0, 0.5, -1.5, 0.3, 0.1, 0.4}}};
  const auto r = arbitrate(arbitration_graphs(), scores, kTolArbitration);
  std::printf("  %-20s %-9s %14s %14s %14s %9s %9s\n", "graph", "scores", "exact_slope", "dprime_lit", "dprime_lin",
              "err_lit", "err_lin");
  for (const auto& i : r.instances)
    std::printf("  %-20s %-9s %14.6e %14.6e %14.6e %9.2e %9.2e\n", i.graph.c_str(), i.scores.c_str(), i.slope,
                i.dprime_literal, i.dprime_lineage, i.err_literal, i.err_lineage);
  const double secs = seconds_since(t0);
  g_arbitrated = r.winner;
  return {r.winner.has_value() && secs < 600.0,
          fmt("%zu instances; within %.1f%%: paper-literal %zu, lineage %zu; winner %s; %.1f s (limit 600 s)",
              r.instances.size(), 100.0 * kTolArbitration, r.literal_matches, r.lineage_matches,
              r.winner ? std::string(to_string(*r.winner)).c_str() : "none", secs)};
}

Verdict c6_critical_roots() {
  bool pass = true;
  double worst_root = 0.0, worst_form = 0.0;
  std::size_t roots = 0, forms = 0, no_threshold = 0;
  auto graphs = arbitration_graphs();
  graphs.push_back({"NW(12,4,0.3)", newman_watts(12, 4, 0.3, 2)});
  graphs.push_back({"BA(12,3,2)", barabasi_albert(12, 3, 2, 2)});
  for (const auto& lg : graphs) {
    for (auto conv : {Convention::PaperLiteral, Convention::Lineage}) {
      const auto t = solve_tables(lg.graph, conv);
      const auto sums = structure_sums(lg.graph, t.pair, t.triple);
      const auto check = [&](auto ratio_fn, auto scores_at, auto unweighted_fn) {
        try {
          const double r = ratio_fn(sums).value;
          worst_root = std::max(worst_root, std::abs(dprime_from_sums(sums, scores_at(r)).dprime));
          ++roots;
          if (lg.graph.is_unweighted()) {
            worst_form =
                std::max(worst_form, relative_error(unweighted_fn(lg.graph, t.pair, t.triple).value, r));
            ++forms;
          }
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::NoFiniteThreshold) throw;
          ++no_threshold;
        }
      };
      check([](const StructureSums& s) { return critical_ratio_ad(s); },
            [](double r) { return GameScores{r, 0, 0, 1.0, 0, 0}; },
            [](const auto& g, const auto& p, const auto& tr) { return critical_ratio_ad_unweighted(g, p, tr); });
      check([](const StructureSums& s) { return critical_ratio_bc(s); },
            [](double r) { return GameScores{0, r, 1.0, 0, 0, 0}; },
            [](const auto& g, const auto& p, const auto& tr) { return critical_ratio_bc_unweighted(g, p, tr); });
    }
  }
  pass = worst_root <= kTolRoot && worst_form <= kTolUnweighted && roots > 0 && forms > 0;
  return {pass, fmt("%zu roots, max |<D'>| at root %.2e (tol %.0e); %zu unweighted comparisons, max rel diff %.2e "
                    "(tol %.0e); %zu ratio(s) without finite threshold",
                    roots, worst_root, kTolRoot, forms, worst_form, kTolUnweighted, no_threshold)};
}

Verdict figure_reproduction(std::size_t n, double time_limit) {
  const auto t0 = Clock::now();
  const Convention conv = g_arbitrated.value_or(kFallbackConvention);
  const std::vector<std::pair<std::string, WeightedGraph>> graphs{{"complete", complete_graph(n)},
                                                                  {"NW(k=8,p=0.4)", newman_watts(n, 8, 0.4, 1)},
                                                                  {"BA(m0=3,m=3)", barabasi_albert(n, 3, 3, 1)}};
  bool pass = true;
  std::string detail = fmt("convention %s; ", std::string(to_string(conv)).c_str());
  for (std::size_t k = 0; k < graphs.size(); ++k) {
    const auto& g = graphs[k].second;
    const auto tables = solve_tables(g, conv);
    const double rstar = critical_ratio_ad(g, tables.pair, tables.triple).value;
    SweepSpec spec;
    spec.beta = 0.01;
    spec.runs = 10000;
    spec.seed = 7000 + k;
    spec.grid = Grid{rstar / 4.0, 4.0 * rstar, 3, true};  // r*/4, r*, 4 r*
    const auto res = run_sweep(g, spec, rstar, conv);
    const double nn = static_cast<double>(n);
    const auto& lo = res.rows.front();
    const auto& mid = res.rows[1];
    const auto& hi = res.rows.back();
    const bool below = nn * (lo.estimate.rho_hat + kZ95 * lo.estimate.se) < 1.0;
    const bool above = nn * (hi.estimate.rho_hat - kZ95 * hi.estimate.se) > 1.0;
    pass = pass && below && above;
    std::printf("  n=%zu %-14s (a/d)*=%.5f  N*rho: r*/4 %.3f+-%.3f  r* %.3f+-%.3f  4r* %.3f+-%.3f\n", n,
                graphs[k].first.c_str(), rstar, lo.n_rho, nn * lo.estimate.se, mid.n_rho, nn * mid.estimate.se,
                hi.n_rho, nn * hi.estimate.se);
    detail += fmt("%s %s/%s; ", graphs[k].first.c_str(), below ? "below" : "NOT-below", above ? "above" : "NOT-above");
  }
  const double secs = seconds_since(t0);
  pass = pass && secs < time_limit;
  detail += fmt("%.1f s (limit %.0f s)", secs, time_limit);
  return {pass, detail};
}

Verdict c8_coalescence_simulation() {
  bool pass = true;
  std::size_t checks = 0;
  double worst = 0.0;
  const std::vector<std::vector<std::size_t>> starts{{0, 7}, {2, 5}, {1, 4, 6}, {0, 3, 7}, {2, 2, 5}};
  for (std::uint64_t seed : {2001, 2002}) {
    const auto g = testing_support::random_weighted_graph(8, seed);
    for (auto conv : {Convention::PaperLiteral, Convention::Lineage}) {
      const auto t = solve_tables(g, conv);
      for (std::size_t s = 0; s < starts.size(); ++s) {
        const auto est = simulate_coalescence(g, starts[s], conv, 10000, seed * 10 + s);
        const double want = expected_coalescence(t.pair, &t.triple, starts[s], conv);
        const double z = std::abs(est.mean - want) / est.se;
        worst = std::max(worst, z);
        pass = pass && z <= 3.0;
        ++checks;
      }
    }
  }
  return {pass, fmt("%zu start tuples x conventions on two n=8 graphs, 10^4 trials each; max |mean - table|/se = %.2f "
                    "(limit 3)",
                    checks, worst)};
}

Verdict c9_determinism() {
  bool pass = true;
  std::string detail;
  pass = pass && edge_list_text(newman_watts(50, 8, 0.4, 5)) == edge_list_text(newman_watts(50, 8, 0.4, 5));
  pass = pass && edge_list_text(barabasi_albert(50, 3, 3, 5)) == edge_list_text(barabasi_albert(50, 3, 3, 5));
  detail += pass ? "edge lists identical; " : "edge lists differ; ";

  const auto g = barabasi_albert(20, 3, 3, 4);
  const GameScores sc{1.3, -0.4, -0.7, 0.9, 0.25, -0.15};
  const auto e1 = estimate_fixation(g, sc, 0.05, 2000, 11, {}, 1);
  bool sims = true;
  for (std::size_t w : {2, 4, 8}) sims = sims && estimate_fixation(g, sc, 0.05, 2000, 11, {}, w) == e1;
  pass = pass && sims;
  detail += sims ? "SimEstimates identical for 1/2/4/8 workers; " : "SimEstimates differ; ";

  SweepSpec spec;
  spec.grid = Grid{0.5, 8.0, 4, true};
  spec.runs = 500;
  spec.seed = 3;
  const auto c1 = sweep_csv_text(run_sweep(g, spec, 2.0, Convention::Lineage, 1));
  const auto c4 = sweep_csv_text(run_sweep(g, spec, 2.0, Convention::Lineage, 4));
  pass = pass && c1 == c4;
  detail += c1 == c4 ? "sweep CSV identical for 1/4 workers" : "sweep CSV differs";
  return {pass, detail};
}

}  // namespace

int main(int argc, char** argv) {
  bool slow = false;
  for (int i = 1; i < argc; ++i)
    if (std::strcmp(argv[i], "--slow") == 0) slow = true;

  struct Criterion {
    const char* name;
    std::function<Verdict()> fn;
  };
  std::vector<Criterion> criteria{
      {"C1 complete-graph pair times", c1_complete_pairs},
      {"C2 path P3 pair times", c2_path_pairs},
      {"C3 neutral baseline", c3_neutral},
      {"C4 two-vertex closed-form slope", c4_two_vertex_slope},
      {"C5 convention arbitration", c5_arbitration},
      {"C6 critical-ratio roots and unweighted forms", c6_critical_roots},
      {"C7 figure reproduction (n=20)", [] { return figure_reproduction(20, 900.0); }},
      {"C8 coalescence simulation equivalence", c8_coalescence_simulation},
      {"C9 determinism across worker counts", c9_determinism},
  };
  if (slow) criteria.push_back({"C7 figure reproduction (n=50, slow)", [] { return figure_reproduction(50, 14400.0); }});

  int failed = 0;
  for (const auto& c : criteria) {
    Verdict v;
    try {
      v = c.fn();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    std::printf("[%s] %s: %s\n", v.pass ? "PASS" : "FAIL", c.name, v.detail.c_str());
    std::fflush(stdout);
    failed += v.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
