// Weak-selection threshold on a complete graph, checked against Monte Carlo.
//
// Solves the coalescence tables for K_n, prints the critical a/d ratio and then estimates
// N * rho_A on either side of it. Usage: demo_complete_graph [n] [runs]

#include <cstdio>
#include <cstdlib>

#include "opdyn/opdyn.hpp"

int main(int argc, char** argv) {
  const std::size_t n = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 12;
  const std::size_t runs = argc > 2 ? std::strtoul(argv[2], nullptr, 10) : 4000;

  const auto g = opdyn::complete_graph(n);
  const auto tables = opdyn::solve_tables(g, opdyn::Convention::Lineage);
  const double threshold = opdyn::critical_ratio_ad(g, tables.pair, tables.triple).value;
  std::printf("K_%zu: tau_01 = %.6g, critical a/d = %.6g\n", n, tables.pair(0, 1), threshold);

  const double beta = 0.01;
  for (double ratio : {threshold / 4, threshold, 4 * threshold}) {
    const opdyn::GameScores scores{ratio, 0.0, 0.0, 1.0, 0.0, 0.0};
    const auto theory = opdyn::dprime_expectation(g, scores, tables.pair, tables.triple);
    const auto est = opdyn::estimate_fixation(g, scores, beta, runs, 2024);
    std::printf("a/d = %7.4f  N*rho (theory, first order) = %.4f  N*rho (simulated) = %.4f +- %.4f\n", ratio,
                static_cast<double>(n) * theory.rho(beta), static_cast<double>(n) * est.rho_hat,
                static_cast<double>(n) * est.se);
  }
  return 0;
}
