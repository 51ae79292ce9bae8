#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "opdyn/coalescence.hpp"
#include "opdyn/dynamics.hpp"
#include "opdyn/error.hpp"
#include "opdyn/graph.hpp"
#include "opdyn/parallel.hpp"
#include "opdyn/scores.hpp"

namespace opdyn {

/// Reproductive-value weighted abundance of A: sum_i pi_i s_i.
inline double degree_weighted_frequency(const WeightedGraph& g, const OpinionState& s) {
  check_length(g, s);
  double acc = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (s[i]) acc += g.stationary(i);
  return acc;
}

/// First-order coefficient of the expected rate of change of the weighted frequency in
/// state s: D'(s) = 1/2 sum_i pi_i s_i (f_i - f_i^(1)), with f_i^(1) = sum_j p_ij f_j.
inline double dprime_state(const WeightedGraph& g, const GameScores& scores, const OpinionState& s) {
  check_length(g, s);
  const ScoreBoard board(g, scores, s);
  double acc = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!s[i]) continue;
    double neighbor = 0.0;
    for (const auto& nb : g.neighbors(i)) neighbor += nb.step * board.score(nb.v);
    acc += g.stationary(i) * (board.score(i) - neighbor);
  }
  return 0.5 * acc;
}

/// Score-independent sums over coalescence tables, all in discrete step units:
///   triple = sum_ijk pi_i^2 p_ij p_ik Delta_ijk   (Delta from TripleTimes::difference)
///   pair_sq = sum_ij pi_i^2 p_ij tau_ij
///   cross  = sum_ijk pi_i^2 p_ij p_ik (tau_jk - tau_ik)
///   pair   = sum_ij pi_i p_ij tau_ij
struct StructureSums {
  Convention convention = Convention::Lineage;
  std::size_t n = 0;
  double total_weight = 0.0;
  double triple = 0.0;
  double pair_sq = 0.0;
  double cross = 0.0;
  double pair = 0.0;
};

inline void check_tables(const WeightedGraph& g, const PairTimes& pair, const TripleTimes& triple) {
  if (pair.graph_hash() != g.content_hash() || pair.size() != g.size())
    throw Error(ErrorKind::ConventionMismatch, "pair table does not belong to this graph");
  if (triple.graph_hash() != g.content_hash() || triple.size() != g.size())
    throw Error(ErrorKind::ConventionMismatch, "triple table does not belong to this graph");
}

inline StructureSums structure_sums(const WeightedGraph& g, const PairTimes& pair, const TripleTimes& triple) {
  check_tables(g, pair, triple);
  StructureSums s;
  s.convention = triple.convention();
  s.n = g.size();
  s.total_weight = g.total_weight();
  // j == k terms are included; neighbours only, since p_ij vanishes off edges.
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double pi = g.stationary(i);
    double t = 0.0, c = 0.0, p = 0.0;
    for (const auto& nj : g.neighbors(i)) {
      p += nj.step * pair(i, nj.v);
      for (const auto& nk : g.neighbors(i)) {
        const double w = nj.step * nk.step;
        t += w * triple.difference(pair, i, nj.v, nk.v);
        c += w * (pair(nj.v, nk.v) - pair(i, nk.v));
      }
    }
    s.triple += pi * pi * t;
    s.pair_sq += pi * pi * p;
    s.cross += pi * pi * c;
    s.pair += pi * p;
  }
  return s;
}

struct WeakSelectionReport {
  Convention convention = Convention::Lineage;
  std::size_t n = 0;
  double dprime = 0.0;  // <D'>_u, the first-order coefficient of rho_A in beta
  /// (a-b-c+d), (b-d), (c-d) and basic-score contributions, in that order.
  std::array<double, 4> terms{};
  /// The d-weighted <s_i - s_j>_u contribution; identically zero because <s_i>_u is the same
  /// for every vertex. Kept so the decomposition is complete.
  double uniform_drift_term = 0.0;
  bool favored = false;

  double rho(double beta) const { return 1.0 / static_cast<double>(n) + beta * dprime; }
};

inline WeakSelectionReport dprime_from_sums(const StructureSums& s, const GameScores& sc) {
  const double n = static_cast<double>(s.n);
  const double half_w = 0.5 * s.total_weight;
  WeakSelectionReport r;
  r.convention = s.convention;
  r.n = s.n;
  r.terms[0] = half_w * (sc.a - sc.b - sc.c + sc.d) * s.triple / (3.0 * n);
  r.terms[1] = half_w * (sc.b - sc.d) * s.pair_sq / (2.0 * n);
  r.terms[2] = half_w * (sc.c - sc.d) * s.cross / (2.0 * n);
  r.terms[3] = 0.5 * (sc.delta_a - sc.delta_b) * s.pair / (2.0 * n);
  r.dprime = r.terms[0] + r.terms[1] + r.terms[2] + r.terms[3];
  r.favored = r.dprime > 0.0;
  return r;
}

/// <D'>_u from solved coalescence tables; the convention is the triple table's.
inline WeakSelectionReport dprime_expectation(const WeightedGraph& g, const GameScores& scores,
                                              const PairTimes& pair, const TripleTimes& triple) {
  return dprime_from_sums(structure_sums(g, pair, triple), scores);
}

/// Opinion A spreads under weak selection iff <D'>_u > 0 (zero counts as neutral).
inline bool favored(const WeightedGraph& g, const GameScores& scores, const PairTimes& pair,
                    const TripleTimes& triple) {
  return dprime_expectation(g, scores, pair, triple).favored;
}

// ---------------------------------------------------------------------------
// Critical ratios

struct CriticalRatio {
  double value = 0.0;
  double numerator = 0.0;
  double denominator = 0.0;
};

namespace detail {

inline CriticalRatio checked_ratio(double num, double den, double offset, const char* name) {
  if (!(den > 0.0))
    throw Error(ErrorKind::NoFiniteThreshold,
                std::string(name) + " has no finite threshold: denominator " + format_double(den));
  return {num / den + offset, num, den};
}

}  // namespace detail

/// (a/d)* for delta_A = delta_B, b = c = 0:
/// [3 pair_sq + 3 cross] / [2 triple] - 1.
inline CriticalRatio critical_ratio_ad(const StructureSums& s) {
  return detail::checked_ratio(3.0 * s.pair_sq + 3.0 * s.cross, 2.0 * s.triple, -1.0, "(a/d)*");
}

/// (b/c)* for delta_A = delta_B, a = d = 0:
/// [2 triple - 3 cross] / [3 pair_sq - 2 triple].
inline CriticalRatio critical_ratio_bc(const StructureSums& s) {
  return detail::checked_ratio(2.0 * s.triple - 3.0 * s.cross, 3.0 * s.pair_sq - 2.0 * s.triple, 0.0, "(b/c)*");
}

inline CriticalRatio critical_ratio_ad(const WeightedGraph& g, const PairTimes& pair, const TripleTimes& triple) {
  return critical_ratio_ad(structure_sums(g, pair, triple));
}
inline CriticalRatio critical_ratio_bc(const WeightedGraph& g, const PairTimes& pair, const TripleTimes& triple) {
  return critical_ratio_bc(structure_sums(g, pair, triple));
}

namespace detail {

/// Degree-form sums for 0/1 graphs: pi_i^2 p_ij = w_i / W^2 and pi_i^2 p_ij p_ik = 1 / W^2,
/// so the common 1/W^2 cancels in every ratio.
struct DegreeSums {
  double triple = 0.0;  // sum (Delta_ijk) w_ij w_ik
  double pair = 0.0;    // sum w_i w_ij tau_ij
  double cross = 0.0;   // sum (tau_jk - tau_ik) w_ij w_ik
};

inline DegreeSums degree_sums(const WeightedGraph& g, const PairTimes& pair, const TripleTimes& triple) {
  if (!g.is_unweighted())
    throw Error(ErrorKind::InvalidArgument, "degree-form threshold requires an unweighted graph");
  check_tables(g, pair, triple);
  const std::size_t n = g.size();
  DegreeSums d;
  for (std::size_t i = 0; i < n; ++i) {
    const double wi = static_cast<double>(g.degree(i));
    for (std::size_t j = 0; j < n; ++j) {
      if (!g.adjacent(i, j)) continue;
      d.pair += wi * pair(i, j);
      for (std::size_t k = 0; k < n; ++k) {
        if (!g.adjacent(i, k)) continue;
        d.triple += triple.difference(pair, i, j, k);
        d.cross += pair(j, k) - pair(i, k);
      }
    }
  }
  return d;
}

}  // namespace detail

/// (a/d)* written with integer degrees on an unweighted graph.
inline CriticalRatio critical_ratio_ad_unweighted(const WeightedGraph& g, const PairTimes& pair,
                                                  const TripleTimes& triple) {
  const auto d = detail::degree_sums(g, pair, triple);
  return detail::checked_ratio(3.0 * d.pair + 3.0 * d.cross, 2.0 * d.triple, -1.0, "(a/d)*");
}

/// (b/c)* written with integer degrees on an unweighted graph.
inline CriticalRatio critical_ratio_bc_unweighted(const WeightedGraph& g, const PairTimes& pair,
                                                  const TripleTimes& triple) {
  const auto d = detail::degree_sums(g, pair, triple);
  return detail::checked_ratio(2.0 * d.triple - 3.0 * d.cross, 3.0 * d.pair - 2.0 * d.triple, 0.0, "(b/c)*");
}

// ---------------------------------------------------------------------------
// Time integration of D'(S(t)) along the neutral chain

struct IntegralEstimate {
  double mean = 0.0;
  double se = 0.0;
  std::size_t runs = 0;
};

/// Monte Carlo estimate of integral_0^inf E_u[D'(S(t))] dt under neutral drift, each
/// individual updating at rate 1. Holding times are replaced by their mean 1/n.
inline IntegralEstimate simulate_dprime_integral(const WeightedGraph& g, const GameScores& scores,
                                                 std::size_t runs, std::uint64_t seed, std::size_t workers = 0) {
  if (runs < 1) throw Error(ErrorKind::InvalidArgument, "runs must be >= 1");
  const std::size_t n = g.size();
  const FermiSimulator neutral(g, GameScores{}, 0.0);
  std::vector<double> sample(runs, 0.0);
  parallel_for(runs, workers, [&](std::size_t r) {
    Rng rng = stream_rng(seed, r);
    ScoreBoard board(g, GameScores{}, OpinionState::single(n, uniform_index(rng, n)));
    double acc = 0.0;
    double current = dprime_state(g, scores, board.state());
    while (board.count_a() != 0 && board.count_a() != n) {
      acc += current / static_cast<double>(n);
      if (neutral.step(board, rng)) current = dprime_state(g, scores, board.state());
    }
    sample[r] = acc;
  });
  IntegralEstimate est;
  est.runs = runs;
  double sum = 0.0;
  for (double v : sample) sum += v;
  est.mean = sum / static_cast<double>(runs);
  if (runs > 1) {
    double ss = 0.0;
    for (double v : sample) ss += (v - est.mean) * (v - est.mean);
    est.se = std::sqrt(ss / static_cast<double>(runs - 1) / static_cast<double>(runs));
  }
  return est;
}

}  // namespace opdyn
