#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/IterativeLinearSolvers>
#include <unsupported/Eigen/IterativeSolvers>
#include <Eigen/SparseLU>

#include "opdyn/error.hpp"
#include "opdyn/graph.hpp"
#include "opdyn/parallel.hpp"
#include "opdyn/rng.hpp"
#include "opdyn/scores.hpp"

namespace opdyn {

/// How the focal (updating) individual is drawn each elementary step.
enum class FocalChoice { Uniform, Stationary };

constexpr std::string_view to_string(FocalChoice f) {
  return f == FocalChoice::Uniform ? "uniform" : "stationary";
}

struct FixationOptions {
  FocalChoice focal = FocalChoice::Uniform;
  std::uint64_t max_steps = 1'000'000'000ULL;
};

struct FixationOutcome {
  bool a_fixed = false;
  std::uint64_t steps = 0;
};

struct SimEstimate {
  std::size_t runs = 0;
  std::size_t fix_a = 0;
  double rho_hat = 0.0;
  double se = 0.0;
  std::uint64_t seed = 0;
  double beta = 0.0;
  double mean_steps = 0.0;

  bool operator==(const SimEstimate&) const = default;
};

/// Pairwise-comparison (Fermi) imitation dynamics run to absorption.
///
/// Each elementary step draws a focal i, a neighbour j with probability p_ij, and copies
/// s_j into s_i with probability F(f_i, f_j). Staying put is the complementary branch and
/// needs no sampling of its own.
class FermiSimulator {
 public:
  FermiSimulator(const WeightedGraph& g, const GameScores& scores, double beta, FixationOptions opt = {})
      : g_(&g), scores_(scores), beta_(beta), opt_(opt), sampler_(g) {
    if (!(beta >= 0.0)) throw Error(ErrorKind::NegativeBeta, "selection intensity must be >= 0");
    if (opt_.focal == FocalChoice::Stationary) {
      double acc = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) focal_cum_.push_back(acc += g.strength(i));
    }
  }

  /// One run from a single A individual at `initial`, or at a uniformly drawn vertex.
  FixationOutcome run(Rng& rng, std::optional<std::size_t> initial = std::nullopt) const {
    const std::size_t n = g_->size();
    const std::size_t start = initial ? *initial : uniform_index(rng, n);
    if (start >= n) throw Error(ErrorKind::InvalidArgument, "initial vertex out of range");
    ScoreBoard board(*g_, scores_, OpinionState::single(n, start));
    FixationOutcome out;
    while (board.count_a() != 0 && board.count_a() != n) {
      if (out.steps >= opt_.max_steps)
        throw Error(ErrorKind::MaxStepsExceeded, "no absorption within " + std::to_string(opt_.max_steps) + " steps");
      ++out.steps;
      step(board, rng);
    }
    out.a_fixed = board.count_a() == n;
    return out;
  }

  /// A single elementary update; returns true when the state changed.
  bool step(ScoreBoard& board, Rng& rng) const {
    const std::size_t i = draw_focal(rng);
    const std::size_t j = sampler_.sample(i, rng);
    const auto& s = board.state();
    if (s[i] == s[j]) return false;
    const double p = detail::logistic(beta_ * (board.score(j) - board.score(i)));
    if (uniform01(rng) < p) {
      board.flip(i);
      return true;
    }
    return false;
  }

 private:
  std::size_t draw_focal(Rng& rng) const {
    if (opt_.focal == FocalChoice::Uniform) return uniform_index(rng, g_->size());
    const double u = uniform01(rng) * focal_cum_.back();
    const auto k = static_cast<std::size_t>(std::upper_bound(focal_cum_.begin(), focal_cum_.end(), u) -
                                            focal_cum_.begin());
    return std::min(k, g_->size() - 1);
  }

  const WeightedGraph* g_;
  GameScores scores_;
  double beta_;
  FixationOptions opt_;
  StepSampler sampler_;
  std::vector<double> focal_cum_;
};

inline FixationOutcome run_to_fixation(const WeightedGraph& g, const GameScores& scores, double beta,
                                       std::uint64_t seed, FixationOptions opt = {},
                                       std::optional<std::size_t> initial = std::nullopt) {
  FermiSimulator sim(g, scores, beta, opt);
  Rng rng = stream_rng(seed, 0);
  return sim.run(rng, initial);
}

/// Fraction of `runs` independent runs absorbed in all-A. Run r uses stream (seed, r), so
/// the result does not depend on the worker count.
inline SimEstimate estimate_fixation(const WeightedGraph& g, const GameScores& scores, double beta,
                                     std::size_t runs, std::uint64_t seed, FixationOptions opt = {},
                                     std::size_t workers = 0) {
  if (runs < 1) throw Error(ErrorKind::InvalidArgument, "runs must be >= 1");
  const FermiSimulator sim(g, scores, beta, opt);
  std::vector<FixationOutcome> outcomes(runs);
  parallel_for(runs, workers, [&](std::size_t r) {
    Rng rng = stream_rng(seed, r);
    try {
      outcomes[r] = sim.run(rng);
    } catch (const Error& e) {
      throw Error(e.kind(), std::string(e.what()) + " (run " + std::to_string(r) + ")");
    }
  });
  SimEstimate est;
  est.runs = runs;
  est.seed = seed;
  est.beta = beta;
  std::uint64_t steps = 0;
  for (const auto& o : outcomes) {
    est.fix_a += o.a_fixed ? 1 : 0;
    steps += o.steps;
  }
  est.rho_hat = static_cast<double>(est.fix_a) / static_cast<double>(runs);
  est.se = std::sqrt(est.rho_hat * (1.0 - est.rho_hat) / static_cast<double>(runs));
  est.mean_steps = static_cast<double>(steps) / static_cast<double>(runs);
  return est;
}

// ---------------------------------------------------------------------------
// Exact absorbing chain over all 2^n states

inline constexpr std::size_t kMaxExactVertices = 14;
inline constexpr std::size_t kDirectExactVertices = 10;
inline constexpr double kExactIterativeTol = 1e-14;

/// Probability of absorption in all-A from every state, state index = bit mask. `beta` may
/// be negative here; the chain is analytic in beta, which the slope oracle relies on.
inline std::vector<double> absorption_probabilities(const WeightedGraph& g, const GameScores& scores,
                                                    double beta, FocalChoice focal = FocalChoice::Uniform) {
  const std::size_t n = g.size();
  if (n > kMaxExactVertices)
    throw Error(ErrorKind::TooLarge, "exact chain limited to n <= " + std::to_string(kMaxExactVertices) +
                                         " (n=" + std::to_string(n) + ")");
  const std::size_t states = std::size_t{1} << n;
  const std::size_t full = states - 1;
  auto unknown = [](std::size_t s) { return static_cast<Eigen::Index>(s - 1); };

  std::vector<double> focal_w(n, 1.0 / static_cast<double>(n));
  if (focal == FocalChoice::Stationary)
    for (std::size_t i = 0; i < n; ++i) focal_w[i] = g.stationary(i);

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve((states - 2) * (n + 1));
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(states - 2));
  std::vector<double> f(n);
  std::vector<double> rate(n);
  for (std::size_t s = 1; s < full; ++s) {
    for (std::size_t i = 0; i < n; ++i) {
      const bool si = (s >> i) & 1u;
      double wa = 0.0;
      for (const auto& nb : g.neighbors(i))
        if ((s >> nb.v) & 1u) wa += nb.weight;
      const double wb = g.strength(i) - wa;
      f[i] = si ? scores.delta_a + scores.a * wa + scores.b * wb : scores.delta_b + scores.c * wa + scores.d * wb;
    }
    double out = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool si = (s >> i) & 1u;
      double r = 0.0;
      for (const auto& nb : g.neighbors(i))
        if ((((s >> nb.v) & 1u) != 0) != si) r += nb.step * detail::logistic(beta * (f[nb.v] - f[i]));
      rate[i] = focal_w[i] * r;
      out += rate[i];
    }
    // Row normalised by the total flip rate: h(s) - sum_i (r_i / R) h(s ^ bit i) = 0.
    trips.emplace_back(unknown(s), unknown(s), 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (rate[i] == 0.0) continue;
      const std::size_t t = s ^ (std::size_t{1} << i);
      const double coeff = rate[i] / out;
      if (t == full)
        rhs[unknown(s)] += coeff;
      else if (t != 0)
        trips.emplace_back(unknown(s), unknown(t), -coeff);
    }
  }
  const auto m = static_cast<Eigen::Index>(states - 2);
  Eigen::SparseMatrix<double> a(m, m);
  a.setFromTriplets(trips.begin(), trips.end());
  a.makeCompressed();
  Eigen::VectorXd h;
  if (n <= kDirectExactVertices) {
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) throw Error(ErrorKind::NotConverged, "exact chain factorization failed");
    h = lu.solve(rhs);
  } else {
    // LU fill-in on the hypercube grows too fast beyond ~10 vertices.
    Eigen::GMRES<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>> it;
    it.set_restart(60);
    it.preconditioner().setDroptol(1e-4);
    it.preconditioner().setFillfactor(4);
    it.setTolerance(kExactIterativeTol);
    it.setMaxIterations(10000);
    it.compute(a);
    if (it.info() != Eigen::Success) throw Error(ErrorKind::NotConverged, "exact chain preconditioner failed");
    h = it.solve(rhs);
    if (it.info() != Eigen::Success)
      throw Error(ErrorKind::NotConverged, "exact chain GMRES stopped at relative residual " +
                                               format_double(it.error()) + " after " +
                                               std::to_string(it.iterations()) + " iterations");
  }
  std::vector<double> out(states, 0.0);
  out[full] = 1.0;
  for (std::size_t s = 1; s < full; ++s) out[s] = h[unknown(s)];
  return out;
}

/// Where the single A individual starts in the exact chain.
struct ExactInitial {
  std::optional<std::size_t> vertex;  // empty = average over all n single-A states

  static ExactInitial uniform() { return {}; }
  static ExactInitial at(std::size_t v) { return {v}; }
};

namespace detail {

inline double single_mutant_average(const std::vector<double>& h, std::size_t n, const ExactInitial& init) {
  if (init.vertex) {
    if (*init.vertex >= n) throw Error(ErrorKind::InvalidArgument, "initial vertex out of range");
    return h[std::size_t{1} << *init.vertex];
  }
  double acc = 0.0;
  for (std::size_t v = 0; v < n; ++v) acc += h[std::size_t{1} << v];
  return acc / static_cast<double>(n);
}

}  // namespace detail

/// Exact fixation probability of a single A individual (n <= 14).
inline double exact_fixation(const WeightedGraph& g, const GameScores& scores, double beta,
                             ExactInitial init = ExactInitial::uniform(), FocalChoice focal = FocalChoice::Uniform) {
  if (!(beta >= 0.0)) throw Error(ErrorKind::NegativeBeta, "selection intensity must be >= 0");
  return detail::single_mutant_average(absorption_probabilities(g, scores, beta, focal), g.size(), init);
}

struct SlopeEstimate {
  double slope = 0.0;
  std::array<double, 3> central{};     // central differences at h, h/2, h/4
  std::array<double, 2> richardson{};  // first Richardson level
};

/// d rho_A / d beta at beta = 0 from the exact chain: central differences at
/// beta = 1e-3, 5e-4, 2.5e-4 and two levels of Richardson extrapolation (even error series).
inline SlopeEstimate weak_slope_oracle(const WeightedGraph& g, const GameScores& scores,
                                       FocalChoice focal = FocalChoice::Uniform) {
  if (g.size() > kMaxExactVertices)
    throw Error(ErrorKind::TooLarge, "exact chain limited to n <= " + std::to_string(kMaxExactVertices));
  const ExactInitial init = ExactInitial::uniform();
  SlopeEstimate est;
  const std::array<double, 3> steps{1e-3, 5e-4, 2.5e-4};
  for (std::size_t k = 0; k < 3; ++k) {
    const double h = steps[k];
    const double up = detail::single_mutant_average(absorption_probabilities(g, scores, h, focal), g.size(), init);
    const double dn = detail::single_mutant_average(absorption_probabilities(g, scores, -h, focal), g.size(), init);
    est.central[k] = (up - dn) / (2.0 * h);
  }
  est.richardson[0] = (4.0 * est.central[1] - est.central[0]) / 3.0;
  est.richardson[1] = (4.0 * est.central[2] - est.central[1]) / 3.0;
  est.slope = (16.0 * est.richardson[1] - est.richardson[0]) / 15.0;
  const double gap = std::abs(est.richardson[1] - est.richardson[0]);
  if (gap > 1e-4 * std::abs(est.slope) + 1e-9)
    throw Error(ErrorKind::IllConditioned, "Richardson levels disagree by " + format_double(gap));
  return est;
}

}  // namespace opdyn
