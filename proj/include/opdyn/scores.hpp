#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "opdyn/error.hpp"
#include "opdyn/graph.hpp"

namespace opdyn {

/// Feedback scores of the 2x2 interaction matrix (row = own opinion, column = neighbour's;
/// A-A gives a, A-B gives b, B-A gives c, B-B gives d) plus the basic scores of each opinion.
struct GameScores {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;
  double delta_a = 0.0;
  double delta_b = 0.0;

  /// Score an individual holding `own` receives from one neighbour holding `other`.
  double feedback(bool own, bool other) const {
    if (own) return other ? a : b;
    return other ? c : d;
  }

  GameScores scaled(double lambda) const {
    return {lambda * a, lambda * b, lambda * c, lambda * d, lambda * delta_a, lambda * delta_b};
  }
  GameScores operator+(const GameScores& o) const {
    return {a + o.a, b + o.b, c + o.c, d + o.d, delta_a + o.delta_a, delta_b + o.delta_b};
  }

  bool all_zero() const { return a == 0 && b == 0 && c == 0 && d == 0 && delta_a == 0 && delta_b == 0; }

  /// Non-fatal notes where the scores depart from the usual sign pattern
  /// (a, d positive feedback; b, c negative feedback).
  std::vector<std::string> sign_warnings() const {
    std::vector<std::string> out;
    for (double v : {a, b, c, d, delta_a, delta_b})
      if (!std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, "scores must be finite");
    if (a < 0) out.push_back("a is negative");
    if (d < 0) out.push_back("d is negative");
    if (b > 0) out.push_back("b is positive");
    if (c > 0) out.push_back("c is positive");
    return out;
  }
};

/// Binary opinion vector; 1 = opinion A, 0 = opinion B.
class OpinionState {
 public:
  OpinionState() = default;
  explicit OpinionState(std::size_t n, bool value = false) : s_(n, value ? 1 : 0) {}
  explicit OpinionState(std::vector<std::uint8_t> bits) : s_(std::move(bits)) {
    for (auto& v : s_)
      if (v > 1) throw Error(ErrorKind::InvalidArgument, "opinion values must be 0 or 1");
  }

  /// Single A individual at vertex v.
  static OpinionState single(std::size_t n, std::size_t v) {
    OpinionState s(n);
    s.set(v, true);
    return s;
  }
  /// Bit i of `mask` is the opinion of vertex i.
  static OpinionState from_mask(std::size_t n, std::uint64_t mask) {
    OpinionState s(n);
    for (std::size_t i = 0; i < n; ++i) s.s_[i] = static_cast<std::uint8_t>((mask >> i) & 1u);
    return s;
  }

  std::size_t size() const noexcept { return s_.size(); }
  bool operator[](std::size_t i) const { return s_[i] != 0; }
  void set(std::size_t i, bool v) { s_[i] = v ? 1 : 0; }
  void flip(std::size_t i) { s_[i] ^= 1u; }

  std::size_t count_a() const {
    std::size_t c = 0;
    for (auto v : s_) c += v;
    return c;
  }
  bool all_a() const { return count_a() == s_.size(); }
  bool all_b() const { return count_a() == 0; }

  bool operator==(const OpinionState&) const = default;

 private:
  std::vector<std::uint8_t> s_;
};

inline void check_length(const WeightedGraph& g, const OpinionState& s) {
  if (s.size() != g.size())
    throw Error(ErrorKind::LengthMismatch, "state has " + std::to_string(s.size()) + " entries, graph has " +
                                               std::to_string(g.size()) + " vertices");
}

/// s_i^(1) = sum_j p_ij s_j, the expected opinion of a random neighbour of i.
inline double expected_neighbor_type(const WeightedGraph& g, const OpinionState& s, std::size_t i) {
  double acc = 0.0;
  for (const auto& nb : g.neighbors(i))
    if (s[nb.v]) acc += nb.step;
  return acc;
}

/// Edge-weighted accumulated score P_i(s) = W pi_i [(a-b-c+d) s_i s_i^(1) + (b-d) s_i
/// + (c-d) s_i^(1) + d].
inline double accumulated_score(const WeightedGraph& g, const GameScores& sc, const OpinionState& s,
                                std::size_t i) {
  check_length(g, s);
  const double si = s[i] ? 1.0 : 0.0;
  const double s1 = expected_neighbor_type(g, s, i);
  return g.strength(i) *
         ((sc.a - sc.b - sc.c + sc.d) * si * s1 + (sc.b - sc.d) * si + (sc.c - sc.d) * s1 + sc.d);
}

/// f_i(s) = s_i delta_A + (1 - s_i) delta_B + P_i(s).
inline double total_score(const WeightedGraph& g, const GameScores& sc, const OpinionState& s, std::size_t i) {
  return (s[i] ? sc.delta_a : sc.delta_b) + accumulated_score(g, sc, s, i);
}

namespace detail {

/// 1 / (1 + exp(-x)) without overflow for large |x|.
inline double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace detail

/// Fermi imitation probability of i adopting j's opinion.
inline double imitation_prob(double f_i, double f_j, double beta) {
  if (!(beta >= 0.0)) throw Error(ErrorKind::NegativeBeta, "selection intensity must be >= 0");
  return detail::logistic(beta * (f_j - f_i));
}

/// Opinion state with total scores maintained incrementally. Flipping vertex i touches
/// only i and its neighbours.
class ScoreBoard {
 public:
  ScoreBoard(const WeightedGraph& g, const GameScores& sc, OpinionState s)
      : g_(&g), sc_(sc), s_(std::move(s)), a_weight_(g.size(), 0.0), f_(g.size(), 0.0) {
    check_length(g, s_);
    recompute();
  }

  const OpinionState& state() const noexcept { return s_; }
  double score(std::size_t i) const { return f_[i]; }
  std::span<const double> scores() const { return f_; }
  std::size_t count_a() const noexcept { return count_a_; }

  void flip(std::size_t i) {
    s_.flip(i);
    const double sign = s_[i] ? 1.0 : -1.0;
    count_a_ = s_[i] ? count_a_ + 1 : count_a_ - 1;
    for (const auto& nb : g_->neighbors(i)) {
      a_weight_[nb.v] += sign * nb.weight;
      refresh(nb.v);
    }
    refresh(i);
  }

  /// Rebuilds every score from scratch.
  void recompute() {
    count_a_ = s_.count_a();
    for (std::size_t i = 0; i < g_->size(); ++i) {
      double acc = 0.0;
      for (const auto& nb : g_->neighbors(i))
        if (s_[nb.v]) acc += nb.weight;
      a_weight_[i] = acc;
      refresh(i);
    }
  }

 private:
  void refresh(std::size_t i) {
    const double wa = a_weight_[i];
    const double wb = g_->strength(i) - wa;
    f_[i] = s_[i] ? sc_.delta_a + sc_.a * wa + sc_.b * wb : sc_.delta_b + sc_.c * wa + sc_.d * wb;
  }

  const WeightedGraph* g_;
  GameScores sc_;
  OpinionState s_;
  std::vector<double> a_weight_;  // sum_j omega_ij s_j
  std::vector<double> f_;
  std::size_t count_a_ = 0;
};

}  // namespace opdyn
