#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "opdyn/error.hpp"
#include "opdyn/fixed_point.hpp"
#include "opdyn/graph.hpp"
#include "opdyn/parallel.hpp"
#include "opdyn/rng.hpp"

namespace opdyn {

/// How three-walker coalescence is accounted.
///
/// PaperLiteral: discrete walk in which one of the three walkers is picked uniformly per step
/// and walkers that have met move as a block; values are step counts, continuous time is
/// value / 3. Lineage: once two lineages merge they continue as one walker at unit rate;
/// values are continuous times and repeated-index states equal the pair time tau_uv / 2.
enum class Convention { PaperLiteral, Lineage };

constexpr std::string_view to_string(Convention c) {
  return c == Convention::PaperLiteral ? "paper-literal" : "lineage";
}

inline Convention parse_convention(std::string_view s) {
  if (s == "paper-literal" || s == "literal") return Convention::PaperLiteral;
  if (s == "lineage") return Convention::Lineage;
  throw Error(ErrorKind::InvalidArgument, "unknown convention '" + std::string(s) + "'");
}

/// Expected discrete-step coalescence times tau_ij of two walkers on the neutral walk.
class PairTimes {
 public:
  PairTimes() = default;
  PairTimes(std::size_t n, std::vector<double> values, std::uint64_t graph_hash, SolveStats stats = {})
      : n_(n), tau_(std::move(values)), hash_(graph_hash), stats_(stats) {}

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return tau_[i * n_ + j]; }
  std::uint64_t graph_hash() const noexcept { return hash_; }
  const SolveStats& stats() const noexcept { return stats_; }
  std::span<const double> values() const { return tau_; }

 private:
  std::size_t n_ = 0;
  std::vector<double> tau_;  // row-major n x n, symmetric, zero diagonal
  std::uint64_t hash_ = 0;
  SolveStats stats_;
};

/// Flat index of the canonical sorted triple a <= b <= c (combinatorial number system).
constexpr std::size_t triple_index(std::size_t a, std::size_t b, std::size_t c) {
  return c * (c + 1) * (c + 2) / 6 + b * (b + 1) / 2 + a;
}
constexpr std::size_t triple_count(std::size_t n) { return n * (n + 1) * (n + 2) / 6; }

inline std::array<std::size_t, 3> sorted3(std::size_t i, std::size_t j, std::size_t k) {
  std::array<std::size_t, 3> t{i, j, k};
  std::sort(t.begin(), t.end());
  return t;
}

/// Three-walker coalescence values over canonical sorted triples, under one convention.
class TripleTimes {
 public:
  TripleTimes() = default;
  TripleTimes(Convention conv, std::size_t n, std::vector<double> values, std::uint64_t graph_hash,
              SolveStats stats = {})
      : conv_(conv), n_(n), values_(std::move(values)), hash_(graph_hash), stats_(stats) {}

  Convention convention() const noexcept { return conv_; }
  std::size_t size() const noexcept { return n_; }
  std::uint64_t graph_hash() const noexcept { return hash_; }
  const SolveStats& stats() const noexcept { return stats_; }
  std::span<const double> values() const { return values_; }

  /// Permutation invariant lookup.
  double operator()(std::size_t i, std::size_t j, std::size_t k) const {
    const auto t = sorted3(i, j, k);
    return values_[triple_index(t[0], t[1], t[2])];
  }

  /// The triple difference entering the weak-selection sum, expressed in discrete
  /// three-walker step units: tau_ijk - tau_iik (paper-literal) or 3 (theta_ijk - tau_ik / 2)
  /// (lineage). Both equal 3N times the occupation-time difference they represent.
  double difference(const PairTimes& pair, std::size_t i, std::size_t j, std::size_t k) const {
    if (conv_ == Convention::PaperLiteral) return (*this)(i, j, k) - (*this)(i, i, k);
    return 3.0 * ((*this)(i, j, k) - 0.5 * pair(i, k));
  }

 private:
  Convention conv_ = Convention::Lineage;
  std::size_t n_ = 0;
  std::vector<double> values_;
  std::uint64_t hash_ = 0;
  SolveStats stats_;
};

// ---------------------------------------------------------------------------
// Pair times

/// Solves tau_ij = 1 + 1/2 sum_x (p~_ix tau_jx + p~_jx tau_ix), tau_ii = 0.
///
/// The self-loop mass of p~ is moved to the left, giving the contraction
/// tau_ij = 2 + 1/2 sum_x p_ix tau_xj + 1/2 sum_x p_jx tau_ix over unordered pairs i < j.
inline PairTimes pair_times(const WeightedGraph& g, const SolverOptions& opt = {}) {
  if (!(opt.tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "tolerance must be positive");
  const std::size_t n = g.size();
  auto pair_id = [n](std::size_t a, std::size_t b) {
    if (a > b) std::swap(a, b);
    return a * (2 * n - a - 1) / 2 + (b - a - 1);
  };
  const std::size_t unknowns = n * (n - 1) / 2;
  FixedPointSystem sys(unknowns);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      for (const auto& nb : g.neighbors(i))
        if (nb.v != j) sys.add(pair_id(nb.v, j), 0.5 * nb.step);
      for (const auto& nb : g.neighbors(j))
        if (nb.v != i) sys.add(pair_id(i, nb.v), 0.5 * nb.step);
      sys.finish_row(2.0);
    }
  std::vector<double> x;
  const SolveStats st = sys.solve(x, opt);
  std::vector<double> tau(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) tau[i * n + j] = tau[j * n + i] = x[pair_id(i, j)];
  return PairTimes(n, std::move(tau), g.content_hash(), st);
}

/// Max-norm residual of the pair recurrence evaluated directly on the graph.
inline double pair_residual(const WeightedGraph& g, const PairTimes& tau) {
  const std::size_t n = g.size();
  double r = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) {
        r = std::max(r, std::abs(tau(i, i)));
        continue;
      }
      double rhs = 1.0 + 0.5 * (0.5 * tau(j, i) + 0.5 * tau(i, j));
      for (const auto& nb : g.neighbors(i)) rhs += 0.5 * 0.5 * nb.step * tau(j, nb.v);
      for (const auto& nb : g.neighbors(j)) rhs += 0.5 * 0.5 * nb.step * tau(i, nb.v);
      r = std::max(r, std::abs(tau(i, j) - rhs));
    }
  return r;
}

// ---------------------------------------------------------------------------
// Triple times

/// Solves the three-walker system on g under `conv`. The recurrence is generated from the
/// walker process itself rather than from a case table: per event one walker (literal) or
/// one surviving lineage (lineage) moves by p~.
inline TripleTimes triple_times(const WeightedGraph& g, const PairTimes& pair, Convention conv,
                                const SolverOptions& opt = {}) {
  if (pair.graph_hash() != g.content_hash() || pair.size() != g.size())
    throw Error(ErrorKind::ConventionMismatch, "pair table was solved on a different graph");
  if (!(opt.tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "tolerance must be positive");
  const std::size_t n = g.size();
  const std::size_t states = triple_count(n);

  // unknown id per canonical state; npos marks a fixed (boundary) state
  constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::vector<std::size_t> unknown(states, npos);
  std::vector<double> fixed(states, 0.0);
  std::vector<std::array<std::size_t, 3>> state_of;
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t b = 0; b <= c; ++b)
      for (std::size_t a = 0; a <= b; ++a) {
        const std::size_t id = triple_index(a, b, c);
        const bool all_equal = a == c;
        const bool distinct = a != b && b != c;
        if (all_equal) continue;
        if (conv == Convention::Lineage && !distinct) {
          fixed[id] = 0.5 * (a == b ? pair(b, c) : pair(a, b));
          continue;
        }
        unknown[id] = state_of.size();
        state_of.push_back({a, b, c});
      }

  FixedPointSystem sys(state_of.size());
  std::vector<std::pair<std::size_t, double>> row;
  for (const auto& s : state_of) {
    row.clear();
    double constant = 0.0;
    auto target = [&](std::array<std::size_t, 3> t, double coeff) {
      std::sort(t.begin(), t.end());
      const std::size_t id = triple_index(t[0], t[1], t[2]);
      if (unknown[id] == npos)
        constant += coeff * fixed[id];
      else
        row.emplace_back(unknown[id], coeff);
    };
    if (conv == Convention::PaperLiteral) {
      // tau = 2 + sum over walker blocks (m/3) sum_x p_vx tau(block moved to x)
      for (std::size_t pos = 0; pos < 3; ++pos) {
        const std::size_t v = s[pos];
        bool first = true;
        for (std::size_t q = 0; q < pos; ++q) first = first && s[q] != v;
        if (!first) continue;
        const double m = static_cast<double>(std::count(s.begin(), s.end(), v));
        for (const auto& nb : g.neighbors(v)) {
          auto t = s;
          for (auto& e : t)
            if (e == v) e = nb.v;
          target(t, m / 3.0 * nb.step);
        }
      }
      constant += 2.0;
    } else {
      // theta = 2/3 + 1/3 sum_pos sum_x p_vx theta(pos moved to x)
      for (std::size_t pos = 0; pos < 3; ++pos)
        for (const auto& nb : g.neighbors(s[pos])) {
          auto t = s;
          t[pos] = nb.v;
          target(t, nb.step / 3.0);
        }
      constant += 2.0 / 3.0;
    }
    std::sort(row.begin(), row.end());
    for (const auto& [col, coeff] : row) sys.add(col, coeff);
    sys.finish_row(constant);
  }

  std::vector<double> x;
  const SolveStats st = sys.solve(x, opt);
  std::vector<double> values = std::move(fixed);
  for (std::size_t u = 0; u < state_of.size(); ++u) {
    const auto& s = state_of[u];
    values[triple_index(s[0], s[1], s[2])] = x[u];
  }
  return TripleTimes(conv, n, std::move(values), g.content_hash(), st);
}

// ---------------------------------------------------------------------------
// Direct walker simulation

struct CoalescenceEstimate {
  double mean = 0.0;
  double se = 0.0;
  std::size_t trials = 0;
};

namespace detail {

/// One step of the self-looped neutral walk: stay with probability 1/2, else move by p.
inline std::size_t neutral_step(const StepSampler& sampler, std::size_t v, Rng& rng) {
  return uniform01(rng) < 0.5 ? v : sampler.sample(v, rng);
}

inline bool all_together(std::span<const std::size_t> pos) {
  return std::all_of(pos.begin(), pos.end(), [&](std::size_t v) { return v == pos[0]; });
}

}  // namespace detail

/// Monte Carlo coalescence time of 2 or 3 walkers started at `starts`, in the units of the
/// convention's table: discrete steps for PaperLiteral, continuous time for Lineage.
inline CoalescenceEstimate simulate_coalescence(const WeightedGraph& g, std::span<const std::size_t> starts,
                                                Convention conv, std::size_t trials, std::uint64_t seed,
                                                std::size_t workers = 0) {
  if (starts.size() < 2 || starts.size() > 3)
    throw Error(ErrorKind::InvalidArgument, "need 2 or 3 starting vertices");
  for (auto v : starts)
    if (v >= g.size()) throw Error(ErrorKind::InvalidArgument, "start vertex out of range");
  if (trials < 1) throw Error(ErrorKind::InvalidArgument, "trials must be >= 1");

  const StepSampler sampler(g);
  std::vector<double> sample(trials, 0.0);
  parallel_for(trials, workers, [&](std::size_t t) {
    Rng rng = stream_rng(seed, t);
    std::array<std::size_t, 3> pos{};
    std::copy(starts.begin(), starts.end(), pos.begin());
    const std::span<std::size_t> walkers(pos.data(), starts.size());
    double time = 0.0;
    while (!detail::all_together(walkers)) {
      if (conv == Convention::PaperLiteral) {
        const std::size_t w = uniform_index(rng, walkers.size());
        const std::size_t from = walkers[w];
        const std::size_t dest = detail::neutral_step(sampler, from, rng);
        for (auto& v : walkers)
          if (v == from) v = dest;
        time += 1.0;
      } else {
        std::array<std::size_t, 3> tokens{};
        std::size_t count = 0;
        for (auto v : walkers)
          if (std::find(tokens.begin(), tokens.begin() + count, v) == tokens.begin() + count) tokens[count++] = v;
        const std::size_t from = tokens[uniform_index(rng, count)];
        const std::size_t dest = detail::neutral_step(sampler, from, rng);
        for (auto& v : walkers)
          if (v == from) v = dest;
        time += 1.0 / static_cast<double>(count);
      }
    }
    sample[t] = time;
  });

  CoalescenceEstimate est;
  est.trials = trials;
  double sum = 0.0;
  for (double v : sample) sum += v;
  est.mean = sum / static_cast<double>(trials);
  if (trials > 1) {
    double ss = 0.0;
    for (double v : sample) ss += (v - est.mean) * (v - est.mean);
    est.se = std::sqrt(ss / static_cast<double>(trials - 1) / static_cast<double>(trials));
  }
  return est;
}

/// Expected value of the same quantity from solved tables, for comparison with
/// simulate_coalescence.
inline double expected_coalescence(const PairTimes& pair, const TripleTimes* triple,
                                   std::span<const std::size_t> starts, Convention conv) {
  if (starts.size() == 2) {
    const double tau = pair(starts[0], starts[1]);
    return conv == Convention::PaperLiteral ? tau : 0.5 * tau;
  }
  if (!triple || triple->convention() != conv)
    throw Error(ErrorKind::ConventionMismatch, "triple table with matching convention required");
  return (*triple)(starts[0], starts[1], starts[2]);
}

// ---------------------------------------------------------------------------
// Table cache: text files keyed by graph content hash. Values are written in shortest
// round-trip form so a reload is bit-identical.

inline void write_pair_times(std::ostream& os, const PairTimes& p) {
  os << "opdyn-pair-times v1 n=" << p.size() << " hash=" << std::hex << p.graph_hash() << std::dec << "\n";
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = i + 1; j < p.size(); ++j) os << format_double(p(i, j)) << "\n";
}

inline void write_triple_times(std::ostream& os, const TripleTimes& t) {
  os << "opdyn-triple-times v1 n=" << t.size() << " hash=" << std::hex << t.graph_hash() << std::dec
     << " convention=" << to_string(t.convention()) << "\n";
  for (double v : t.values()) os << format_double(v) << "\n";
}

namespace detail {

struct TableHeader {
  std::string kind;
  std::size_t n = 0;
  std::uint64_t hash = 0;
  std::string convention;
};

inline TableHeader read_header(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorKind::Parse, "empty table file");
  std::istringstream ls(line);
  TableHeader h;
  std::string version, tok;
  ls >> h.kind >> version;
  while (ls >> tok) {
    auto eq = tok.find('=');
    if (eq == std::string::npos) continue;
    auto key = tok.substr(0, eq), val = tok.substr(eq + 1);
    if (key == "n") h.n = std::stoul(val);
    else if (key == "hash") h.hash = std::stoull(val, nullptr, 16);
    else if (key == "convention") h.convention = val;
  }
  return h;
}

inline std::vector<double> read_values(std::istream& is, std::size_t count) {
  std::vector<double> v(count);
  std::string tok;
  for (auto& x : v) {
    if (!(is >> tok)) throw Error(ErrorKind::Parse, "truncated table");
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), x);
    if (res.ec != std::errc{}) throw Error(ErrorKind::Parse, "bad table value '" + tok + "'");
  }
  return v;
}

}  // namespace detail

inline PairTimes read_pair_times(std::istream& is) {
  const auto h = detail::read_header(is);
  if (h.kind != "opdyn-pair-times") throw Error(ErrorKind::Parse, "not a pair-times table");
  const auto upper = detail::read_values(is, h.n * (h.n - 1) / 2);
  std::vector<double> tau(h.n * h.n, 0.0);
  std::size_t k = 0;
  for (std::size_t i = 0; i < h.n; ++i)
    for (std::size_t j = i + 1; j < h.n; ++j) tau[i * h.n + j] = tau[j * h.n + i] = upper[k++];
  return PairTimes(h.n, std::move(tau), h.hash);
}

inline TripleTimes read_triple_times(std::istream& is) {
  const auto h = detail::read_header(is);
  if (h.kind != "opdyn-triple-times") throw Error(ErrorKind::Parse, "not a triple-times table");
  return TripleTimes(parse_convention(h.convention), h.n, detail::read_values(is, triple_count(h.n)), h.hash);
}

/// Solved tables for one graph and convention.
struct CoalescenceTables {
  PairTimes pair;
  TripleTimes triple;
};

/// Loads tables from `cache_dir` when present, otherwise solves and stores them.
/// An empty cache_dir disables caching.
inline CoalescenceTables solve_tables(const WeightedGraph& g, Convention conv, const SolverOptions& opt = {},
                                      const std::string& cache_dir = {}) {
  namespace fs = std::filesystem;
  const std::string stem = cache_dir.empty() ? std::string{} : (fs::path(cache_dir) / g.hash_hex()).string();
  const std::string pair_path = stem + ".pair";
  const std::string triple_path = stem + "." + std::string(to_string(conv));

  CoalescenceTables out;
  bool have_pair = false;
  if (!stem.empty() && fs::exists(pair_path)) {
    std::ifstream in(pair_path);
    out.pair = read_pair_times(in);
    have_pair = out.pair.graph_hash() == g.content_hash() && out.pair.size() == g.size();
  }
  if (!have_pair) {
    out.pair = pair_times(g, opt);
    if (!stem.empty()) {
      fs::create_directories(cache_dir);
      std::ofstream o(pair_path);
      write_pair_times(o, out.pair);
    }
  }
  bool have_triple = false;
  if (!stem.empty() && fs::exists(triple_path)) {
    std::ifstream in(triple_path);
    out.triple = read_triple_times(in);
    have_triple = out.triple.graph_hash() == g.content_hash() && out.triple.convention() == conv;
  }
  if (!have_triple) {
    out.triple = triple_times(g, out.pair, conv, opt);
    if (!stem.empty()) {
      std::ofstream o(triple_path);
      write_triple_times(o, out.triple);
    }
  }
  return out;
}

}  // namespace opdyn
