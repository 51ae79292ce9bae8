#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "opdyn/error.hpp"
#include "opdyn/numeric.hpp"
#include "opdyn/rng.hpp"

namespace opdyn {

struct EdgeEntry {
  std::size_t i;
  std::size_t j;
  double weight;
};

struct Neighbor {
  std::size_t v;
  double weight;  // omega_ij
  double step;    // p_ij = omega_ij / omega_i
};

/// Shortest decimal text that parses back to exactly `x`.
inline std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

/// Undirected, connected, weighted graph without self-loops. Immutable after construction.
///
/// Random-walk quantities are derived on construction: strength omega_i, total weight
/// W = sum_i omega_i, step probability p_ij = omega_ij / omega_i and stationary weight
/// pi_i = omega_i / W. The neutral walk on the self-looped graph moves with
/// p~_ij = p_ij / 2 and stays with p~_ii = 1/2.
class WeightedGraph {
 public:
  static WeightedGraph from_edge_list(std::span<const EdgeEntry> entries,
                                      std::optional<std::size_t> n = std::nullopt);

  std::size_t size() const noexcept { return adj_.size(); }
  std::size_t edge_count() const noexcept { return edge_count_; }

  std::span<const Neighbor> neighbors(std::size_t i) const { return adj_[i]; }
  std::size_t degree(std::size_t i) const { return adj_[i].size(); }

  double strength(std::size_t i) const { return strength_[i]; }
  double total_weight() const noexcept { return total_; }
  double stationary(std::size_t i) const { return strength_[i] / total_; }

  /// omega_ij, zero when i and j are not adjacent.
  double weight(std::size_t i, std::size_t j) const {
    const Neighbor* nb = find(i, j);
    return nb ? nb->weight : 0.0;
  }
  double step_prob(std::size_t i, std::size_t j) const {
    const Neighbor* nb = find(i, j);
    return nb ? nb->step : 0.0;
  }
  double neutral_step(std::size_t i, std::size_t j) const {
    return i == j ? 0.5 : 0.5 * step_prob(i, j);
  }
  bool adjacent(std::size_t i, std::size_t j) const { return find(i, j) != nullptr; }

  /// True when every edge weight is exactly 1.
  bool is_unweighted() const {
    for (const auto& row : adj_)
      for (const auto& nb : row)
        if (nb.weight != 1.0) return false;
    return true;
  }

  /// Undirected edges with i < j, sorted lexicographically.
  std::vector<EdgeEntry> edges() const {
    std::vector<EdgeEntry> out;
    out.reserve(edge_count_);
    for (std::size_t i = 0; i < adj_.size(); ++i)
      for (const auto& nb : adj_[i])
        if (i < nb.v) out.push_back({i, nb.v, nb.weight});
    return out;
  }

  /// FNV-1a digest of the canonical sorted edge list; identifies the graph content.
  std::uint64_t content_hash() const noexcept { return hash_; }
  std::string hash_hex() const {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << hash_;
    return os.str();
  }

  WeightedGraph scaled(double lambda) const {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
      throw Error(ErrorKind::InvalidArgument, "scale factor must be positive and finite");
    auto es = edges();
    for (auto& e : es) e.weight *= lambda;
    return from_edge_list(es, size());
  }

  bool operator==(const WeightedGraph& o) const {
    if (size() != o.size() || edge_count_ != o.edge_count_) return false;
    for (std::size_t i = 0; i < size(); ++i) {
      if (adj_[i].size() != o.adj_[i].size()) return false;
      for (std::size_t k = 0; k < adj_[i].size(); ++k)
        if (adj_[i][k].v != o.adj_[i][k].v || adj_[i][k].weight != o.adj_[i][k].weight) return false;
    }
    return true;
  }

 private:
  WeightedGraph() = default;

  const Neighbor* find(std::size_t i, std::size_t j) const {
    const auto& row = adj_[i];
    auto it = std::lower_bound(row.begin(), row.end(), j,
                               [](const Neighbor& nb, std::size_t v) { return nb.v < v; });
    return (it != row.end() && it->v == j) ? &*it : nullptr;
  }

  std::vector<std::vector<Neighbor>> adj_;
  std::vector<double> strength_;
  double total_ = 0.0;
  std::size_t edge_count_ = 0;
  std::uint64_t hash_ = 0;
};

/// Draws a neighbour j of i with probability p_ij by bisection on cumulative weights.
class StepSampler {
 public:
  explicit StepSampler(const WeightedGraph& g) : g_(&g), cum_(g.size()) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      double acc = 0.0;
      for (const auto& nb : g.neighbors(i)) cum_[i].push_back(acc += nb.weight);
    }
  }

  std::size_t sample(std::size_t i, Rng& rng) const {
    const auto nbs = g_->neighbors(i);
    const auto& c = cum_[i];
    const double u = uniform01(rng) * c.back();
    const auto k = static_cast<std::size_t>(std::upper_bound(c.begin(), c.end(), u) - c.begin());
    return nbs[std::min(k, nbs.size() - 1)].v;
  }

 private:
  const WeightedGraph* g_;
  std::vector<std::vector<double>> cum_;
};

namespace detail {

inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::vector<std::vector<std::size_t>> components(
    const std::vector<std::vector<Neighbor>>& adj) {
  const std::size_t n = adj.size();
  std::vector<int> seen(n, 0);
  std::vector<std::vector<std::size_t>> comps;
  for (std::size_t s = 0; s < n; ++s) {
    if (seen[s]) continue;
    std::vector<std::size_t> comp{s};
    seen[s] = 1;
    for (std::size_t head = 0; head < comp.size(); ++head)
      for (const auto& nb : adj[comp[head]])
        if (!seen[nb.v]) {
          seen[nb.v] = 1;
          comp.push_back(nb.v);
        }
    std::sort(comp.begin(), comp.end());
    comps.push_back(std::move(comp));
  }
  return comps;
}

}  // namespace detail

inline WeightedGraph WeightedGraph::from_edge_list(std::span<const EdgeEntry> entries,
                                                   std::optional<std::size_t> n) {
  std::size_t inferred = 0;
  for (const auto& e : entries) {
    if (e.i == e.j) throw Error(ErrorKind::SelfLoop, "self-loop at vertex " + std::to_string(e.i));
    inferred = std::max({inferred, e.i + 1, e.j + 1});
  }
  const std::size_t count = n.value_or(inferred);
  if (count < 2) throw Error(ErrorKind::TooSmall, "graph needs at least 2 vertices");

  std::map<std::pair<std::size_t, std::size_t>, double> unique;
  for (const auto& e : entries) {
    if (e.i >= count || e.j >= count)
      throw Error(ErrorKind::InvalidArgument, "vertex index out of range: " + std::to_string(std::max(e.i, e.j)));
    if (!(e.weight > 0.0) || !std::isfinite(e.weight))
      throw Error(ErrorKind::NonPositiveWeight, "edge " + std::to_string(e.i) + "-" + std::to_string(e.j) +
                                                    " has weight " + format_double(e.weight));
    const std::pair<std::size_t, std::size_t> key = std::minmax(e.i, e.j);
    auto [it, inserted] = unique.emplace(key, e.weight);
    if (!inserted && it->second != e.weight)
      throw Error(ErrorKind::AsymmetricDuplicate, "edge " + std::to_string(key.first) + "-" +
                                                      std::to_string(key.second) + " given with weights " +
                                                      format_double(it->second) + " and " + format_double(e.weight));
  }

  WeightedGraph g;
  g.adj_.assign(count, {});
  g.strength_.assign(count, 0.0);
  for (const auto& [key, w] : unique) {
    g.adj_[key.first].push_back({key.second, w, 0.0});
    g.adj_[key.second].push_back({key.first, w, 0.0});
  }
  g.edge_count_ = unique.size();

  auto comps = detail::components(g.adj_);
  if (comps.size() > 1) {
    std::ostringstream os;
    os << comps.size() << " components:";
    for (const auto& c : comps) {
      os << " {";
      for (std::size_t k = 0; k < c.size(); ++k) os << (k ? "," : "") << c[k];
      os << "}";
    }
    throw Error(ErrorKind::Disconnected, os.str());
  }

  for (std::size_t i = 0; i < count; ++i) {
    auto& row = g.adj_[i];
    std::sort(row.begin(), row.end(), [](const Neighbor& a, const Neighbor& b) { return a.v < b.v; });
    double s = 0.0;
    if (row.size() >= kCompensatedRowLength) {
      CompensatedSum acc;
      for (const auto& nb : row) acc.add(nb.weight);
      s = acc.value();
    } else {
      for (const auto& nb : row) s += nb.weight;
    }
    g.strength_[i] = s;
    for (auto& nb : row) nb.step = nb.weight / s;
  }
  // Sum in edge order so the total is reproducible from the edge list alone.
  double total = 0.0;
  for (double s : g.strength_) total += s;
  g.total_ = total;

  std::uint64_t h = detail::fnv1a("n=" + std::to_string(count) + "\n");
  for (const auto& [key, w] : unique)
    h = detail::fnv1a(std::to_string(key.first) + " " + std::to_string(key.second) + " " + format_double(w) + "\n", h);
  g.hash_ = h;
  return g;
}

// ---------------------------------------------------------------------------
// Generators

inline WeightedGraph complete_graph(std::size_t n) {
  if (n < 2) throw Error(ErrorKind::TooSmall, "complete graph needs n >= 2");
  std::vector<EdgeEntry> es;
  es.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) es.push_back({i, j, 1.0});
  return WeightedGraph::from_edge_list(es, n);
}

inline WeightedGraph ring_graph(std::size_t n) {
  if (n < 3) throw Error(ErrorKind::TooSmall, "ring needs n >= 3");
  std::vector<EdgeEntry> es;
  for (std::size_t i = 0; i < n; ++i) es.push_back({i, (i + 1) % n, 1.0});
  return WeightedGraph::from_edge_list(es, n);
}

inline WeightedGraph star_graph(std::size_t n) {
  if (n < 2) throw Error(ErrorKind::TooSmall, "star needs n >= 2");
  std::vector<EdgeEntry> es;
  for (std::size_t i = 1; i < n; ++i) es.push_back({0, i, 1.0});
  return WeightedGraph::from_edge_list(es, n);
}

inline WeightedGraph path_graph(std::size_t n) {
  if (n < 2) throw Error(ErrorKind::TooSmall, "path needs n >= 2");
  std::vector<EdgeEntry> es;
  for (std::size_t i = 0; i + 1 < n; ++i) es.push_back({i, i + 1, 1.0});
  return WeightedGraph::from_edge_list(es, n);
}

/// Newman-Watts small world: ring lattice with k/2 neighbours per side, then for every
/// lattice edge a shortcut between two uniformly drawn non-adjacent vertices is added with
/// probability p. Nothing is rewired, so the ring keeps the graph connected.
inline WeightedGraph newman_watts(std::size_t n, std::size_t k, double p, std::uint64_t seed) {
  if (k < 2 || k % 2 != 0 || k >= n)
    throw Error(ErrorKind::InvalidK, "k must be even with 2 <= k < n (k=" + std::to_string(k) +
                                         ", n=" + std::to_string(n) + ")");
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::InvalidParams, "p must lie in [0, 1]");

  std::set<std::pair<std::size_t, std::size_t>> present;
  std::vector<std::pair<std::size_t, std::size_t>> lattice;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t h = 1; h <= k / 2; ++h) {
      const std::size_t j = (i + h) % n;
      const std::pair<std::size_t, std::size_t> e = std::minmax(i, j);
      if (present.insert(e).second) lattice.push_back(e);
    }

  Rng rng = stream_rng(seed, 0);
  const std::size_t max_edges = n * (n - 1) / 2;
  for (std::size_t e = 0; e < lattice.size(); ++e) {
    if (uniform01(rng) >= p) continue;
    if (present.size() == max_edges) break;
    for (;;) {
      const std::size_t u = uniform_index(rng, n);
      const std::size_t v = uniform_index(rng, n);
      if (u == v) continue;
      if (present.insert(std::pair<std::size_t, std::size_t>(std::minmax(u, v))).second) break;
    }
  }

  std::vector<EdgeEntry> es;
  es.reserve(present.size());
  for (const auto& [u, v] : present) es.push_back({u, v, 1.0});
  return WeightedGraph::from_edge_list(es, n);
}

/// Barabasi-Albert preferential attachment seeded with a clique on m0 vertices. Every new
/// vertex links to m distinct existing vertices drawn proportionally to current degree.
inline WeightedGraph barabasi_albert(std::size_t n, std::size_t m0, std::size_t m, std::uint64_t seed) {
  if (m < 1 || m > m0 || m0 >= n)
    throw Error(ErrorKind::InvalidParams, "need 1 <= m <= m0 < n (n=" + std::to_string(n) +
                                              ", m0=" + std::to_string(m0) + ", m=" + std::to_string(m) + ")");
  std::vector<EdgeEntry> es;
  std::vector<std::size_t> ends;  // each vertex repeated once per incident edge
  for (std::size_t i = 0; i < m0; ++i)
    for (std::size_t j = i + 1; j < m0; ++j) {
      es.push_back({i, j, 1.0});
      ends.push_back(i);
      ends.push_back(j);
    }

  Rng rng = stream_rng(seed, 0);
  std::vector<std::size_t> targets;
  for (std::size_t v = m0; v < n; ++v) {
    targets.clear();
    while (targets.size() < m) {
      // A lone seed vertex has no degree yet; fall back to uniform choice.
      const std::size_t t = ends.empty() ? uniform_index(rng, v) : ends[uniform_index(rng, ends.size())];
      if (std::find(targets.begin(), targets.end(), t) == targets.end()) targets.push_back(t);
    }
    for (std::size_t t : targets) {
      es.push_back({t, v, 1.0});
      ends.push_back(t);
      ends.push_back(v);
    }
  }
  return WeightedGraph::from_edge_list(es, n);
}

// ---------------------------------------------------------------------------
// Edge-list text format: one "i j w" line per undirected edge with i < j. Lines starting
// with '#' are comments.

inline void write_edge_list(std::ostream& os, const WeightedGraph& g,
                            std::span<const std::string> metadata = {}) {
  os << "# opdyn edge list n=" << g.size() << " edges=" << g.edge_count() << " hash=" << g.hash_hex() << "\n";
  for (const auto& line : metadata) os << "# " << line << "\n";
  for (const auto& e : g.edges()) os << e.i << ' ' << e.j << ' ' << format_double(e.weight) << '\n';
}

inline std::string edge_list_text(const WeightedGraph& g) {
  std::ostringstream os;
  for (const auto& e : g.edges()) os << e.i << ' ' << e.j << ' ' << format_double(e.weight) << '\n';
  return os.str();
}

inline WeightedGraph read_edge_list(std::istream& is) {
  std::vector<EdgeEntry> es;
  std::optional<std::size_t> n;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '#') {
      auto pos = line.find(" n=");
      if (!n && line.find("opdyn edge list") != std::string::npos && pos != std::string::npos)
        n = std::stoul(line.substr(pos + 3));
      continue;
    }
    std::istringstream ls(line);
    long long i = -1, j = -1;
    std::string wtext, extra;
    if (!(ls >> i >> j >> wtext) || (ls >> extra) || i < 0 || j < 0)
      throw Error(ErrorKind::Parse, "line " + std::to_string(lineno) + ": expected 'i j weight'");
    double w = 0.0;
    const char* b = wtext.data();
    const char* e = b + wtext.size();
    auto res = std::from_chars(b, e, w);
    if (res.ec != std::errc{} || res.ptr != e)
      throw Error(ErrorKind::Parse, "line " + std::to_string(lineno) + ": bad weight '" + wtext + "'");
    es.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j), w});
  }
  return WeightedGraph::from_edge_list(es, n);
}

inline WeightedGraph read_edge_list_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  return read_edge_list(in);
}

inline void write_edge_list_file(const std::string& path, const WeightedGraph& g,
                                 std::span<const std::string> metadata = {}) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  write_edge_list(out, g, metadata);
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path);
}

}  // namespace opdyn
