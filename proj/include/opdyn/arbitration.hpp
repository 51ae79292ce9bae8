#pragma once

#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "opdyn/coalescence.hpp"
#include "opdyn/dynamics.hpp"
#include "opdyn/error.hpp"
#include "opdyn/graph.hpp"
#include "opdyn/parallel.hpp"
#include "opdyn/theory.hpp"

namespace opdyn {

struct LabeledGraph {
  std::string label;
  WeightedGraph graph;
};

struct LabeledScores {
  std::string label;
  GameScores scores;
};

/// One (graph, scores) comparison of both triple-time conventions against the exact slope.
struct ArbitrationInstance {
  std::string graph;
  std::string graph_hash;
  std::string scores;
  std::size_t n = 0;
  double slope = 0.0;
  double dprime_literal = 0.0;
  double dprime_lineage = 0.0;
  double err_literal = 0.0;  // relative to |slope|
  double err_lineage = 0.0;
  bool literal_matches = false;
  bool lineage_matches = false;
};

struct ArbitrationResult {
  double tolerance = 0.005;
  std::vector<ArbitrationInstance> instances;
  std::size_t literal_matches = 0;
  std::size_t lineage_matches = 0;
  /// Set when exactly one convention matches the exact slope on every instance.
  std::optional<Convention> winner;
};

inline double relative_error(double value, double reference) {
  const double scale = std::abs(reference);
  if (scale == 0.0) return value == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::abs(value - reference) / scale;
}

/// Compares <D'> under both conventions with the exact-chain slope on every graph x scores
/// pair. Graphs are solved once; instances are evaluated in parallel over graphs.
inline ArbitrationResult arbitrate(const std::vector<LabeledGraph>& graphs, const std::vector<LabeledScores>& scores,
                                   double tolerance = 0.005, std::size_t workers = 0, FocalChoice focal = FocalChoice::Uniform) {
  if (graphs.empty()) throw Error(ErrorKind::InvalidArgument, "arbitration needs at least one graph");
  if (scores.empty()) throw Error(ErrorKind::InvalidArgument, "arbitration needs at least one score vector");
  if (!(tolerance > 0.0)) throw Error(ErrorKind::InvalidArgument, "tolerance must be positive");
  for (const auto& lg : graphs)
    if (lg.graph.size() > kMaxExactVertices)
      throw Error(ErrorKind::TooLarge, "graph '" + lg.label + "' has n=" + std::to_string(lg.graph.size()) +
                                           "; arbitration needs n <= " + std::to_string(kMaxExactVertices));

  ArbitrationResult out;
  out.tolerance = tolerance;
  out.instances.resize(graphs.size() * scores.size());
  parallel_for(graphs.size(), workers, [&](std::size_t gi) {
    const auto& lg = graphs[gi];
    const auto pair = pair_times(lg.graph);
    const auto literal = structure_sums(lg.graph, pair, triple_times(lg.graph, pair, Convention::PaperLiteral));
    const auto lineage = structure_sums(lg.graph, pair, triple_times(lg.graph, pair, Convention::Lineage));
    for (std::size_t si = 0; si < scores.size(); ++si) {
      ArbitrationInstance& inst = out.instances[gi * scores.size() + si];
      inst.graph = lg.label;
      inst.graph_hash = lg.graph.hash_hex();
      inst.scores = scores[si].label;
      inst.n = lg.graph.size();
      inst.slope = weak_slope_oracle(lg.graph, scores[si].scores, focal).slope;
      inst.dprime_literal = dprime_from_sums(literal, scores[si].scores).dprime;
      inst.dprime_lineage = dprime_from_sums(lineage, scores[si].scores).dprime;
      inst.err_literal = relative_error(inst.dprime_literal, inst.slope);
      inst.err_lineage = relative_error(inst.dprime_lineage, inst.slope);
      inst.literal_matches = inst.err_literal <= tolerance;
      inst.lineage_matches = inst.err_lineage <= tolerance;
    }
  });
  for (const auto& inst : out.instances) {
    out.literal_matches += inst.literal_matches;
    out.lineage_matches += inst.lineage_matches;
  }
  const std::size_t total = out.instances.size();
  const bool lit_all = out.literal_matches == total;
  const bool lin_all = out.lineage_matches == total;
  if (lit_all != lin_all) out.winner = lin_all ? Convention::Lineage : Convention::PaperLiteral;
  return out;
}

inline nlohmann::json to_json(const ArbitrationResult& r) {
  nlohmann::json j;
  j["tolerance"] = r.tolerance;
  j["winner"] = r.winner ? nlohmann::json(std::string(to_string(*r.winner))) : nlohmann::json(nullptr);
  j["matches"] = {{"paper-literal", r.literal_matches}, {"lineage", r.lineage_matches}};
  j["instances"] = nlohmann::json::array();
  for (const auto& i : r.instances)
    j["instances"].push_back({{"graph", i.graph},
                              {"graph_hash", i.graph_hash},
                              {"scores", i.scores},
                              {"n", i.n},
                              {"exact_slope", i.slope},
                              {"dprime_paper_literal", i.dprime_literal},
                              {"dprime_lineage", i.dprime_lineage},
                              {"rel_err_paper_literal", i.err_literal},
                              {"rel_err_lineage", i.err_lineage},
                              {"paper_literal_matches", i.literal_matches},
                              {"lineage_matches", i.lineage_matches}});
  return j;
}

// ---------------------------------------------------------------------------
// Convention config: the arbitration outcome that theory and sweep read as their default.

inline constexpr Convention kFallbackConvention = Convention::Lineage;

inline void write_convention_config(const std::string& path, const ArbitrationResult& r) {
  if (!r.winner) throw Error(ErrorKind::Undecided, "arbitration has no unique winner; config not written");
  nlohmann::json j{{"convention", std::string(to_string(*r.winner))},
                   {"tolerance", r.tolerance},
                   {"instances", r.instances.size()}};
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  out << j.dump(2) << '\n';
}

/// Convention stamped into the config at `path`; the fallback when the file is absent.
inline Convention read_convention_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) return kFallbackConvention;
  nlohmann::json j;
  try {
    in >> j;
    return parse_convention(j.at("convention").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, path + ": " + e.what());
  }
}

}  // namespace opdyn
