#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "opdyn/coalescence.hpp"
#include "opdyn/dynamics.hpp"
#include "opdyn/graph.hpp"
#include "opdyn/scores.hpp"
#include "opdyn/sweep.hpp"
#include "opdyn/theory.hpp"

namespace opdyn {

inline nlohmann::json to_json(const GameScores& s) {
  return {{"a", s.a}, {"b", s.b}, {"c", s.c}, {"d", s.d}, {"delta_a", s.delta_a}, {"delta_b", s.delta_b}};
}

inline nlohmann::json to_json(const SimEstimate& e) {
  return {{"runs", e.runs},   {"fix_a", e.fix_a}, {"rho_hat", e.rho_hat},      {"se", e.se},
          {"seed", e.seed},   {"beta", e.beta},   {"mean_steps", e.mean_steps}};
}

inline nlohmann::json graph_summary(const WeightedGraph& g) {
  return {{"n", g.size()},
          {"edges", g.edge_count()},
          {"total_weight", g.total_weight()},
          {"unweighted", g.is_unweighted()},
          {"hash", g.hash_hex()}};
}

/// Theory results for one convention: <D'> with its decomposition and both critical ratios
/// (null when no finite threshold exists).
struct ConventionReport {
  WeakSelectionReport weak;
  StructureSums sums;
  std::optional<double> ratio_ad;
  std::optional<double> ratio_bc;
  std::string ratio_ad_note;
  std::string ratio_bc_note;
};

inline ConventionReport convention_report(const WeightedGraph& g, const GameScores& scores,
                                          const CoalescenceTables& t) {
  ConventionReport r;
  r.sums = structure_sums(g, t.pair, t.triple);
  r.weak = dprime_from_sums(r.sums, scores);
  auto guarded = [](auto&& fn, std::optional<double>& value, std::string& note) {
    try {
      value = fn().value;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NoFiniteThreshold) throw;
      note = e.what();
    }
  };
  guarded([&] { return critical_ratio_ad(r.sums); }, r.ratio_ad, r.ratio_ad_note);
  guarded([&] { return critical_ratio_bc(r.sums); }, r.ratio_bc, r.ratio_bc_note);
  return r;
}

inline nlohmann::json to_json(const ConventionReport& r, double beta) {
  nlohmann::json j;
  j["convention"] = std::string(to_string(r.weak.convention));
  j["dprime"] = r.weak.dprime;
  j["favored"] = r.weak.favored;
  j["rho_at_beta"] = {{"beta", beta}, {"rho", r.weak.rho(beta)}, {"neutral", 1.0 / static_cast<double>(r.weak.n)}};
  j["terms"] = {{"a_minus_b_minus_c_plus_d", r.weak.terms[0]},
                {"b_minus_d", r.weak.terms[1]},
                {"c_minus_d", r.weak.terms[2]},
                {"basic_scores", r.weak.terms[3]},
                {"uniform_drift", r.weak.uniform_drift_term}};
  j["sums"] = {{"triple", r.sums.triple}, {"pair_sq", r.sums.pair_sq}, {"cross", r.sums.cross}, {"pair", r.sums.pair}};
  j["critical_ratio_ad"] = r.ratio_ad ? nlohmann::json(*r.ratio_ad) : nlohmann::json(nullptr);
  j["critical_ratio_bc"] = r.ratio_bc ? nlohmann::json(*r.ratio_bc) : nlohmann::json(nullptr);
  if (!r.ratio_ad_note.empty()) j["critical_ratio_ad_note"] = r.ratio_ad_note;
  if (!r.ratio_bc_note.empty()) j["critical_ratio_bc_note"] = r.ratio_bc_note;
  return j;
}

inline nlohmann::json to_json(const SweepResult& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"ratio", row.ratio}, {"n_rho", row.n_rho}, {"estimate", to_json(row.estimate)}});
  return {{"n", r.n},
          {"param", std::string(to_string(r.param))},
          {"threshold", r.threshold ? nlohmann::json(*r.threshold) : nlohmann::json(nullptr)},
          {"convention", std::string(to_string(r.convention))},
          {"graph_hash", r.graph_hash},
          {"rows", rows}};
}

}  // namespace opdyn
