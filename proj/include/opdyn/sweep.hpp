#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "opdyn/coalescence.hpp"
#include "opdyn/dynamics.hpp"
#include "opdyn/error.hpp"
#include "opdyn/rng.hpp"
#include "opdyn/theory.hpp"

namespace opdyn {

/// Which feedback ratio a sweep varies. a/d keeps b, c and the basic scores of the template
/// and sets a = ratio * d; b/c sets b = ratio * c.
enum class SweepParam { AOverD, BOverC };

constexpr std::string_view to_string(SweepParam p) { return p == SweepParam::AOverD ? "a/d" : "b/c"; }

inline SweepParam parse_sweep_param(std::string_view s) {
  if (s == "a/d" || s == "ad") return SweepParam::AOverD;
  if (s == "b/c" || s == "bc") return SweepParam::BOverC;
  throw Error(ErrorKind::InvalidArgument, "unknown sweep parameter '" + std::string(s) + "' (use a/d or b/c)");
}

struct Grid {
  double min = 0.0;
  double max = 0.0;
  std::size_t points = 0;
  bool log = false;

  std::vector<double> values() const {
    validate();
    std::vector<double> v(points);
    if (points == 1) {
      v[0] = min;
      return v;
    }
    for (std::size_t k = 0; k < points; ++k) {
      const double t = static_cast<double>(k) / static_cast<double>(points - 1);
      v[k] = log ? std::exp(std::log(min) + t * (std::log(max) - std::log(min))) : min + t * (max - min);
    }
    v.back() = max;
    return v;
  }

  void validate() const {
    if (points < 1) throw Error(ErrorKind::InvalidArgument, "grid needs at least one point");
    if (!(min > 0.0) || !(max >= min) || !std::isfinite(max))
      throw Error(ErrorKind::InvalidArgument, "grid must satisfy 0 < min <= max");
  }

  /// "min:max:points", e.g. "0.5:8:16".
  static Grid parse(std::string_view text, bool log) {
    Grid g;
    g.log = log;
    const auto c1 = text.find(':');
    const auto c2 = c1 == std::string_view::npos ? c1 : text.find(':', c1 + 1);
    if (c2 == std::string_view::npos)
      throw Error(ErrorKind::InvalidArgument, "grid must look like min:max:points, got '" + std::string(text) + "'");
    auto num = [&](std::string_view part, auto& out) {
      auto res = std::from_chars(part.data(), part.data() + part.size(), out);
      if (res.ec != std::errc{} || res.ptr != part.data() + part.size())
        throw Error(ErrorKind::InvalidArgument, "bad grid field '" + std::string(part) + "'");
    };
    num(text.substr(0, c1), g.min);
    num(text.substr(c1 + 1, c2 - c1 - 1), g.max);
    num(text.substr(c2 + 1), g.points);
    g.validate();
    return g;
  }
};

struct SweepSpec {
  GameScores base{0.0, 0.0, 0.0, 1.0, 0.0, 0.0};
  SweepParam param = SweepParam::AOverD;
  Grid grid;
  double beta = 0.01;
  std::size_t runs = 10000;
  std::uint64_t seed = 1;
  FixationOptions options;

  GameScores scores_at(double ratio) const {
    GameScores s = base;
    if (param == SweepParam::AOverD)
      s.a = ratio * s.d;
    else
      s.b = ratio * s.c;
    return s;
  }

  void validate() const {
    grid.validate();
    if (runs < 1) throw Error(ErrorKind::InvalidArgument, "runs must be >= 1");
    if (!(beta >= 0.0)) throw Error(ErrorKind::NegativeBeta, "selection intensity must be >= 0");
    if (param == SweepParam::AOverD && base.d == 0.0)
      throw Error(ErrorKind::InvalidArgument, "an a/d sweep needs d != 0 in the score template");
    if (param == SweepParam::BOverC && base.c == 0.0)
      throw Error(ErrorKind::InvalidArgument, "a b/c sweep needs c != 0 in the score template");
  }
};

/// Seed of grid point k; independent of how many points precede or follow it.
inline std::uint64_t point_seed(std::uint64_t seed, std::size_t k) {
  return splitmix64(seed ^ splitmix64(0x5eedULL + static_cast<std::uint64_t>(k)));
}

struct SweepRow {
  double ratio = 0.0;
  SimEstimate estimate;
  double n_rho = 0.0;
};

struct SweepResult {
  std::size_t n = 0;
  SweepParam param = SweepParam::AOverD;
  std::optional<double> threshold;  // critical ratio from theory, if finite
  Convention convention = Convention::Lineage;
  std::string graph_hash;
  std::vector<SweepRow> rows;
};

/// Critical value of the swept ratio, or empty when theory gives no finite threshold.
inline std::optional<double> sweep_threshold(const WeightedGraph& g, const CoalescenceTables& tables,
                                             SweepParam param) {
  try {
    return param == SweepParam::AOverD ? critical_ratio_ad(g, tables.pair, tables.triple).value
                                       : critical_ratio_bc(g, tables.pair, tables.triple).value;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::NoFiniteThreshold) return std::nullopt;
    throw;
  }
}

/// Monte Carlo fixation estimates over the grid. Points run in grid order; runs within a
/// point are spread over `workers`.
inline SweepResult run_sweep(const WeightedGraph& g, const SweepSpec& spec, std::optional<double> threshold,
                             Convention convention, std::size_t workers = 0) {
  spec.validate();
  SweepResult out;
  out.n = g.size();
  out.param = spec.param;
  out.threshold = threshold;
  out.convention = convention;
  out.graph_hash = g.hash_hex();
  const auto ratios = spec.grid.values();
  for (std::size_t k = 0; k < ratios.size(); ++k) {
    SweepRow row;
    row.ratio = ratios[k];
    row.estimate = estimate_fixation(g, spec.scores_at(ratios[k]), spec.beta, spec.runs, point_seed(spec.seed, k),
                                     spec.options, workers);
    row.n_rho = static_cast<double>(g.size()) * row.estimate.rho_hat;
    out.rows.push_back(row);
  }
  return out;
}

inline constexpr std::string_view kSweepCsvHeader = "ratio,rho_hat,se,n_rho,threshold";

/// CSV with header `ratio,rho_hat,se,n_rho,threshold`, one row per grid point, then a
/// comment footer naming the critical ratio. An empty threshold field means none is finite.
inline void write_sweep_csv(std::ostream& os, const SweepResult& r) {
  const std::string thr = r.threshold ? format_double(*r.threshold) : std::string{};
  os << kSweepCsvHeader << '\n';
  for (const auto& row : r.rows)
    os << format_double(row.ratio) << ',' << format_double(row.estimate.rho_hat) << ','
       << format_double(row.estimate.se) << ',' << format_double(row.n_rho) << ',' << thr << '\n';
  os << "# critical " << to_string(r.param) << " = " << (r.threshold ? thr : std::string("none"))
     << " (convention " << to_string(r.convention) << ", graph " << r.graph_hash << ", n " << r.n << ")\n";
}

inline std::string sweep_csv_text(const SweepResult& r) {
  std::ostringstream os;
  write_sweep_csv(os, r);
  return os.str();
}

}  // namespace opdyn
