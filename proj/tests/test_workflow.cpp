#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "opdyn/opdyn.hpp"
#include "test_support.hpp"

using namespace opdyn;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected opdyn::Error";
  return ErrorKind::Io;
}

}  // namespace

TEST(Grid, LinearAndLog) {
  auto lin = Grid::parse("1:3:5", false).values();
  ASSERT_EQ(lin.size(), 5u);
  EXPECT_EQ(lin.front(), 1.0);
  EXPECT_DOUBLE_EQ(lin[1], 1.5);
  EXPECT_EQ(lin.back(), 3.0);
  auto lg = Grid::parse("0.5:8:5", true).values();
  EXPECT_DOUBLE_EQ(lg[1], 1.0);
  EXPECT_DOUBLE_EQ(lg[2], 2.0);
  EXPECT_EQ(lg.back(), 8.0);
  EXPECT_EQ(Grid::parse("2:2:1", false).values(), std::vector<double>{2.0});
}

TEST(Grid, Invalid) {
  EXPECT_EQ(kind_of([] { Grid::parse("1:3", false); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([] { Grid::parse("0:3:4", false); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([] { Grid::parse("3:1:4", false); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([] { Grid::parse("1:3:0", false); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([] { Grid::parse("1:x:4", false); }), ErrorKind::InvalidArgument);
}

TEST(SweepSpec, ScoreTemplate) {
  SweepSpec spec;
  spec.base = {0, 0, 0, 2.0, 0.1, 0.1};
  auto s = spec.scores_at(3.0);
  EXPECT_EQ(s.a, 6.0);
  EXPECT_EQ(s.d, 2.0);
  spec.param = SweepParam::BOverC;
  spec.base = {0, 0, -1.5, 0, 0, 0};
  EXPECT_EQ(spec.scores_at(2.0).b, -3.0);
  spec.grid = Grid::parse("1:2:2", false);
  spec.runs = 0;
  EXPECT_EQ(kind_of([&] { spec.validate(); }), ErrorKind::InvalidArgument);
}

TEST(Sweep, NeutralSweepStaysAtOne) {
  auto g = complete_graph(8);
  SweepSpec spec;
  spec.grid = Grid::parse("0.5:4:3", true);
  spec.beta = 0.0;
  spec.runs = 8000;
  auto r = run_sweep(g, spec, 2.0, Convention::Lineage);
  for (const auto& row : r.rows) EXPECT_LE(std::abs(row.n_rho - 1.0), 3.0 * 8.0 * row.estimate.se);
}

TEST(Sweep, CsvDeterministicAcrossWorkers) {
  auto g = newman_watts(12, 4, 0.4, 3);
  SweepSpec spec;
  spec.grid = Grid::parse("1:4:3", false);
  spec.runs = 300;
  spec.seed = 42;
  const auto a = sweep_csv_text(run_sweep(g, spec, 2.5, Convention::Lineage, 1));
  const auto b = sweep_csv_text(run_sweep(g, spec, 2.5, Convention::Lineage, 6));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.substr(0, a.find('\n')), "ratio,rho_hat,se,n_rho,threshold");
  EXPECT_NE(a.find("# critical a/d = 2.5"), std::string::npos);
}

TEST(Sweep, PointSeedsIndependentOfGridLength) {
  auto g = complete_graph(6);
  SweepSpec shortspec;
  shortspec.grid = Grid::parse("1:2:2", false);
  shortspec.runs = 200;
  SweepSpec longspec = shortspec;
  longspec.grid = Grid::parse("1:3:3", false);
  auto a = run_sweep(g, shortspec, std::nullopt, Convention::Lineage);
  auto b = run_sweep(g, longspec, std::nullopt, Convention::Lineage);
  EXPECT_EQ(a.rows[0].estimate, b.rows[0].estimate);
  EXPECT_EQ(a.rows[1].estimate, b.rows[1].estimate);
  EXPECT_NE(sweep_csv_text(a).find(",\n"), std::string::npos);  // empty threshold field
}

TEST(Sweep, ThresholdHelper) {
  auto g = complete_graph(10);
  auto t = solve_tables(g, Convention::Lineage);
  auto ad = sweep_threshold(g, t, SweepParam::AOverD);
  ASSERT_TRUE(ad);
  EXPECT_NEAR(*ad, 2.0, 1e-9);
}

TEST(Arbitration, TwoVertexDeltaBothAgree) {
  std::vector<LabeledGraph> graphs{{"K2", complete_graph(2)}};
  std::vector<LabeledScores> scores{{"delta", {0, 0, 0, 0, 1.0, 0.0}}};
  auto r = arbitrate(graphs, scores);
  ASSERT_EQ(r.instances.size(), 1u);
  EXPECT_NEAR(r.instances[0].slope, 0.25, 1e-7);
  EXPECT_TRUE(r.instances[0].literal_matches);
  EXPECT_TRUE(r.instances[0].lineage_matches);
  EXPECT_FALSE(r.winner);
  EXPECT_EQ(kind_of([&] { write_convention_config("/tmp/never_written.json", r); }), ErrorKind::Undecided);
}

TEST(Arbitration, IrregularGraphsSelectLineage) {
  std::vector<LabeledGraph> graphs{{"star5", star_graph(5)}, {"path4", path_graph(4)}};
  std::vector<LabeledScores> scores{{"caseII", {1, 0, 0, 1, 0, 0}}, {"generic", {1.2, -0.5, -0.3, 0.7, 0.1, 0}}};
  auto r = arbitrate(graphs, scores);
  ASSERT_TRUE(r.winner);
  EXPECT_EQ(*r.winner, Convention::Lineage);
  EXPECT_EQ(r.lineage_matches, 4u);
  auto j = to_json(r);
  EXPECT_EQ(j["winner"], "lineage");
  EXPECT_EQ(j["instances"].size(), 4u);

  const auto path = (std::filesystem::temp_directory_path() / "opdyn_conv_test.json").string();
  write_convention_config(path, r);
  EXPECT_EQ(read_convention_config(path), Convention::Lineage);
  std::filesystem::remove(path);
  EXPECT_EQ(read_convention_config(path), kFallbackConvention);
}

TEST(Arbitration, Validation) {
  std::vector<LabeledScores> scores{{"s", {1, 0, 0, 1, 0, 0}}};
  EXPECT_EQ(kind_of([&] { arbitrate({}, scores); }), ErrorKind::InvalidArgument);
  std::vector<LabeledGraph> big{{"K15", complete_graph(15)}};
  EXPECT_EQ(kind_of([&] { arbitrate(big, scores); }), ErrorKind::TooLarge);
}

TEST(Arbitration, MalformedConfig) {
  const auto path = (std::filesystem::temp_directory_path() / "opdyn_bad_conv.json").string();
  std::ofstream(path) << "{\"convention\": 3}";
  EXPECT_EQ(kind_of([&] { read_convention_config(path); }), ErrorKind::Parse);
  std::ofstream(path) << "{\"convention\": \"other\"}";
  EXPECT_THROW(read_convention_config(path), Error);
  std::filesystem::remove(path);
}

TEST(Report, TheoryJson) {
  auto g = complete_graph(2);
  auto t = solve_tables(g, Convention::Lineage);
  auto rep = convention_report(g, {0, 0, 0, 0, 1.0, 0.0}, t);
  auto j = to_json(rep, 0.01);
  EXPECT_EQ(j["convention"], "lineage");
  EXPECT_NEAR(j["dprime"].get<double>(), 0.25, 1e-12);
  EXPECT_EQ(j["favored"], true);
  EXPECT_NEAR(j["rho_at_beta"]["rho"].get<double>(), 0.5 + 0.0025, 1e-12);
  EXPECT_TRUE(j.contains("terms"));
}
