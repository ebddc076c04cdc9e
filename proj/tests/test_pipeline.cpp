#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "caplab/pipeline.hpp"

using namespace caplab;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("caplab_pipeline_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

RunConfig coarse(const std::string& scenario_json, const fs::path& out) {
  RunConfig c = parse_run_config_json(R"({"scenario":)" + scenario_json + "}", ".");
  c.resolution = {24, 10, 20};
  c.synthesis.resolution = {24, 10, 20};
  c.level_count = 12;
  c.output_dir = out.string();
  c.deterministic = true;
  return c;
}

const char* kSchwarzschild =
    R"({"label":"schwarzschild","domain":{"ball":{"radius":1}},"factor":{"schwarzschild_m":2}})";
const char* kFlatBall =
    R"({"label":"flat ball","domain":{"ball":{"radius":1}},"factor":{"constant":1}})";

}  // namespace

TEST(Pipeline, SchwarzschildCoarse) {
  const fs::path out = temp_dir("schw");
  RunConfig c = coarse(kSchwarzschild, out);
  c.dump_surfaces = true;
  const RunResult r = run_scenario(c);
  EXPECT_NEAR(r.capacity.capacity, 1.0, 0.02);
  EXPECT_NEAR(r.mass.m_adm, 2.0, 0.02);
  EXPECT_NEAR(r.mass.ratio, 1.0, 0.02);
  EXPECT_TRUE(r.verdicts.mass_capacity.pass);
  EXPECT_TRUE(r.admissibility.admissible());
  ASSERT_TRUE(r.monotonicity);
  EXPECT_TRUE(r.monotonicity->q_monotone.pass);
  EXPECT_LT(r.flux_spread, 0.02);
  EXPECT_LT(r.reference_boundary_max, 1e-12);
  for (const char* f : {"capacity.json", "verdicts.json", "series.csv", "stability.json",
                        "summary.txt", "surfaces/level_00.off"})
    EXPECT_TRUE(fs::exists(out / f)) << f;
  const std::string summary = slurp(out / "summary.txt");
  EXPECT_NE(summary.find("mass-capacity"), std::string::npos);
  EXPECT_NE(summary.find("margin"), std::string::npos);
  EXPECT_EQ(summary.find("time:"), std::string::npos);
  const std::string csv = slurp(out / "series.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,U,Q,area_euc,area_g,hawking_mass,ring_integral,flagged");
}

TEST(Pipeline, FlatBallWarnsButRuns) {
  const fs::path out = temp_dir("flat");
  const RunResult r = run_scenario(coarse(kFlatBall, out));
  EXPECT_FALSE(r.admissibility.admissible());
  EXPECT_NEAR(r.capacity.capacity, 1.0, 0.02);
  EXPECT_NEAR(r.mass.m_adm, 0.0, 1e-9);
  EXPECT_FALSE(r.verdicts.mass_capacity.pass);
  const std::string summary = slurp(out / "summary.txt");
  EXPECT_NE(summary.find("NOT admissible"), std::string::npos);
  EXPECT_NE(summary.find("warning"), std::string::npos);
}

TEST(Pipeline, DeterministicOutputsAreIdentical) {
  const fs::path a = temp_dir("det_a"), b = temp_dir("det_b");
  run_scenario(coarse(kSchwarzschild, a));
  run_scenario(coarse(kSchwarzschild, b));
  for (const char* f : {"capacity.json", "verdicts.json", "series.csv", "stability.json",
                        "summary.txt"})
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
}

TEST(Pipeline, MissingScenarioFile) {
  EXPECT_THROW(load_run_config("/nonexistent/run.json"), ScenarioError);
  RunConfig c;
  c.scenario_path = "/nonexistent/scenario.json";
  EXPECT_THROW(run_scenario(c), ScenarioError);
}

TEST(Pipeline, PlotData) {
  const fs::path out = temp_dir("plots");
  run_scenario(coarse(kSchwarzschild, out));
  emit_plot_data(out.string());
  const std::string u = slurp(out / "plot_U.csv");
  EXPECT_EQ(u.substr(0, u.find('\n')), "t,U,U_model,deviation_over_8pi,flagged");
  std::istringstream in(u);
  std::string line;
  std::getline(in, line);
  int rows = 0;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> v;
    for (int k = 0; k < 4 && std::getline(ss, cell, ','); ++k) v.push_back(std::stod(cell));
    EXPECT_LT(std::abs(v[3]), 0.03) << line;
    ++rows;
  }
  EXPECT_GE(rows, 10);
  EXPECT_TRUE(fs::exists(out / "plot_Q.csv"));
  EXPECT_TRUE(fs::exists(out / "plot_trend.csv"));
  EXPECT_THROW(emit_plot_data((out / "nothing").string()), ScenarioError);
}

TEST(Ledger, EmptyAndPopulated) {
  const fs::path dir = temp_dir("ledger");
  fs::create_directories(dir);
  const LedgerSummary empty = write_ledger({}, (dir / "empty.csv").string());
  EXPECT_EQ(empty.records, 0);
  EXPECT_FALSE(empty.fitted_constant);
  EXPECT_EQ(slurp(dir / "empty.csv"), "label,eta,alpha,alpha_over_sqrt_eta\n");

  std::vector<std::string> runs;
  const double eta[3] = {0.01, 0.04, 0.09}, alpha[3] = {0.1, 0.2, 0.3};
  for (int i = 0; i < 3; ++i) {
    const fs::path r = dir / ("run" + std::to_string(i));
    fs::create_directories(r);
    std::ofstream(r / "stability.json") << "{\"label\":\"e" << i << "\",\"eta\":" << eta[i]
                                        << ",\"alpha\":" << alpha[i] << "}";
    runs.push_back(r.string());
  }
  const LedgerSummary s = write_ledger(runs, (dir / "eta_alpha.csv").string());
  EXPECT_EQ(s.records, 3);
  ASSERT_TRUE(s.fitted_constant);
  EXPECT_NEAR(*s.fitted_constant, 1.0, 1e-12);
  EXPECT_NEAR(*s.max_ratio, 1.0, 1e-12);
}

TEST(Convergence, RejectsSingleLevel) {
  RunConfig c = coarse(kSchwarzschild, temp_dir("conv1"));
  EXPECT_THROW(convergence_study(c, 1), std::invalid_argument);
}

TEST(Convergence, BallCapacityImproves) {
  const fs::path out = temp_dir("conv");
  RunConfig c = coarse(kFlatBall, out);
  c.resolution = {33, 12, 24};
  const auto rows = convergence_study(c, 2);
  ASSERT_EQ(rows.size(), 2u);
  ASSERT_TRUE(rows[0].capacity_error && rows[1].capacity_error);
  EXPECT_LT(*rows[1].capacity_error, *rows[0].capacity_error);
  ASSERT_TRUE(rows[1].capacity_order);
  EXPECT_GE(*rows[1].capacity_order, 1.0);
  EXPECT_TRUE(fs::exists(out / "convergence.csv"));
  EXPECT_TRUE(fs::exists(out / "level_0" / "summary.txt"));
}
