#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "caplab/config.hpp"

using namespace caplab;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("caplab_config_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

}  // namespace

TEST(ScenarioJson, Ball) {
  const ScenarioSpec s =
      parse_scenario_json(R"({"label":"b","domain":{"ball":{"radius":2}},"factor":{"constant":1.0}})");
  EXPECT_EQ(s.label, "b");
  EXPECT_EQ(s.domain, DomainKind::Ball);
  EXPECT_DOUBLE_EQ(s.radius, 2.0);
  EXPECT_EQ(s.factor, FactorKind::Constant);
  const MetricScenario sc = build_scenario(s, 64.0);
  ASSERT_TRUE(sc.reference);
  EXPECT_DOUBLE_EQ(sc.reference->capacity, 2.0);
  EXPECT_EQ(*sc.reference->m_adm, 0.0);
}

TEST(ScenarioJson, StarAndCenter) {
  const ScenarioSpec s = parse_scenario_json(
      R"({"domain":{"star":{"l_max":2,"coeffs":[3.5449077018,0,0,0,0,0,0.2,0,0]}},
          "center":[1,0,0],"factor":{"schwarzschild_m":2}})");
  EXPECT_EQ(s.domain, DomainKind::Star);
  EXPECT_EQ(s.l_max, 2);
  ASSERT_EQ(s.coeffs.size(), 9u);
  EXPECT_EQ(s.factor, FactorKind::Schwarzschild);
  const ImplicitDomain d = build_domain(s);
  EXPECT_DOUBLE_EQ(d.center().x(), 1.0);
  // c_00 = sqrt(4 pi) is the unit sphere
  EXPECT_NEAR(d.radius(Vec3(1, 0, 0)), 1.0 - 0.1 * std::sqrt(5.0 / (4.0 * kPi)), 1e-9);
}

TEST(ScenarioJson, EllipsoidSynthesizedAndScaled) {
  const ScenarioSpec s = parse_scenario_json(
      R"({"domain":{"ellipsoid":{"semi_axes":[1.2,1,1]}},"factor":{"synthesize_minimal":true}})");
  EXPECT_EQ(s.domain, DomainKind::Ellipsoid);
  EXPECT_EQ(s.factor, FactorKind::Synthesize);
  const ScenarioSpec b = parse_scenario_json(
      R"({"domain":{"ball":{"radius":1}},"factor":{"schwarzschild_m":2,"scale":1.01}})");
  const MetricScenario sc = build_scenario(b, 64.0);
  EXPECT_NEAR(sc.factor->value(Vec3(1, 0, 0)), 2.02, 1e-12);
  EXPECT_FALSE(sc.reference->m_adm);
}

TEST(ScenarioJson, Errors) {
  EXPECT_THROW(parse_scenario_json("{"), ScenarioError);
  EXPECT_THROW(parse_scenario_json("[]"), ScenarioError);
  EXPECT_THROW(parse_scenario_json(R"({"factor":{"constant":1}})"), ScenarioError);
  EXPECT_THROW(parse_scenario_json(R"({"domain":{"ball":{"radius":-1}},"factor":{"constant":1}})"),
               ScenarioError);
  EXPECT_THROW(parse_scenario_json(R"({"domain":{"torus":{}},"factor":{"constant":1}})"),
               ScenarioError);
  EXPECT_THROW(parse_scenario_json(R"({"domain":{"ball":{"radius":1}},"factor":{"magic":1}})"),
               ScenarioError);
  EXPECT_THROW(
      parse_scenario_json(R"({"domain":{"ball":{"radius":1}},"factor":{"synthesize_minimal":false}})"),
      ScenarioError);
  EXPECT_THROW(
      parse_scenario_json(R"({"domain":{"star":{"l_max":1,"coeffs":["x"]}},"factor":{"constant":1}})"),
      ScenarioError);
  EXPECT_THROW(load_scenario("/nonexistent/scenario.json"), ScenarioError);
}

TEST(RunConfigJson, ResolvesRelativePaths) {
  const fs::path dir = temp_dir("paths");
  write(dir / "ball.json", R"({"domain":{"ball":{"radius":1}},"factor":{"constant":1}})");
  write(dir / "run.json", R"({
    "scenario": "ball.json",
    "grid": {"r_out": [16, 32], "resolution": [24, 10, 20]},
    "synthesis": {"resolution": [24, 10, 20]},
    "solver": {"picard_tol": 1e-7, "max_picard": 50, "damping": 0.8, "linear_tol_factor": 0.05,
               "epsilon_schedule": [0.5, 0.1, 0.01]},
    "levels": {"count": 10, "t_min": 0.1, "max_fraction": 0.8, "flux_levels": 10},
    "outputs": "out",
    "deterministic": true,
    "seed": 42
  })");
  const RunConfig c = load_run_config((dir / "run.json").string());
  EXPECT_EQ(fs::path(c.scenario_path), dir / "ball.json");
  EXPECT_EQ(fs::path(c.output_dir), dir / "out");
  EXPECT_DOUBLE_EQ(c.r_out_factors[0], 16.0);
  EXPECT_EQ(c.resolution.ns, 24);
  EXPECT_EQ(c.synthesis.resolution.nphi, 20);
  EXPECT_DOUBLE_EQ(c.solver.picard_tol, 1e-7);
  EXPECT_EQ(c.solver.max_picard, 50);
  EXPECT_EQ(c.solver.epsilon_schedule.size(), 3u);
  EXPECT_EQ(c.level_count, 10);
  EXPECT_EQ(c.flux_levels, 10);
  EXPECT_TRUE(c.deterministic);
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(resolve_scenario(c).domain, DomainKind::Ball);
}

TEST(RunConfigJson, InlineScenarioAndDefaults) {
  const RunConfig c = parse_run_config_json(
      R"({"scenario":{"domain":{"ball":{"radius":1}},"factor":{"schwarzschild_m":2}}})", "/tmp");
  ASSERT_TRUE(c.scenario);
  EXPECT_TRUE(c.scenario_path.empty());
  EXPECT_EQ(c.resolution.ns, 64);
  EXPECT_EQ(c.resolution.ntheta, 24);
  EXPECT_EQ(c.resolution.nphi, 48);
  EXPECT_DOUBLE_EQ(c.r_out_factors[0], 32.0);
  EXPECT_DOUBLE_EQ(c.r_out_factors[1], 64.0);
  EXPECT_EQ(c.level_count, 24);
  EXPECT_FALSE(c.deterministic);
}

TEST(RunConfigJson, Errors) {
  const std::string ball = R"("scenario":{"domain":{"ball":{"radius":1}},"factor":{"constant":1}})";
  EXPECT_THROW(parse_run_config_json("{}"), ScenarioError);
  EXPECT_THROW(parse_run_config_json(R"({"scenario":"missing.json"})", "/nonexistent"),
               ScenarioError);
  EXPECT_THROW(parse_run_config_json("{" + ball + R"(,"grid":{"r_out":[32,32]}})"), ScenarioError);
  EXPECT_THROW(parse_run_config_json("{" + ball + R"(,"grid":{"resolution":[24,10,21]}})"),
               ScenarioError);
  EXPECT_THROW(parse_run_config_json("{" + ball + R"(,"solver":{"damping":1.5}})"), ScenarioError);
  EXPECT_THROW(parse_run_config_json("{" + ball + R"(,"solver":{"epsilon_schedule":[0.1,0.2]}})"),
               ScenarioError);
  EXPECT_THROW(parse_run_config_json("{" + ball + R"(,"levels":{"max_fraction":1.2}})"),
               ScenarioError);
  EXPECT_THROW(load_run_config("/nonexistent/run.json"), ScenarioError);
}
