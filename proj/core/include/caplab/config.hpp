#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "caplab/grid.hpp"
#include "caplab/monotone.hpp"
#include "caplab/scenario.hpp"
#include "caplab/solver.hpp"

namespace caplab {

enum class DomainKind { Ball, Star, Ellipsoid };
enum class FactorKind { Constant, Schwarzschild, Synthesize };

/// Parsed scenario file; build_scenario turns it into a MetricScenario.
struct ScenarioSpec {
  std::string label;
  DomainKind domain = DomainKind::Ball;
  double radius = 1.0;              // ball
  int l_max = 0;                    // star
  std::vector<double> coeffs;       // star
  double base_radius = 0.0;         // star
  Vec3 semi_axes = Vec3::Ones();    // ellipsoid
  Vec3 center = Vec3::Zero();
  FactorKind factor = FactorKind::Constant;
  double factor_value = 1.0;        // constant value or Schwarzschild mass
  double factor_scale = 1.0;        // multiplies the factor (breaks f -> 1 if != 1)
};

/// Throws ScenarioError on malformed input.
ScenarioSpec parse_scenario_json(const std::string& text);
ScenarioSpec load_scenario(const std::string& path);

/// Domain of a scenario without building the factor.
ImplicitDomain build_domain(const ScenarioSpec& spec);

/// r_out is where a synthesized factor is truncated.
MetricScenario build_scenario(const ScenarioSpec& spec, double r_out,
                              const SynthesisOptions& synthesis = {});

struct RunConfig {
  std::string config_dir;       // base for relative paths
  std::string scenario_path;    // empty when the scenario is inline
  std::optional<ScenarioSpec> scenario;
  std::array<double, 2> r_out_factors{32.0, 64.0};  // multiples of the bounding radius
  GridResolution resolution{};
  SynthesisOptions synthesis{};
  SolverConfig solver{};
  int flux_levels = 12;
  int level_count = 24;
  double t_min = 0.05;
  double max_fraction = 0.85;
  std::string output_dir = "out";
  std::uint64_t seed = 0;
  bool deterministic = false;
  bool dump_surfaces = false;
};

/// Throws ScenarioError on malformed input or unresolvable paths.
RunConfig parse_run_config_json(const std::string& text, const std::string& config_dir = ".");
RunConfig load_run_config(const std::string& path);

/// Scenario of a run config (inline or loaded from scenario_path).
ScenarioSpec resolve_scenario(const RunConfig& config);

}  // namespace caplab
