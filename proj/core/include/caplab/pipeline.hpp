#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "caplab/capacity.hpp"
#include "caplab/config.hpp"
#include "caplab/fraenkel.hpp"
#include "caplab/mass.hpp"
#include "caplab/monotone.hpp"
#include "caplab/scenario.hpp"

namespace caplab {

struct RunResult {
  std::string label;
  std::array<double, 2> r_out{0.0, 0.0};
  std::array<ShellFit, 2> fits;
  CapacityResult capacity;
  double flux_spread = 0.0;  // larger-R run, normalized
  std::vector<FluxSample> flux_table;
  int picard_iterations = 0;
  int linear_iterations = 0;
  AdmissibilityReport admissibility;
  MonotoneSeries series;
  std::optional<MonotonicityReport> monotonicity;
  std::string monotonicity_error;
  AdmMass adm;
  FraenkelResult fraenkel;
  MassReport mass;
  TheoremVerdicts verdicts;
  StabilityExcess excess;
  double s_max = 0.0;
  std::optional<AnalyticReference> reference;
  double reference_boundary_max = 0.0;   // max |u_ref| at random boundary points
  double reference_potential_error = 0.0;  // max |u - u_ref| over nodes
  std::vector<std::string> warnings;
  double seconds = 0.0;
};

/// Full pipeline for one scenario. Writes capacity.json, verdicts.json,
/// series.csv, stability.json and summary.txt to the output directory (plus
/// surfaces/*.off when requested). Verdict failures are results, not errors;
/// SolverError and ScenarioError propagate.
RunResult run_scenario(const RunConfig& config);

struct ConvergenceRow {
  int level = 0;
  GridResolution resolution;
  std::size_t nodes = 0;
  double capacity = 0.0;
  std::optional<double> capacity_error;
  std::optional<double> capacity_order;
  double m_adm = 0.0;
  double max_q_violation = 0.0;  // largest decrease of Q between samples
  double q_deviation = 0.0;      // max |Q - 16 pi|
  std::optional<double> q_order;
};

/// Runs the pipeline at `levels` resolutions ending at the configured one,
/// each coarser level halving every grid dimension. Writes convergence.csv.
/// Rejects fewer than two levels.
std::vector<ConvergenceRow> convergence_study(const RunConfig& config, int levels);

/// Reads series.csv and verdicts.json from a run directory and writes
/// plot_U.csv, plot_Q.csv and plot_trend.csv next to them.
void emit_plot_data(const std::string& run_dir);

struct LedgerSummary {
  int records = 0;
  std::optional<double> fitted_constant;  // least squares alpha = C sqrt(eta)
  std::optional<double> max_ratio;        // max alpha / sqrt(eta)
};

/// Collects stability.json from run directories into eta_alpha.csv.
LedgerSummary write_ledger(const std::vector<std::string>& run_dirs, const std::string& out_path);

}  // namespace caplab
