#pragma once

#include <memory>
#include <vector>

#include "caplab/fem.hpp"
#include "caplab/fields.hpp"

namespace caplab {

struct SolverConfig {
  /// Explicit continuation values; empty selects the automatic schedule
  /// eps_0 = max|grad u_0|, times stage_factor per stage, ending at
  /// terminal_factor * min|grad u_0|.
  std::vector<double> epsilon_schedule;
  double picard_tol = 1e-8;
  int max_picard = 200;
  double damping = 0.7;
  double linear_tol_factor = 0.1;
  int max_linear = 20000;
  double stage_factor = 0.25;
  double terminal_factor = 1e-3;
  double stage_tol = 1e-3;  // residual target of non-terminal stages

  void validate() const;
};

struct FluxSample {
  double t = 0.0;
  double flux = 0.0;              // int |grad u|^2 da
  double regularized_flux = 0.0;  // int sqrt(|grad u|^2 + eps^2) |grad u| da
};

/// Discrete potential on a grid, with solver metadata.
struct PotentialField {
  std::shared_ptr<const AnnularGrid> grid;
  std::shared_ptr<const NodalDerivatives> field;
  double outer_value = 0.0;
  double epsilon = 0.0;
  double normalization = 1.0;
  double residual_norm = 0.0;
  int iterations = 0;
  int linear_iterations = 0;
  bool converged = false;
  std::vector<double> epsilon_stages;
  std::vector<double> residual_history;
  std::vector<double> energy_history;
  std::vector<FluxSample> flux_table;

  const std::vector<double>& values() const { return field->values(); }
  double max_value() const;
};

/// Picard iteration with epsilon-continuation for
/// div(sqrt(|grad u|^2 + eps^2) grad u) = 0, u = 0 inside, u = V outside.
/// Throws SolverError if the terminal stage does not reach picard_tol.
PotentialField solve_annulus(std::shared_ptr<const AnnularGrid> grid, double outer_value,
                             const SolverConfig& config);

/// Relative nonlinear residual ||(K(u) u)_free|| / ||K_fd u_d||.
double picard_residual(const FemOperator& fem, const std::vector<double>& u, double eps);

/// (1/3) int (|grad u|^2 + eps^2)^(3/2) dV.
double regularized_energy(const FemOperator& fem, const std::vector<double>& u, double eps);

/// Wraps nodal values into a potential (no solve); used for closed-form fields.
PotentialField potential_from_values(std::shared_ptr<const AnnularGrid> grid,
                                     std::vector<double> values, double epsilon = 0.0);

/// int sqrt(|grad u|^2 + eps^2) |grad u| da over {u = t}, with eps the
/// potential's own epsilon. Throws GeometryError for levels touching the
/// outer boundary.
double regularized_flux(const PotentialField& potential, double t);

/// Fills flux_table at `count` levels spread over [lo, hi] * outer_value,
/// skipping levels that reach the last cell layer.
void compute_flux_table(PotentialField& potential, int count = 12, double lo = 0.05,
                        double hi = 0.85);

/// Scales by lambda = sqrt(4 pi / median flux) (epsilon scales with it).
PotentialField normalize_to_log_growth(const PotentialField& potential);

/// Relative spread (max - min) / mean of the flux table.
double flux_spread(const PotentialField& potential);

}  // namespace caplab
