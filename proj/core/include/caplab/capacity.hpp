#pragma once

#include <array>
#include <vector>

#include "caplab/solver.hpp"

namespace caplab {

/// Far-field fit u - log|x - c| = a + b/r on one truncation radius.
struct ShellFit {
  double r_out = 0.0;
  double a = 0.0;
  double b = 0.0;
  double residual = 0.0;          // RMS of sphere means about the fit
  std::vector<double> shell_a;    // per-sphere mean of u - log r - b/r
  bool drift = false;             // shell_a monotone with a spread above tolerance
  int first_shell = 0;
  int last_shell = 0;
};

struct CapacityResult {
  double a_hat = 0.0;
  double capacity = 0.0;
  double shell_fit_residual = 0.0;
  std::array<double, 2> r_out_pair{0.0, 0.0};
  std::array<double, 2> a_pair{0.0, 0.0};
  bool low_confidence = false;
  bool truncation_dominated = false;
};

struct CapacityOptions {
  double residual_threshold = 1e-3;
  double drift_threshold = 2e-3;
};

/// Least squares over spheres at the radii of the outer third of the shells,
/// excluding the three shells nearest the truncation sphere. Needs a
/// normalized potential.
ShellFit fit_far_field(const PotentialField& potential, const CapacityOptions& opts = {});

/// Capacity from one truncation radius.
CapacityResult extract_asymptotic_constant(const PotentialField& potential,
                                           const CapacityOptions& opts = {});

/// Capacity from two truncation radii, extrapolating a linearly in 1/R_out^2.
CapacityResult combine_truncation_pair(const ShellFit& first, const ShellFit& second,
                                       const CapacityOptions& opts = {});

/// int |grad w|^3 dV at the volume quadrature points, for the unnormalized
/// potential with w = 0 inside and w = 1 outside.
double relative_capacity(const PotentialField& potential);

/// Radius of the ball with the given volume.
double isocapacitary_lower_bound(double volume);

}  // namespace caplab
