#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "caplab/domain.hpp"
#include "caplab/factor.hpp"
#include "caplab/grid.hpp"

namespace caplab {

/// Closed-form data for oracle scenarios.
struct AnalyticReference {
  std::function<double(const Vec3&)> potential;  // normalized u, zero on the boundary
  double capacity = 0.0;
  std::optional<double> m_adm;
};

struct MetricScenario {
  ImplicitDomain domain;
  FactorPtr factor;
  std::string label;
  std::optional<AnalyticReference> reference;
};

/// B_R(center) with f = 1.
MetricScenario make_ball(double radius, const Vec3& center = Vec3::Zero());

/// B_{m/2} with f = 1 + m/(2r).
MetricScenario make_schwarzschild(double m, const Vec3& center = Vec3::Zero());

struct SynthesisOptions {
  GridResolution resolution{48, 18, 36};
  double linear_tol = 1e-11;
  int max_linear = 20000;
};

/// Harmonic f on the truncated exterior with f_nu + (H/4) f = 0 on the
/// boundary (which makes it g-minimal) and the monopole condition
/// f + R f_r = 1 on |x - c| = R_out. Beyond R_out the factor continues as
/// 1 + beta/r. Throws ScenarioError if H <= 0 somewhere on the boundary or
/// min f <= 0, SolverError if the linear solve stagnates.
FactorPtr synthesize_minimal_boundary_factor(const ImplicitDomain& domain, double r_out,
                                             const SynthesisOptions& opts = {});

struct DecayShell {
  double radius = 0.0;
  double c0 = 0.0;  // max |f - 1| r
  double c1 = 0.0;  // max |grad f| r^2
  double c2 = 0.0;  // max |hess f| r^3
};

struct AdmissibilityReport {
  double min_f = 0.0;
  double max_laplacian = 0.0;
  double laplacian_tol = 0.0;
  std::vector<DecayShell> decay;
  double max_abs_h_g = 0.0;     // on the boundary
  double boundary_h_scale = 0.0;  // max H / f^2 on the boundary
  bool positive = false;
  bool scalar_curvature_ok = false;
  bool decay_ok = false;
  bool minimal_ok = false;
  std::vector<std::string> warnings;

  bool admissible() const { return positive && scalar_curvature_ok && decay_ok && minimal_ok; }
};

struct AdmissibilityOptions {
  double laplacian_rel_tol = 0.02;  // relative to the largest sampled |hess f|
  double minimal_rel_tol = 0.02;    // max |H_g| relative to max H / f^2
  double decay_growth = 2.0;        // allowed growth of the decay constants outwards
};

/// Samples the factor around the domain; never throws on a failed check.
AdmissibilityReport check_admissibility(const MetricScenario& scenario,
                                        const AdmissibilityOptions& opts = {});

}  // namespace caplab
