#pragma once

#include <optional>
#include <string>
#include <vector>

#include "caplab/factor.hpp"

namespace caplab {

struct AdmOptions {
  int spheres = 5;
  int n_theta = 16;
  int n_phi = 32;
  double spread_tol = 0.01;  // relative residual of the 1/r fit
};

struct AdmMass {
  double m_flux = 0.0;   // -(1/2pi) int f_nu da, extrapolated in 1/r
  double m_coord = 0.0;  // (1/16pi) int (g_ij,i - g_ii,j) nu^j da, quadratic in 1/r
  std::vector<double> radii;
  std::vector<double> flux_masses;
  std::vector<double> coord_masses;
  double fit_residual = 0.0;
  bool low_confidence = false;
};

/// Sphere radii r_max/16 .. r_max/2 (geometric) about center.
AdmMass adm_mass_flux(const ConformalFactor& factor, const Vec3& center, double r_max,
                      const AdmOptions& opts = {});

struct MassReport {
  double m_adm = 0.0;
  double m_adm_coord = 0.0;
  double capacity = 0.0;
  double ratio = 0.0;          // m / 2c
  double vol = 0.0;
  double iso_radius = 0.0;     // (3 vol / 4 pi)^(1/3)
  double penrose_ratio = 0.0;  // m / 2 iso_radius
  double eta = 0.0;
  double alpha = 0.0;
};

MassReport make_mass_report(double m_adm, double m_adm_coord, double capacity, double vol,
                            double alpha);

struct TheoremVerdict {
  std::string name;
  bool pass = false;
  double margin = 0.0;  // lhs / rhs - (1 - tol)
};

struct TheoremVerdicts {
  TheoremVerdict mass_capacity;       // m >= 2c
  TheoremVerdict volumetric_penrose;  // m >= 2 (3 vol / 4pi)^(1/3)
  bool strict = false;                // both ratios above 1
  std::optional<double> alpha_over_sqrt_eta;
};

TheoremVerdicts theorem_verdicts(const MassReport& report, double tol = 0.02);

}  // namespace caplab
