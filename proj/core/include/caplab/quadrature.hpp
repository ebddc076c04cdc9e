#pragma once

#include <vector>

#include "caplab/common.hpp"

namespace caplab {

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;  // sum to 2
};

GaussRule gauss_legendre(int n);

/// Product rule on the unit sphere: Gauss-Legendre in cos(theta), uniform in
/// phi. Weights sum to 4*pi and integrate spherical harmonics up to degree
/// min(2*n_theta - 1, n_phi - 1) exactly.
struct SphereRule {
  std::vector<Vec3> directions;
  std::vector<double> weights;
};

SphereRule sphere_rule(int n_theta, int n_phi);

/// Orthonormal real spherical harmonics Y_lm for 0 <= l <= l_max, stored at
/// index l*l + l + m. No Condon-Shortley phase; m < 0 carries sin(|m| phi).
std::vector<double> real_spherical_harmonics(int l_max, double theta, double phi);

inline int sh_index(int l, int m) { return l * l + l + m; }

}  // namespace caplab
