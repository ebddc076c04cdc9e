#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "caplab/common.hpp"

namespace caplab {

/// Radius of the boundary along a unit direction from the star center.
using RadialFunction = std::function<double(const Vec3& omega)>;

/// rho = base + sum c_lm Y_lm with orthonormal real harmonics, coefficient
/// index l*l + l + m.
RadialFunction spherical_harmonic_graph(int l_max, std::vector<double> coeffs,
                                        double base = 0.0);

/// Axis-aligned ellipsoid with the given semi-axes.
RadialFunction ellipsoid_graph(const Vec3& semi_axes);

/// Star-shaped bounded domain: {c + r w : r < rho(w)}.
class ImplicitDomain {
 public:
  ImplicitDomain(RadialFunction rho, const Vec3& center, double bounding_radius,
                 double min_radius, int smoothness_budget);

  double radius(const Vec3& omega) const { return rho_(omega); }
  double radius(double theta, double phi) const { return rho_(direction(theta, phi)); }
  const Vec3& center() const { return center_; }
  double bounding_radius() const { return bounding_radius_; }
  double min_radius() const { return min_radius_; }
  int smoothness_budget() const { return smoothness_budget_; }

  /// |x - c| - rho(direction of x); negative exactly inside.
  double implicit(const Vec3& x) const;
  bool contains(const Vec3& x) const { return implicit(x) < 0.0; }

  /// Boundary point along direction omega.
  Vec3 boundary_point(const Vec3& omega) const { return center_ + rho_(omega) * omega; }

  /// Outward unit normal and mean curvature (sum of principal curvatures,
  /// positive on convex boundaries) at the boundary point along omega.
  Vec3 normal(const Vec3& omega) const;
  double mean_curvature(const Vec3& omega) const;

  /// Vol = (1/3) int rho^3 dw on a fine sphere rule.
  double volume() const;

  ImplicitDomain scaled(double factor) const;
  ImplicitDomain translated(const Vec3& offset) const;

 private:
  RadialFunction rho_;
  Vec3 center_;
  double bounding_radius_;
  double min_radius_;
  int smoothness_budget_;
};

/// Validates rho on a dense direction sample; throws ScenarioError on a
/// non-positive or non-finite radius.
ImplicitDomain make_star_domain(RadialFunction rho, const Vec3& center,
                                int smoothness_budget = 4);

}  // namespace caplab
