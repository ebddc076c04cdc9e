#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "caplab/grid.hpp"

namespace caplab {

struct FieldSample {
  double value;
  Vec3 grad;
  Mat3 hess;
};

/// Nodal values plus finite-difference chart derivatives. Sampling inside a
/// hex interpolates the chart derivatives and applies the exact map
/// derivatives at the sample point; inside a polar prism it interpolates
/// Cartesian nodal derivatives.
class NodalDerivatives {
 public:
  NodalDerivatives(std::shared_ptr<const AnnularGrid> grid, std::vector<double> values);

  const AnnularGrid& grid() const { return *grid_; }
  const std::shared_ptr<const AnnularGrid>& grid_ptr() const { return grid_; }
  const std::vector<double>& values() const { return values_; }

  /// Cartesian gradient at a node.
  const Vec3& gradient(int n) const { return grad_[n]; }

  FieldSample sample(int cell, const Vec3& ref) const;
  std::optional<FieldSample> sample_at(const Vec3& x) const;
  double value(int cell, const Vec3& ref) const;

 private:
  const Mat3& polar_hessian(int n) const;

  std::shared_ptr<const AnnularGrid> grid_;
  std::vector<double> values_;
  std::vector<Vec3> d_;
  std::vector<Mat3> d2_;
  std::vector<Vec3> grad_;
  // Cartesian Hessians of pole nodes and the rings next to them, indexed by
  // polar_index().
  std::vector<Mat3> polar_hess_;
  int polar_index(int n) const;
};

}  // namespace caplab
