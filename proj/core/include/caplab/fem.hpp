#pragma once

#include <memory>
#include <vector>

#include "caplab/grid.hpp"
#include "caplab/pcg.hpp"

namespace caplab {

/// Continuous piecewise-(tri)linear Galerkin discretization on the grid cells.
class FemOperator {
 public:
  explicit FemOperator(std::shared_ptr<const AnnularGrid> grid);

  const AnnularGrid& grid() const { return *grid_; }
  std::size_t quad_count() const { return grid_->quad_points().size(); }

  /// grad u at every volume quadrature point (cell-major order).
  std::vector<Vec3> quad_gradients(const std::vector<double>& u) const;

  /// Stiffness matrix of -div(c grad .) with c given per quadrature point.
  void assemble(const std::vector<double>& coeff, CsrMatrix& k) const;

  /// Empty matrix with the stiffness sparsity pattern.
  const CsrMatrix& pattern() const { return pattern_; }

  /// sum_q w_q |det J_q| v_q.
  double integrate(const std::vector<double>& per_quad) const;

 private:
  std::shared_ptr<const AnnularGrid> grid_;
  CsrMatrix pattern_;
  std::vector<std::size_t> scatter_offset_;
  std::vector<int> scatter_;
};

}  // namespace caplab
