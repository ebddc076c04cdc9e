#pragma once

#include <vector>

namespace caplab {

/// Square sparse matrix in compressed row storage.
struct CsrMatrix {
  int n = 0;
  std::vector<int> row_ptr;
  std::vector<int> col;
  std::vector<double> val;

  void multiply(const std::vector<double>& x, std::vector<double>& y) const;
  double diagonal(int row) const;
};

struct PcgResult {
  int iterations = 0;
  double relative_residual = 0.0;  // ||b - Ax|| / ||b||
  bool converged = false;
};

/// Jacobi-preconditioned conjugate gradients from the initial guess in x.
/// Stops when ||b - Ax|| <= rel_tol * ||b - A x0|| or <= abs_tol * ||b||.
/// Throws SolverError when a search direction has p^T A p <= 0.
PcgResult pcg_solve(const CsrMatrix& a, const std::vector<double>& b, std::vector<double>& x,
                    double rel_tol, double abs_tol, int max_iterations);

}  // namespace caplab
