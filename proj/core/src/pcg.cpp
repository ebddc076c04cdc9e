#include "caplab/pcg.hpp"

#include <cmath>
#include <sstream>

#include "caplab/common.hpp"
#include "caplab/parallel.hpp"

namespace caplab {

void CsrMatrix::multiply(const std::vector<double>& x, std::vector<double>& y) const {
  y.resize(static_cast<std::size_t>(n));
  parallel_chunks(static_cast<std::size_t>(n), [&](std::size_t b, std::size_t e) {
    for (std::size_t r = b; r < e; ++r) {
      double acc = 0.0;
      for (int p = row_ptr[r]; p < row_ptr[r + 1]; ++p) acc += val[p] * x[col[p]];
      y[r] = acc;
    }
  });
}

double CsrMatrix::diagonal(int row) const {
  for (int p = row_ptr[row]; p < row_ptr[row + 1]; ++p)
    if (col[p] == row) return val[p];
  return 0.0;
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  return parallel_sum(a.size(), [&](std::size_t i) { return a[i] * b[i]; });
}

}  // namespace

PcgResult pcg_solve(const CsrMatrix& a, const std::vector<double>& b, std::vector<double>& x,
                    double rel_tol, double abs_tol, int max_iterations) {
  const std::size_t n = static_cast<std::size_t>(a.n);
  require(b.size() == n && x.size() == n, "pcg_solve: size mismatch");
  std::vector<double> inv_diag(n), r(n), z(n), p(n), ap(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a.diagonal(static_cast<int>(i));
    if (!(d > 0.0)) {
      std::ostringstream msg;
      msg << "linear system is not positive definite: diagonal entry " << d << " at row " << i;
      throw SolverError(msg.str());
    }
    inv_diag[i] = 1.0 / d;
  }
  a.multiply(x, ap);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
  const double bnorm = std::sqrt(dot(b, b));
  const double r0 = std::sqrt(dot(r, r));
  PcgResult res;
  const double target = std::max(rel_tol * r0, abs_tol * bnorm);
  const double scale = bnorm > 0.0 ? bnorm : 1.0;
  if (r0 <= target || r0 == 0.0) {
    res.relative_residual = r0 / scale;
    res.converged = true;
    return res;
  }
  for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  p = z;
  double rz = dot(r, z);
  double rnorm = r0;
  for (int it = 1; it <= max_iterations; ++it) {
    a.multiply(p, ap);
    const double pap = dot(p, ap);
    if (!(pap > 0.0)) {
      std::ostringstream msg;
      msg << "linear system is indefinite: p^T A p = " << pap << " at iteration " << it;
      throw SolverError(msg.str());
    }
    const double alpha = rz / pap;
    parallel_chunks(n, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i) {
        x[i] += alpha * p[i];
        r[i] -= alpha * ap[i];
        z[i] = inv_diag[i] * r[i];
      }
    });
    rnorm = std::sqrt(dot(r, r));
    res.iterations = it;
    if (rnorm <= target) {
      res.converged = true;
      break;
    }
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    parallel_chunks(n, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i) p[i] = z[i] + beta * p[i];
    });
  }
  res.relative_residual = rnorm / scale;
  return res;
}

}  // namespace caplab
