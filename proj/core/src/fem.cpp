#include "caplab/fem.hpp"

#include <algorithm>
#include <array>

#include "caplab/parallel.hpp"

namespace caplab {

namespace {

struct RefTable {
  int nodes = 0;
  std::vector<std::array<Vec3, 8>> grads;  // per quadrature point
};

const RefTable& ref_table(CellKind kind) {
  static const std::array<RefTable, 2> tables = [] {
    std::array<RefTable, 2> t;
    const CellKind kinds[2] = {CellKind::Hex, CellKind::NorthPrism};
    for (int m = 0; m < 2; ++m) {
      const RefQuadrature& rq = reference_quadrature(kinds[m]);
      for (const Vec3& p : rq.points) {
        std::array<Vec3, 8> g{};
        t[m].nodes = shape_functions(kinds[m], p, nullptr, g.data());
        t[m].grads.push_back(g);
      }
    }
    return t;
  }();
  return tables[kind == CellKind::Hex ? 0 : 1];
}

}  // namespace

FemOperator::FemOperator(std::shared_ptr<const AnnularGrid> grid) : grid_(std::move(grid)) {
  const AnnularGrid& g = *grid_;
  const std::size_t n = g.node_count();
  std::vector<std::vector<int>> adj(n);
  for (const Cell& c : g.cells()) {
    const int nn = c.node_count();
    for (int a = 0; a < nn; ++a)
      for (int b = 0; b < nn; ++b) adj[c.nodes[a]].push_back(c.nodes[b]);
  }
  pattern_.n = static_cast<int>(n);
  pattern_.row_ptr.assign(n + 1, 0);
  for (std::size_t r = 0; r < n; ++r) {
    auto& row = adj[r];
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    pattern_.row_ptr[r + 1] = pattern_.row_ptr[r] + static_cast<int>(row.size());
  }
  pattern_.col.reserve(static_cast<std::size_t>(pattern_.row_ptr[n]));
  for (auto& row : adj) pattern_.col.insert(pattern_.col.end(), row.begin(), row.end());
  pattern_.val.assign(pattern_.col.size(), 0.0);

  const auto& cells = g.cells();
  scatter_offset_.resize(cells.size() + 1, 0);
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const int nn = cells[c].node_count();
    scatter_offset_[c + 1] = scatter_offset_[c] + static_cast<std::size_t>(nn * nn);
  }
  scatter_.resize(scatter_offset_.back());
  parallel_for(cells.size(), [&](std::size_t c) {
    const Cell& cell = cells[c];
    const int nn = cell.node_count();
    for (int a = 0; a < nn; ++a) {
      const int r = cell.nodes[a];
      const auto begin = pattern_.col.begin() + pattern_.row_ptr[r];
      const auto end = pattern_.col.begin() + pattern_.row_ptr[r + 1];
      for (int b = 0; b < nn; ++b) {
        const auto it = std::lower_bound(begin, end, cell.nodes[b]);
        scatter_[scatter_offset_[c] + static_cast<std::size_t>(a * nn + b)] =
            static_cast<int>(it - pattern_.col.begin());
      }
    }
  });
}

std::vector<Vec3> FemOperator::quad_gradients(const std::vector<double>& u) const {
  const AnnularGrid& g = *grid_;
  std::vector<Vec3> out(quad_count());
  parallel_for(g.cells().size(), [&](std::size_t c) {
    const Cell& cell = g.cells()[c];
    const RefTable& t = ref_table(cell.kind);
    for (std::size_t q = 0; q < t.grads.size(); ++q) {
      Vec3 gr = Vec3::Zero();
      for (int a = 0; a < t.nodes; ++a) gr += u[cell.nodes[a]] * t.grads[q][a];
      const std::size_t idx = g.quad_offset(c) + q;
      out[idx] = g.quad_points()[idx].jinv.transpose() * gr;
    }
  });
  return out;
}

void FemOperator::assemble(const std::vector<double>& coeff, CsrMatrix& k) const {
  const AnnularGrid& g = *grid_;
  require(coeff.size() == quad_count(), "FemOperator::assemble: coefficient size mismatch");
  if (k.n != pattern_.n || k.col.size() != pattern_.col.size()) k = pattern_;
  std::fill(k.val.begin(), k.val.end(), 0.0);
  const auto& cells = g.cells();
  std::vector<double> local(scatter_.size());
  parallel_for(cells.size(), [&](std::size_t c) {
    const Cell& cell = cells[c];
    const RefTable& t = ref_table(cell.kind);
    const int nn = t.nodes;
    double* ke = local.data() + scatter_offset_[c];
    std::fill(ke, ke + nn * nn, 0.0);
    Vec3 phys[8];
    for (std::size_t q = 0; q < t.grads.size(); ++q) {
      const std::size_t idx = g.quad_offset(c) + q;
      const QuadPoint& qp = g.quad_points()[idx];
      const double w = coeff[idx] * qp.wdet;
      for (int a = 0; a < nn; ++a) phys[a] = qp.jinv.transpose() * t.grads[q][a];
      for (int a = 0; a < nn; ++a)
        for (int b = a; b < nn; ++b) ke[a * nn + b] += w * phys[a].dot(phys[b]);
    }
    for (int a = 0; a < nn; ++a)
      for (int b = 0; b < a; ++b) ke[a * nn + b] = ke[b * nn + a];
  });
  for (std::size_t i = 0; i < scatter_.size(); ++i) k.val[scatter_[i]] += local[i];
}

double FemOperator::integrate(const std::vector<double>& per_quad) const {
  const auto& qp = grid_->quad_points();
  require(per_quad.size() == qp.size(), "FemOperator::integrate: size mismatch");
  return parallel_sum(qp.size(), [&](std::size_t q) { return qp[q].wdet * per_quad[q]; });
}

}  // namespace caplab
