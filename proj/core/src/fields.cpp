#include "caplab/fields.hpp"

#include "caplab/parallel.hpp"

namespace caplab {

NodalDerivatives::NodalDerivatives(std::shared_ptr<const AnnularGrid> grid,
                                   std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  const AnnularGrid& g = *grid_;
  require(values_.size() == g.node_count(), "NodalDerivatives: field size mismatch");
  const int ns = g.ns(), nt = g.ntheta(), np = g.nphi();
  const std::size_t nreg = g.regular_count();
  d_.resize(nreg);
  d2_.resize(nreg);
  grad_.resize(g.node_count());
  parallel_for(nreg, [&](std::size_t n) {
    const int k = static_cast<int>(n % np);
    const int j = static_cast<int>((n / np) % nt);
    const int i = static_cast<int>(n / (static_cast<std::size_t>(np) * nt));
    const ChartDerivatives cd = g.chart_derivatives(values_, i, j, k);
    d_[n] = cd.d;
    d2_[n] = cd.d2;
    grad_[n] = g.node_jinv(static_cast<int>(n)).transpose() * cd.d;
  });
  for (int i = 0; i < ns; ++i)
    for (int pole = 0; pole < 2; ++pole) {
      const int j = pole == 0 ? 0 : nt - 1;
      Vec3 acc = Vec3::Zero();
      for (int k = 0; k < np; ++k) acc += grad_[g.node_id(i, j, k)];
      grad_[pole == 0 ? g.north_pole(i) : g.south_pole(i)] = acc / np;
    }

  polar_hess_.resize(static_cast<std::size_t>(2 * ns * (np + 1)));
  parallel_for(static_cast<std::size_t>(2 * ns * np), [&](std::size_t m) {
    const int k = static_cast<int>(m % np);
    const int pole = static_cast<int>((m / np) % 2);
    const int i = static_cast<int>(m / (2 * static_cast<std::size_t>(np)));
    const int j = pole == 0 ? 0 : nt - 1;
    const int n = g.node_id(i, j, k);
    const MapDerivatives md = g.map_derivatives(g.s_at(i), g.theta_at(j), g.phi_at(k));
    Mat3 h = md.jinv.transpose() * d2_[n] * md.jinv;
    for (int a = 0; a < 3; ++a) h += d_[n][a] * md.hess_xi[a];
    polar_hess_[polar_index(n)] = h;
  });
  for (int i = 0; i < ns; ++i)
    for (int pole = 0; pole < 2; ++pole) {
      const int j = pole == 0 ? 0 : nt - 1;
      Mat3 acc = Mat3::Zero();
      for (int k = 0; k < np; ++k) acc += polar_hess_[polar_index(g.node_id(i, j, k))];
      polar_hess_[polar_index(pole == 0 ? g.north_pole(i) : g.south_pole(i))] = acc / np;
    }
}

int NodalDerivatives::polar_index(int n) const {
  const AnnularGrid& g = *grid_;
  const int np = g.nphi(), nt = g.ntheta();
  if (g.is_pole(n)) {
    const int i = g.shell_of(n);
    const int pole = n < g.south_pole(0) ? 0 : 1;
    return 2 * g.ns() * np + 2 * i + pole;
  }
  const int k = n % np, j = (n / np) % nt, i = n / (np * nt);
  const int pole = j == 0 ? 0 : 1;
  return (2 * i + pole) * np + k;
}

const Mat3& NodalDerivatives::polar_hessian(int n) const { return polar_hess_[polar_index(n)]; }

double NodalDerivatives::value(int cell, const Vec3& ref) const {
  const Cell& c = grid_->cells()[cell];
  double nv[8];
  const int nn = shape_functions(c.kind, ref, nv, nullptr);
  double v = 0.0;
  for (int a = 0; a < nn; ++a) v += nv[a] * values_[c.nodes[a]];
  return v;
}

FieldSample NodalDerivatives::sample(int cell, const Vec3& ref) const {
  const AnnularGrid& g = *grid_;
  const Cell& c = g.cells()[cell];
  double nv[8];
  const int nn = shape_functions(c.kind, ref, nv, nullptr);
  FieldSample out{0.0, Vec3::Zero(), Mat3::Zero()};
  if (c.kind == CellKind::Hex) {
    Vec3 d = Vec3::Zero();
    Mat3 d2 = Mat3::Zero();
    for (int a = 0; a < nn; ++a) {
      const int n = c.nodes[a];
      out.value += nv[a] * values_[n];
      d += nv[a] * d_[n];
      d2 += nv[a] * d2_[n];
    }
    const Vec3 q = g.hex_chart(c, ref);
    const MapDerivatives md = g.map_derivatives(q[0], q[1], q[2]);
    out.grad = md.jinv.transpose() * d;
    out.hess = md.jinv.transpose() * d2 * md.jinv;
    for (int a = 0; a < 3; ++a) out.hess += d[a] * md.hess_xi[a];
    return out;
  }
  for (int a = 0; a < nn; ++a) {
    const int n = c.nodes[a];
    out.value += nv[a] * values_[n];
    out.grad += nv[a] * grad_[n];
    out.hess += nv[a] * polar_hessian(n);
  }
  return out;
}

std::optional<FieldSample> NodalDerivatives::sample_at(const Vec3& x) const {
  const auto loc = grid_->locate(x);
  if (!loc) return std::nullopt;
  return sample(loc->cell, loc->ref);
}

}  // namespace caplab
