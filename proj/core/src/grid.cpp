#include "caplab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include <Eigen/LU>

#include "caplab/parallel.hpp"

namespace caplab {

namespace {

constexpr double kChartStep = 1e-5;
constexpr double kChartStep2 = 1e-4;

double sinc(double t) { return std::abs(t) < 1e-6 ? 1.0 - t * t / 6.0 : std::sin(t) / t; }

RefQuadrature make_hex_quadrature() {
  const double g[2] = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};
  RefQuadrature q;
  for (int c = 0; c < 2; ++c)
    for (int b = 0; b < 2; ++b)
      for (int a = 0; a < 2; ++a) {
        q.points.emplace_back(g[a], g[b], g[c]);
        q.weights.push_back(0.125);
      }
  return q;
}

RefQuadrature make_prism_quadrature() {
  const double g[2] = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};
  const double tri[3][2] = {{1.0 / 6.0, 1.0 / 6.0}, {2.0 / 3.0, 1.0 / 6.0}, {1.0 / 6.0, 2.0 / 3.0}};
  RefQuadrature q;
  for (double z : g)
    for (const auto& t : tri) {
      q.points.emplace_back(z, t[0], t[1]);
      q.weights.push_back(0.5 / 6.0);
    }
  return q;
}

}  // namespace

int shape_functions(CellKind kind, const Vec3& ref, double* values, Vec3* grads) {
  if (kind == CellKind::Hex) {
    const double f[2][3] = {{1.0 - ref[0], 1.0 - ref[1], 1.0 - ref[2]}, {ref[0], ref[1], ref[2]}};
    const double df[2] = {-1.0, 1.0};
    for (int c = 0; c < 2; ++c)
      for (int b = 0; b < 2; ++b)
        for (int a = 0; a < 2; ++a) {
          const int n = a + 2 * b + 4 * c;
          if (values) values[n] = f[a][0] * f[b][1] * f[c][2];
          if (grads)
            grads[n] = Vec3(df[a] * f[b][1] * f[c][2], f[a][0] * df[b] * f[c][2],
                            f[a][0] * f[b][1] * df[c]);
        }
    return 8;
  }
  const double z = ref[0], la = ref[1], lb = ref[2];
  const double lp = 1.0 - la - lb;
  const double zf[2] = {1.0 - z, z};
  const double dz[2] = {-1.0, 1.0};
  const double tv[3] = {lp, la, lb};
  const Vec3 tg[3] = {Vec3(0.0, -1.0, -1.0), Vec3(0.0, 1.0, 0.0), Vec3(0.0, 0.0, 1.0)};
  for (int h = 0; h < 2; ++h)
    for (int t = 0; t < 3; ++t) {
      const int n = 3 * h + t;
      if (values) values[n] = zf[h] * tv[t];
      if (grads) grads[n] = zf[h] * tg[t] + Vec3(dz[h] * tv[t], 0.0, 0.0);
    }
  return 6;
}

const RefQuadrature& reference_quadrature(CellKind kind) {
  static const RefQuadrature hex = make_hex_quadrature();
  static const RefQuadrature prism = make_prism_quadrature();
  return kind == CellKind::Hex ? hex : prism;
}

AnnularGrid::AnnularGrid(ImplicitDomain domain, double r_out, GridResolution res)
    : domain_(std::move(domain)), r_out_(r_out), res_(res) {
  require(res.ns >= 3 && res.ntheta >= 2 && res.nphi >= 4 && res.nphi % 2 == 0,
          "AnnularGrid: resolution too small or odd N_phi");
  const int ns = res.ns, nt = res.ntheta, np = res.nphi;

  // Ray-crossing check: every ray must leave the domain before R_out.
  for (int j = 0; j < 4 * nt; ++j)
    for (int k = 0; k < 4 * np; ++k) {
      const double theta = kPi * (j + 0.5) / (4 * nt);
      const double phi = 2.0 * kPi * k / (4 * np);
      const double rho = domain_.radius(theta, phi);
      if (!(rho > 0.0) || !(rho < r_out_)) {
        std::ostringstream msg;
        msg << "grid: boundary radius " << rho << " does not lie inside (0, R_out=" << r_out_
            << ") along direction theta=" << theta << " phi=" << phi;
        throw GeometryError(msg.str());
      }
    }

  const std::size_t nreg = regular_count();
  positions_.resize(nreg + 2 * static_cast<std::size_t>(ns));
  node_jinv_.resize(nreg);
  parallel_for(nreg, [&](std::size_t n) {
    const int k = static_cast<int>(n % np);
    const int j = static_cast<int>((n / np) % nt);
    const int i = static_cast<int>(n / (static_cast<std::size_t>(np) * nt));
    const double s = s_at(i), th = theta_at(j), ph = phi_at(k);
    positions_[n] = map(s, th, ph);
    Mat3 jac;
    for (int a = 0; a < 3; ++a) {
      double qp[3] = {s, th, ph}, qm[3] = {s, th, ph};
      qp[a] += kChartStep;
      qm[a] -= kChartStep;
      jac.col(a) = (map(qp[0], qp[1], qp[2]) - map(qm[0], qm[1], qm[2])) / (2.0 * kChartStep);
    }
    node_jinv_[n] = jac.inverse();
  });
  for (int i = 0; i < ns; ++i) {
    positions_[north_pole(i)] = map(s_at(i), 0.0, 0.0);
    positions_[south_pole(i)] = map(s_at(i), kPi, 0.0);
  }

  for (int i = 0; i + 1 < ns; ++i)
    for (int j = 0; j + 1 < nt; ++j)
      for (int k = 0; k < np; ++k) {
        Cell c{CellKind::Hex, i, j, k, {}};
        const int k1 = (k + 1) % np;
        for (int cc = 0; cc < 2; ++cc)
          for (int b = 0; b < 2; ++b)
            for (int a = 0; a < 2; ++a)
              c.nodes[a + 2 * b + 4 * cc] = node_id(i + a, j + b, cc ? k1 : k);
        cells_.push_back(c);
      }
  for (int pole = 0; pole < 2; ++pole) {
    const CellKind kind = pole == 0 ? CellKind::NorthPrism : CellKind::SouthPrism;
    const int j = pole == 0 ? 0 : nt - 1;
    for (int i = 0; i + 1 < ns; ++i)
      for (int k = 0; k < np; ++k) {
        Cell c{kind, i, j, k, {}};
        const int k1 = (k + 1) % np;
        for (int h = 0; h < 2; ++h) {
          c.nodes[3 * h] = pole == 0 ? north_pole(i + h) : south_pole(i + h);
          c.nodes[3 * h + 1] = node_id(i + h, j, k);
          c.nodes[3 * h + 2] = node_id(i + h, j, k1);
        }
        c.nodes[6] = c.nodes[7] = -1;
        cells_.push_back(c);
      }
  }

  quad_offset_.resize(cells_.size() + 1);
  quad_offset_[0] = 0;
  for (std::size_t c = 0; c < cells_.size(); ++c)
    quad_offset_[c + 1] =
        quad_offset_[c] + reference_quadrature(cells_[c].kind).points.size();
  quad_.resize(quad_offset_.back());
  std::vector<int> bad(cells_.size(), 0);
  parallel_for(cells_.size(), [&](std::size_t c) {
    const Cell& cell = cells_[c];
    const RefQuadrature& rq = reference_quadrature(cell.kind);
    for (std::size_t q = 0; q < rq.points.size(); ++q) {
      const Mat3 jac = cell_jacobian(cell, rq.points[q]);
      const double det = jac.determinant();
      if (!(std::abs(det) > 0.0) || (cell.kind == CellKind::Hex && det <= 0.0)) bad[c] = 1;
      quad_[quad_offset_[c] + q] = QuadPoint{jac.inverse(), rq.weights[q] * std::abs(det)};
    }
  });
  for (std::size_t c = 0; c < cells_.size(); ++c)
    if (bad[c]) {
      std::ostringstream msg;
      msg << "grid: degenerate cell Jacobian near direction theta="
          << theta_at(cells_[c].j) << " phi=" << phi_at(cells_[c].k);
      throw GeometryError(msg.str());
    }

  weights_.assign(node_count(), 0.0);
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    const Cell& cell = cells_[c];
    const RefQuadrature& rq = reference_quadrature(cell.kind);
    double nv[8];
    for (std::size_t q = 0; q < rq.points.size(); ++q) {
      const int nn = shape_functions(cell.kind, rq.points[q], nv, nullptr);
      const double wd = quad_[quad_offset_[c] + q].wdet;
      for (int a = 0; a < nn; ++a) weights_[cell.nodes[a]] += nv[a] * wd;
    }
  }
}

int AnnularGrid::shell_of(int n) const {
  const int nreg = static_cast<int>(regular_count());
  if (n < nreg) return n / (res_.ntheta * res_.nphi);
  return (n - nreg) % res_.ns;
}

double AnnularGrid::radius_at(double s, const Vec3& omega) const {
  const double rho = domain_.radius(omega);
  return rho * std::pow(r_out_ / rho, s);
}

Vec3 AnnularGrid::map(double s, double theta, double phi) const {
  const Vec3 w = direction(theta, phi);
  return domain_.center() + radius_at(s, w) * w;
}

Vec3 AnnularGrid::polar_map(double s, double x, double y, bool north) const {
  const double t = std::hypot(x, y);
  const double sc = sinc(t);
  const Vec3 w(sc * x, sc * y, north ? std::cos(t) : -std::cos(t));
  return domain_.center() + radius_at(s, w) * w;
}

MapDerivatives AnnularGrid::map_derivatives(double s, double theta, double phi) const {
  const double h = kChartStep2;
  const double q0[3] = {s, theta, phi};
  auto eval = [&](int a, double da, int b, double db) {
    double q[3] = {q0[0], q0[1], q0[2]};
    if (a >= 0) q[a] += da;
    if (b >= 0) q[b] += db;
    return map(q[0], q[1], q[2]);
  };
  MapDerivatives md;
  md.x = eval(-1, 0, -1, 0);
  Vec3 plus[3], minus[3];
  Mat3 jac;
  for (int a = 0; a < 3; ++a) {
    plus[a] = eval(a, h, -1, 0);
    minus[a] = eval(a, -h, -1, 0);
    jac.col(a) = (plus[a] - minus[a]) / (2.0 * h);
  }
  // d2x[a][b] is the chart second derivative of the position vector.
  Vec3 d2x[3][3];
  for (int a = 0; a < 3; ++a) {
    d2x[a][a] = (plus[a] - 2.0 * md.x + minus[a]) / (h * h);
    for (int b = a + 1; b < 3; ++b) {
      d2x[a][b] = (eval(a, h, b, h) - eval(a, h, b, -h) - eval(a, -h, b, h) + eval(a, -h, b, -h)) /
                  (4.0 * h * h);
      d2x[b][a] = d2x[a][b];
    }
  }
  md.jinv = jac.inverse();
  for (int k = 0; k < 3; ++k) {
    Mat3 t;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) t(a, b) = md.jinv.row(k).dot(d2x[a][b]);
    md.hess_xi[k] = -md.jinv.transpose() * t * md.jinv;
  }
  return md;
}

Vec3 AnnularGrid::hex_chart(const Cell& cell, const Vec3& ref) const {
  return {s_at(cell.i) + ref[0] * ds(), theta_at(cell.j) + ref[1] * dtheta(),
          phi_at(cell.k) + ref[2] * dphi()};
}

Vec3 AnnularGrid::prism_xy(const Cell& cell, const Vec3& ref, Mat3* dchart) const {
  const double theta0 = 0.5 * dtheta();
  const double la = ref[1], lb = ref[2];
  const double sigma = la + lb;
  const double fb = sigma > 1e-300 ? lb / sigma : 0.5;
  const double fa = 1.0 - fb;
  const double psi = phi_at(cell.k) + dphi() * fb;
  const double cp = std::cos(psi), sp = std::sin(psi);
  if (dchart) {
    Mat3& m = *dchart;
    m.setZero();
    m(0, 0) = ds();
    m(1, 1) = theta0 * (cp + sp * dphi() * fb);
    m(2, 1) = theta0 * (sp - cp * dphi() * fb);
    m(1, 2) = theta0 * (cp - sp * dphi() * fa);
    m(2, 2) = theta0 * (sp + cp * dphi() * fa);
  }
  return {s_at(cell.i) + ref[0] * ds(), theta0 * sigma * cp, theta0 * sigma * sp};
}

Vec3 AnnularGrid::cell_point(const Cell& cell, const Vec3& ref) const {
  if (cell.kind == CellKind::Hex) {
    const Vec3 q = hex_chart(cell, ref);
    return map(q[0], q[1], q[2]);
  }
  const Vec3 q = prism_xy(cell, ref, nullptr);
  return polar_map(q[0], q[1], q[2], cell.kind == CellKind::NorthPrism);
}

Mat3 AnnularGrid::cell_jacobian(const Cell& cell, const Vec3& ref) const {
  const double h = kChartStep;
  Mat3 jac;
  if (cell.kind == CellKind::Hex) {
    const Vec3 q = hex_chart(cell, ref);
    const double scale[3] = {ds(), dtheta(), dphi()};
    for (int a = 0; a < 3; ++a) {
      Vec3 qp = q, qm = q;
      qp[a] += h;
      qm[a] -= h;
      jac.col(a) = (map(qp[0], qp[1], qp[2]) - map(qm[0], qm[1], qm[2])) * (scale[a] / (2.0 * h));
    }
    return jac;
  }
  Mat3 dchart;
  const Vec3 q = prism_xy(cell, ref, &dchart);
  const bool north = cell.kind == CellKind::NorthPrism;
  Mat3 jp;
  for (int a = 0; a < 3; ++a) {
    Vec3 qp = q, qm = q;
    qp[a] += h;
    qm[a] -= h;
    jp.col(a) = (polar_map(qp[0], qp[1], qp[2], north) - polar_map(qm[0], qm[1], qm[2], north)) /
                (2.0 * h);
  }
  return jp * dchart;
}

std::vector<FacePoint> AnnularGrid::face_quadrature(bool outer) const {
  const int layer = outer ? res_.ns - 2 : 0;
  const double a = outer ? 1.0 : 0.0;
  const double g0 = 0.5 - 0.5 / std::sqrt(3.0), g1 = 0.5 + 0.5 / std::sqrt(3.0);
  const Vec3 hex_pts[4] = {{a, g0, g0}, {a, g1, g0}, {a, g0, g1}, {a, g1, g1}};
  const Vec3 tri_pts[3] = {{a, 1.0 / 6, 1.0 / 6}, {a, 2.0 / 3, 1.0 / 6}, {a, 1.0 / 6, 2.0 / 3}};
  std::vector<FacePoint> out;
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    const Cell& cell = cells_[c];
    if (cell.i != layer) continue;
    const bool hex = cell.kind == CellKind::Hex;
    const Vec3* pts = hex ? hex_pts : tri_pts;
    const int np = hex ? 4 : 3;
    const double w = hex ? 0.25 : 1.0 / 6.0;
    for (int q = 0; q < np; ++q) {
      const Mat3 jac = cell_jacobian(cell, pts[q]);
      out.push_back({static_cast<int>(c), pts[q], cell_point(cell, pts[q]),
                     w * jac.col(1).cross(jac.col(2)).norm()});
    }
  }
  return out;
}

std::optional<CellLocation> AnnularGrid::locate(const Vec3& x) const {
  const Vec3 d = x - domain_.center();
  const double r = d.norm();
  if (r == 0.0) return std::nullopt;
  const Vec3 w = d / r;
  const double rho = domain_.radius(w);
  double s = std::log(r / rho) / std::log(r_out_ / rho);
  constexpr double kSlack = 1e-9;
  if (s < -kSlack || s > 1.0 + kSlack) return std::nullopt;
  s = std::clamp(s, 0.0, 1.0);
  const int ns = res_.ns, nt = res_.ntheta, np = res_.nphi;
  const int i = std::min(static_cast<int>(s / ds()), ns - 2);
  const double alpha = s / ds() - i;
  const double theta = std::acos(std::clamp(w.z(), -1.0, 1.0));
  double phi = std::atan2(w.y(), w.x());
  if (phi < 0.0) phi += 2.0 * kPi;
  const double fk = phi / dphi();
  const int k = std::min(static_cast<int>(fk), np - 1);
  const double gamma = std::clamp(fk - k, 0.0, 1.0);
  const int hexes = (ns - 1) * (nt - 1) * np;
  const double theta0 = 0.5 * dtheta();
  if (theta < theta0 || theta > kPi - theta0) {
    const bool north = theta < theta0;
    const double sigma = (north ? theta : kPi - theta) / theta0;
    const int cell = hexes + (north ? 0 : (ns - 1) * np) + i * np + k;
    return CellLocation{cell, Vec3(alpha, sigma * (1.0 - gamma), sigma * gamma)};
  }
  const double ft = (theta - theta0) / dtheta();
  const int j = std::min(static_cast<int>(ft), nt - 2);
  const int cell = (i * (nt - 1) + j) * np + k;
  return CellLocation{cell, Vec3(alpha, std::clamp(ft - j, 0.0, 1.0), gamma)};
}

double AnnularGrid::fetch(const std::vector<double>& field, int i, int j, int k) const {
  const int nt = res_.ntheta, np = res_.nphi;
  if (j < 0) {
    j = -1 - j;
    k += np / 2;
  } else if (j >= nt) {
    j = 2 * nt - 1 - j;
    k += np / 2;
  }
  k = ((k % np) + np) % np;
  return field[node_id(i, j, k)];
}

ChartDerivatives AnnularGrid::chart_derivatives(const std::vector<double>& field, int i, int j,
                                                int k) const {
  const int ns = res_.ns;
  // s-stencils: offsets and weights for first and second derivatives.
  int off[4];
  double w1[4], w2[4];
  int len;
  const double hs = ds();
  if (i == 0 || i == ns - 1) {
    const int dir = i == 0 ? 1 : -1;
    len = 4;
    for (int m = 0; m < 4; ++m) off[m] = dir * m;
    const double a1[4] = {-1.5, 2.0, -0.5, 0.0};
    const double a2[4] = {2.0, -5.0, 4.0, -1.0};
    for (int m = 0; m < 4; ++m) {
      w1[m] = dir * a1[m] / hs;
      w2[m] = a2[m] / (hs * hs);
    }
  } else {
    len = 3;
    off[0] = -1;
    off[1] = 0;
    off[2] = 1;
    w1[0] = -0.5 / hs;
    w1[1] = 0.0;
    w1[2] = 0.5 / hs;
    w2[0] = 1.0 / (hs * hs);
    w2[1] = -2.0 / (hs * hs);
    w2[2] = 1.0 / (hs * hs);
  }
  const double ht = dtheta(), hp = dphi();
  auto f = [&](int di, int dj, int dk) { return fetch(field, i + di, j + dj, k + dk); };
  ChartDerivatives cd;
  cd.d.setZero();
  cd.d2.setZero();
  for (int m = 0; m < len; ++m) {
    const int o = off[m];
    const double v = f(o, 0, 0);
    cd.d[0] += w1[m] * v;
    cd.d2(0, 0) += w2[m] * v;
    cd.d2(0, 1) += w1[m] * (f(o, 1, 0) - f(o, -1, 0)) / (2.0 * ht);
    cd.d2(0, 2) += w1[m] * (f(o, 0, 1) - f(o, 0, -1)) / (2.0 * hp);
  }
  const double c = f(0, 0, 0);
  cd.d[1] = (f(0, 1, 0) - f(0, -1, 0)) / (2.0 * ht);
  cd.d[2] = (f(0, 0, 1) - f(0, 0, -1)) / (2.0 * hp);
  cd.d2(1, 1) = (f(0, 1, 0) - 2.0 * c + f(0, -1, 0)) / (ht * ht);
  cd.d2(2, 2) = (f(0, 0, 1) - 2.0 * c + f(0, 0, -1)) / (hp * hp);
  cd.d2(1, 2) = (f(0, 1, 1) - f(0, 1, -1) - f(0, -1, 1) + f(0, -1, -1)) / (4.0 * ht * hp);
  cd.d2(1, 0) = cd.d2(0, 1);
  cd.d2(2, 0) = cd.d2(0, 2);
  cd.d2(2, 1) = cd.d2(1, 2);
  return cd;
}

Vec3 AnnularGrid::gradient(const std::vector<double>& field, int n) const {
  if (is_pole(n)) {
    const int i = shell_of(n);
    const int j = n < south_pole(0) ? 0 : res_.ntheta - 1;
    Vec3 g = Vec3::Zero();
    for (int k = 0; k < res_.nphi; ++k) g += gradient(field, node_id(i, j, k));
    return g / res_.nphi;
  }
  const int np = res_.nphi, nt = res_.ntheta;
  const int k = n % np, j = (n / np) % nt, i = n / (np * nt);
  return node_jinv_[n].transpose() * chart_derivatives(field, i, j, k).d;
}

Mat3 AnnularGrid::hessian(const std::vector<double>& field, int n) const {
  if (is_pole(n)) {
    const int i = shell_of(n);
    const int j = n < south_pole(0) ? 0 : res_.ntheta - 1;
    Mat3 h = Mat3::Zero();
    for (int k = 0; k < res_.nphi; ++k) h += hessian(field, node_id(i, j, k));
    return h / res_.nphi;
  }
  const int np = res_.nphi, nt = res_.ntheta;
  const int k = n % np, j = (n / np) % nt, i = n / (np * nt);
  const ChartDerivatives cd = chart_derivatives(field, i, j, k);
  const MapDerivatives md = map_derivatives(s_at(i), theta_at(j), phi_at(k));
  Mat3 h = md.jinv.transpose() * cd.d2 * md.jinv;
  for (int a = 0; a < 3; ++a) h += cd.d[a] * md.hess_xi[a];
  return h;
}

double AnnularGrid::volume_integral(const std::vector<double>& field,
                                    const std::function<bool(int)>& region) const {
  require(field.size() == node_count(), "volume_integral: field size mismatch");
  return parallel_sum(node_count(), [&](std::size_t n) {
    const int id = static_cast<int>(n);
    if (region && !region(id)) return 0.0;
    return weights_[n] * field[n];
  });
}

double AnnularGrid::volume_integral(const std::function<double(const Vec3&)>& integrand) const {
  return parallel_sum(cells_.size(), [&](std::size_t c) {
    const Cell& cell = cells_[c];
    const RefQuadrature& rq = reference_quadrature(cell.kind);
    double acc = 0.0;
    for (std::size_t q = 0; q < rq.points.size(); ++q)
      acc += integrand(cell_point(cell, rq.points[q])) * quad_[quad_offset_[c] + q].wdet;
    return acc;
  });
}

std::vector<double> AnnularGrid::sample(const std::function<double(const Vec3&)>& f) const {
  std::vector<double> out(node_count());
  parallel_for(node_count(), [&](std::size_t n) { out[n] = f(positions_[n]); });
  return out;
}

void AnnularGrid::dump(std::ostream& out) const {
  const int nt = res_.ntheta, np = res_.nphi;
  char buf[160];
  auto line = [&](int i, int j, int k, int n) {
    const Vec3& x = positions_[n];
    std::snprintf(buf, sizeof buf, "node %d %d %d %.12g %.12g %.12g %.12g\n", i, j, k, x.x(),
                  x.y(), x.z(), weights_[n]);
    out << buf;
  };
  for (int i = 0; i < res_.ns; ++i) {
    line(i, -1, 0, north_pole(i));
    for (int j = 0; j < nt; ++j)
      for (int k = 0; k < np; ++k) line(i, j, k, node_id(i, j, k));
    line(i, nt, 0, south_pole(i));
  }
}

AnnularGrid build_grid(const ImplicitDomain& domain, double r_out, GridResolution res) {
  require(r_out > 0.0, "build_grid: R_out must be positive");
  return AnnularGrid(domain, r_out, res);
}

}  // namespace caplab
