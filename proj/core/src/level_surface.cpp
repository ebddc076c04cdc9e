#include "caplab/level_surface.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "caplab/parallel.hpp"

namespace caplab {

namespace {

struct Tet {
  std::array<int, 4> local;
};

const std::vector<Tet>& hex_tets() {
  static const std::vector<Tet> tets = [] {
    std::vector<Tet> out;
    int perm[3] = {0, 1, 2};
    do {
      int corner = 0;
      Tet t;
      t.local[0] = 0;
      for (int m = 0; m < 3; ++m) {
        corner |= 1 << perm[m];
        t.local[m + 1] = corner;
      }
      out.push_back(t);
    } while (std::next_permutation(perm, perm + 3));
    return out;
  }();
  return tets;
}

const std::vector<Tet>& prism_tets() {
  static const std::vector<Tet> tets = {{{0, 4, 5, 3}}, {{0, 1, 2, 5}}, {{0, 1, 5, 4}}};
  return tets;
}

Vec3 local_ref(CellKind kind, int local) {
  if (kind == CellKind::Hex) return Vec3(local & 1, (local >> 1) & 1, (local >> 2) & 1);
  const double z = local >= 3 ? 1.0 : 0.0;
  const int t = local % 3;
  return Vec3(z, t == 1 ? 1.0 : 0.0, t == 2 ? 1.0 : 0.0);
}

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  int find(int a) {
    while (parent_[a] != a) {
      parent_[a] = parent_[parent_[a]];
      a = parent_[a];
    }
    return a;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<int> parent_;
};

std::uint64_t edge_key(int a, int b) {
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (lo << 32) | hi;
}

void finish_surface(LevelSurface& s, const NodalDerivatives& u,
                    const std::vector<int>& vertex_cell, const std::vector<Vec3>& vertex_ref,
                    const ExtractionOptions& opts) {
  const AnnularGrid& grid = u.grid();
  const std::size_t nt = s.triangles.size();

  // Topology.
  std::unordered_map<std::uint64_t, int> edges;
  edges.reserve(3 * nt);
  UnionFind uf(s.vertices.size());
  std::vector<char> used(s.vertices.size(), 0);
  for (const auto& tri : s.triangles)
    for (int e = 0; e < 3; ++e) {
      const int a = tri[e], b = tri[(e + 1) % 3];
      ++edges[edge_key(a, b)];
      uf.unite(a, b);
      used[a] = 1;
    }
  int nv = 0, comps = 0;
  for (std::size_t v = 0; v < s.vertices.size(); ++v)
    if (used[v]) {
      ++nv;
      if (uf.find(static_cast<int>(v)) == static_cast<int>(v)) ++comps;
    }
  s.boundary_edges = 0;
  for (const auto& [key, count] : edges)
    if (count == 1) ++s.boundary_edges;
  s.component_count = comps;
  s.euler_characteristic = nv - static_cast<int>(edges.size()) + static_cast<int>(nt);

  // Quadrature samples.
  static const double bary[3][3] = {
      {2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0},
      {1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0},
      {1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0}};
  s.samples.assign(3 * nt, SurfaceSample{});
  parallel_for(nt, [&](std::size_t tr) {
    const Cell& cell = grid.cells()[s.triangle_cell[tr]];
    const auto& ref = s.triangle_ref[tr];
    for (int q = 0; q < 3; ++q) {
      const Vec3 p = bary[q][0] * ref[0] + bary[q][1] * ref[1] + bary[q][2] * ref[2];
      const Mat3 jac = grid.cell_jacobian(cell, p);
      const Vec3 t1 = jac * (ref[1] - ref[0]);
      const Vec3 t2 = jac * (ref[2] - ref[0]);
      const FieldSample fs = u.sample(s.triangle_cell[tr], p);
      SurfaceSample& out = s.samples[3 * tr + q];
      out.x = grid.cell_point(cell, p);
      out.da = t1.cross(t2).norm() / 6.0;
      out.triangle = static_cast<int>(tr);
      out.geo = level_set_geometry(fs.grad, fs.hess);
    }
  });

  std::vector<double> g;
  g.reserve(s.samples.size());
  for (const auto& smp : s.samples) g.push_back(smp.geo.grad_norm);
  if (!g.empty()) {
    std::vector<double> sorted = g;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    s.median_grad_norm = sorted[sorted.size() / 2];
    s.min_grad_norm = *std::min_element(g.begin(), g.end());
  }
  const double threshold = opts.mask_ratio * s.median_grad_norm;
  std::size_t masked = 0;
  for (auto& smp : s.samples) {
    smp.masked = !(smp.geo.grad_norm >= threshold) || !std::isfinite(smp.geo.mean_curvature);
    if (smp.masked) ++masked;
  }
  s.masked_fraction = s.samples.empty() ? 0.0 : double(masked) / double(s.samples.size());
  s.regular = masked == 0;
  s.flagged = s.masked_fraction > opts.flag_fraction;

  if (opts.vertex_fields) {
    s.vertex_geometry.assign(s.vertices.size(), PointGeometry{});
    parallel_for(s.vertices.size(), [&](std::size_t v) {
      if (vertex_cell[v] < 0) return;
      const FieldSample fs = u.sample(vertex_cell[v], vertex_ref[v]);
      s.vertex_geometry[v] = level_set_geometry(fs.grad, fs.hess);
    });
  }
}

}  // namespace

PointGeometry level_set_geometry(const Vec3& grad, const Mat3& hess) {
  PointGeometry p;
  p.grad_norm = grad.norm();
  if (!(p.grad_norm > 0.0)) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    p.mean_curvature = p.norm_a2 = p.traceless2 = p.gauss_curvature = nan;
    return p;
  }
  p.normal = grad / p.grad_norm;
  const Mat3 proj = Mat3::Identity() - p.normal * p.normal.transpose();
  const Mat3 hs = 0.5 * (hess + hess.transpose());
  const Mat3 a = proj * hs * proj / p.grad_norm;
  p.mean_curvature = a.trace();
  p.norm_a2 = a.squaredNorm();
  p.traceless2 = (a - 0.5 * p.mean_curvature * proj).squaredNorm();
  p.gauss_curvature = 0.5 * (p.mean_curvature * p.mean_curvature - p.norm_a2);
  return p;
}

double LevelSurface::area() const {
  double acc = 0.0;
  for (const auto& s : samples) acc += s.da;
  return acc;
}

double LevelSurface::integral_gauss_curvature() const {
  return integrate([](const SurfaceSample& s) { return s.geo.gauss_curvature; });
}

double LevelSurface::integral_mean_curvature_squared() const {
  return integrate([](const SurfaceSample& s) {
    return s.geo.mean_curvature * s.geo.mean_curvature;
  });
}

double LevelSurface::integral_traceless() const {
  return integrate([](const SurfaceSample& s) { return s.geo.traceless2; });
}

LevelSurface extract_level_surface(const NodalDerivatives& u, double t,
                                   const ExtractionOptions& opts) {
  const AnnularGrid& grid = u.grid();
  const std::vector<double>& val = u.values();
  double outer_min = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < grid.node_count(); ++n)
    if (grid.is_outer(static_cast<int>(n))) outer_min = std::min(outer_min, val[n]);
  if (!(t > 0.0) || !(t < outer_min)) {
    std::ostringstream msg;
    msg << "level " << t << " is outside (0, " << outer_min
        << "): the surface would touch the inner or outer boundary";
    throw GeometryError(msg.str());
  }

  LevelSurface s;
  s.t = t;
  std::unordered_map<std::uint64_t, int> edge_vertex;
  std::vector<int> vertex_cell;
  std::vector<Vec3> vertex_ref;
  const auto& cells = grid.cells();
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const Cell& cell = cells[c];
    const int nn = cell.node_count();
    double lo = val[cell.nodes[0]], hi = lo;
    for (int a = 1; a < nn; ++a) {
      lo = std::min(lo, val[cell.nodes[a]]);
      hi = std::max(hi, val[cell.nodes[a]]);
    }
    if (hi < t || lo >= t) continue;
    const auto& tets = cell.kind == CellKind::Hex ? hex_tets() : prism_tets();
    for (const Tet& tet : tets) {
      int neg[4], pos[4], nneg = 0, npos = 0;
      double phi[4];
      for (int m = 0; m < 4; ++m) {
        phi[m] = val[cell.nodes[tet.local[m]]] - t;
        if (phi[m] < 0.0)
          neg[nneg++] = m;
        else
          pos[npos++] = m;
      }
      if (nneg == 0 || npos == 0) continue;
      auto vertex_on = [&](int ma, int mb) {
        int ga = cell.nodes[tet.local[ma]], gb = cell.nodes[tet.local[mb]];
        if (ga > gb) {
          std::swap(ga, gb);
          std::swap(ma, mb);
        }
        const double tau = phi[ma] / (phi[ma] - phi[mb]);
        const Vec3 ra = local_ref(cell.kind, tet.local[ma]);
        const Vec3 rb = local_ref(cell.kind, tet.local[mb]);
        const Vec3 ref = ra + tau * (rb - ra);
        const std::uint64_t key = edge_key(ga, gb);
        auto it = edge_vertex.find(key);
        int id;
        if (it == edge_vertex.end()) {
          id = static_cast<int>(s.vertices.size());
          edge_vertex.emplace(key, id);
          s.vertices.push_back(grid.cell_point(cell, ref));
          vertex_cell.push_back(static_cast<int>(c));
          vertex_ref.push_back(ref);
        } else {
          id = it->second;
        }
        return std::make_pair(id, ref);
      };
      std::vector<std::pair<int, Vec3>> poly;
      if (nneg == 1) {
        for (int m = 0; m < 3; ++m) poly.push_back(vertex_on(neg[0], pos[m]));
      } else if (npos == 1) {
        for (int m = 0; m < 3; ++m) poly.push_back(vertex_on(neg[m], pos[0]));
      } else {
        poly.push_back(vertex_on(neg[0], pos[0]));
        poly.push_back(vertex_on(neg[0], pos[1]));
        poly.push_back(vertex_on(neg[1], pos[1]));
        poly.push_back(vertex_on(neg[1], pos[0]));
      }
      Vec3 cneg = Vec3::Zero(), cpos = Vec3::Zero();
      for (int m = 0; m < nneg; ++m) cneg += grid.position(cell.nodes[tet.local[neg[m]]]);
      for (int m = 0; m < npos; ++m) cpos += grid.position(cell.nodes[tet.local[pos[m]]]);
      const Vec3 up = cpos / npos - cneg / nneg;
      for (std::size_t m = 1; m + 1 < poly.size(); ++m) {
        std::array<int, 3> tri = {0, static_cast<int>(m), static_cast<int>(m + 1)};
        const Vec3 n = (s.vertices[poly[tri[1]].first] - s.vertices[poly[tri[0]].first])
                           .cross(s.vertices[poly[tri[2]].first] - s.vertices[poly[tri[0]].first]);
        if (n.dot(up) < 0.0) std::swap(tri[1], tri[2]);
        s.triangles.push_back({poly[tri[0]].first, poly[tri[1]].first, poly[tri[2]].first});
        s.triangle_ref.push_back({poly[tri[0]].second, poly[tri[1]].second, poly[tri[2]].second});
        s.triangle_cell.push_back(static_cast<int>(c));
      }
    }
  }
  if (s.triangles.empty()) {
    std::ostringstream msg;
    msg << "level " << t << " produced an empty surface";
    throw GeometryError(msg.str());
  }
  finish_surface(s, u, vertex_cell, vertex_ref, opts);
  return s;
}

LevelSurface boundary_surface(const NodalDerivatives& u, const ExtractionOptions& opts) {
  const AnnularGrid& grid = u.grid();
  LevelSurface s;
  s.t = 0.0;
  std::unordered_map<int, int> node_vertex;
  std::vector<int> vertex_cell;
  std::vector<Vec3> vertex_ref;
  const auto& cells = grid.cells();
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const Cell& cell = cells[c];
    if (cell.i != 0) continue;
    std::vector<std::array<int, 3>> local_tris;
    if (cell.kind == CellKind::Hex)
      local_tris = {{0, 2, 6}, {0, 6, 4}};
    else
      local_tris = {{0, 1, 2}};
    for (auto tri : local_tris) {
      std::array<int, 3> ids;
      std::array<Vec3, 3> refs;
      for (int m = 0; m < 3; ++m) {
        const int node = cell.nodes[tri[m]];
        refs[m] = local_ref(cell.kind, tri[m]);
        auto it = node_vertex.find(node);
        if (it == node_vertex.end()) {
          ids[m] = static_cast<int>(s.vertices.size());
          node_vertex.emplace(node, ids[m]);
          s.vertices.push_back(grid.position(node));
          vertex_cell.push_back(static_cast<int>(c));
          vertex_ref.push_back(refs[m]);
        } else {
          ids[m] = it->second;
        }
      }
      const Vec3 n =
          (s.vertices[ids[1]] - s.vertices[ids[0]]).cross(s.vertices[ids[2]] - s.vertices[ids[0]]);
      if (n.dot(s.vertices[ids[0]] - grid.center()) < 0.0) {
        std::swap(ids[1], ids[2]);
        std::swap(refs[1], refs[2]);
      }
      s.triangles.push_back(ids);
      s.triangle_ref.push_back(refs);
      s.triangle_cell.push_back(static_cast<int>(c));
    }
  }
  finish_surface(s, u, vertex_cell, vertex_ref, opts);
  return s;
}

MeanCurvatureField mean_curvature_field(const AnnularGrid& grid, const std::vector<double>& u,
                                        double mask_ratio) {
  const std::size_t n = grid.node_count();
  MeanCurvatureField out;
  out.h.assign(n, 0.0);
  out.identity_h.assign(n, 0.0);
  out.masked.assign(n, 0);
  std::vector<double> g(n);
  std::vector<Mat3> hess(n);
  std::vector<Vec3> grad(n);
  parallel_for(n, [&](std::size_t m) {
    grad[m] = grid.gradient(u, static_cast<int>(m));
    hess[m] = grid.hessian(u, static_cast<int>(m));
    g[m] = grad[m].norm();
  });
  std::vector<double> sorted = g;
  std::nth_element(sorted.begin(), sorted.begin() + n / 2, sorted.end());
  const double threshold = mask_ratio * sorted[n / 2];
  for (std::size_t m = 0; m < n; ++m) {
    if (!(g[m] >= threshold) || g[m] == 0.0) {
      out.masked[m] = 1;
      continue;
    }
    const Vec3 nu = grad[m] / g[m];
    const double nhn = nu.dot(hess[m] * nu);
    out.h[m] = (hess[m].trace() - nhn) / g[m];
    out.identity_h[m] = -2.0 * nhn / g[m];
    out.max_discrepancy = std::max(out.max_discrepancy, std::abs(out.h[m] - out.identity_h[m]));
  }
  return out;
}

SecondFundamentalForm second_fundamental_form(const LevelSurface& surface) {
  SecondFundamentalForm out;
  for (const PointGeometry& p : surface.vertex_geometry) {
    out.traceless2.push_back(p.traceless2);
    out.norm_a2.push_back(p.norm_a2);
    out.gauss_curvature.push_back(p.gauss_curvature);
  }
  return out;
}

GMetricSurface g_metric_quantities(const LevelSurface& surface, const ConformalFactor& factor) {
  GMetricSurface g;
  g.samples.resize(surface.samples.size());
  std::vector<char> bad(surface.samples.size(), 0);
  parallel_for(surface.samples.size(), [&](std::size_t q) {
    const SurfaceSample& s = surface.samples[q];
    GSample& o = g.samples[q];
    o.f = factor.value(s.x);
    if (!(o.f > 0.0)) {
      bad[q] = 1;
      return;
    }
    o.f_nu = factor.gradient(s.x).dot(s.geo.normal);
    const double f2 = o.f * o.f;
    o.da_g = f2 * f2 * s.da;
    o.h_g = (s.geo.mean_curvature + 4.0 * o.f_nu / o.f) / f2;
    o.grad_g = s.geo.grad_norm / f2;
    o.traceless2_g = s.geo.traceless2 / (f2 * f2);
  });
  for (std::size_t q = 0; q < bad.size(); ++q)
    if (bad[q]) {
      std::ostringstream msg;
      msg << "conformal factor is not positive at (" << surface.samples[q].x.transpose() << ")";
      throw GeometryError(msg.str());
    }
  for (std::size_t q = 0; q < g.samples.size(); ++q) {
    const SurfaceSample& s = surface.samples[q];
    const GSample& o = g.samples[q];
    g.area_g += o.da_g;
    if (s.masked) continue;
    g.u_integral += o.h_g * o.grad_g * o.da_g;
    g.u_integral_euclidean +=
        (s.geo.mean_curvature + 4.0 * o.f_nu / o.f) * s.geo.grad_norm * s.da;
    g.h_g_squared += o.h_g * o.h_g * o.da_g;
    g.ring_integral += o.traceless2_g * o.da_g;
    g.max_abs_h_g = std::max(g.max_abs_h_g, std::abs(o.h_g));
  }
  g.vertex_f.resize(surface.vertices.size());
  g.vertex_f_nu.resize(surface.vertices.size());
  parallel_for(surface.vertices.size(), [&](std::size_t v) {
    g.vertex_f[v] = factor.value(surface.vertices[v]);
    const Vec3 nu = v < surface.vertex_geometry.size() ? surface.vertex_geometry[v].normal
                                                       : Vec3::Zero();
    g.vertex_f_nu[v] = factor.gradient(surface.vertices[v]).dot(nu);
  });
  return g;
}

double hawking_mass(const GMetricSurface& g) {
  return std::sqrt(g.area_g / kSixteenPi) * (1.0 - g.h_g_squared / kSixteenPi);
}

void write_off(std::ostream& out, const LevelSurface& s, const GMetricSurface* g) {
  char buf[256];
  out << "OFF\n# t = " << s.t << "\n# vertex columns: x y z grad_norm H traceless2 K f f_nu\n";
  out << s.vertices.size() << ' ' << s.triangles.size() << " 0\n";
  for (std::size_t v = 0; v < s.vertices.size(); ++v) {
    const PointGeometry p =
        v < s.vertex_geometry.size() ? s.vertex_geometry[v] : PointGeometry{};
    const double f = g ? g->vertex_f[v] : 1.0;
    const double fnu = g ? g->vertex_f_nu[v] : 0.0;
    std::snprintf(buf, sizeof buf, "%.12g %.12g %.12g %.12g %.12g %.12g %.12g %.12g %.12g\n",
                  s.vertices[v].x(), s.vertices[v].y(), s.vertices[v].z(), p.grad_norm,
                  p.mean_curvature, p.traceless2, p.gauss_curvature, f, fnu);
    out << buf;
  }
  for (const auto& t : s.triangles) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

}  // namespace caplab
