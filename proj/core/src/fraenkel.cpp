#include "caplab/fraenkel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "caplab/capacity.hpp"
#include "caplab/parallel.hpp"

namespace caplab {

namespace {

struct Voxels {
  std::vector<Vec3> pos;
  std::vector<double> occ;
  double h = 0.0;
};

// Fractional occupancy 1/2 - d/h from the signed distance d to the boundary,
// estimated as phi / |grad phi| near it.
Voxels voxelize(const ImplicitDomain& dom, int n) {
  const double half = dom.bounding_radius() * 1.02;
  Voxels v;
  v.h = 2.0 * half / n;
  const double h = v.h;
  const std::size_t total = static_cast<std::size_t>(n) * n * n;
  std::vector<double> occ(total, 0.0);
  auto point = [&](std::size_t idx) {
    const int i = static_cast<int>(idx / (static_cast<std::size_t>(n) * n));
    const int j = static_cast<int>((idx / n) % n);
    const int k = static_cast<int>(idx % n);
    return Vec3(dom.center() + Vec3(-half + (i + 0.5) * h, -half + (j + 0.5) * h,
                                    -half + (k + 0.5) * h));
  };
  parallel_for(total, [&](std::size_t idx) {
    const Vec3 x = point(idx);
    double d = dom.implicit(x);
    if (std::abs(d) < 2.0 * h) {
      const double e = 0.25 * h;
      Vec3 g;
      for (int a = 0; a < 3; ++a) {
        Vec3 da = Vec3::Zero();
        da[a] = e;
        g[a] = (dom.implicit(x + da) - dom.implicit(x - da)) / (2.0 * e);
      }
      d /= std::max(g.norm(), 1e-12);
    }
    occ[idx] = std::clamp(0.5 - d / h, 0.0, 1.0);
  });
  for (std::size_t idx = 0; idx < total; ++idx) {
    if (occ[idx] <= 0.0) continue;
    v.pos.push_back(point(idx));
    v.occ.push_back(occ[idx]);
  }
  return v;
}

double intersection(const Voxels& v, const Vec3& z, double radius) {
  const double h = v.h;
  const double sum = parallel_sum(v.pos.size(), [&](std::size_t q) {
    const double d = (v.pos[q] - z).norm() - radius;
    if (d >= 0.5 * h) return 0.0;
    return std::min(v.occ[q], std::clamp(0.5 - d / h, 0.0, 1.0));
  });
  return sum * h * h * h;
}

}  // namespace

FraenkelResult fraenkel_asymmetry(const ImplicitDomain& domain, const FraenkelOptions& opts) {
  require(opts.voxels >= 8 && opts.coarse >= 1 && opts.refine_rounds >= 0,
          "fraenkel_asymmetry: invalid options");
  FraenkelResult out;
  out.volume = domain.volume();
  out.radius = isocapacitary_lower_bound(out.volume);
  const Voxels vox = voxelize(domain, opts.voxels);
  auto objective = [&](const Vec3& z) { return -intersection(vox, z, out.radius); };

  // Candidate centers: the bounding cube inflated by one radius.
  const double half = domain.bounding_radius() + out.radius;
  const double step = opts.coarse > 1 ? 2.0 * half / (opts.coarse - 1) : 0.0;
  Vec3 best = domain.center();
  double best_val = objective(best);
  for (int i = 0; i < opts.coarse; ++i)
    for (int j = 0; j < opts.coarse; ++j)
      for (int k = 0; k < opts.coarse; ++k) {
        const Vec3 z = opts.coarse > 1
                           ? Vec3(domain.center() + Vec3(-half + i * step, -half + j * step,
                                                         -half + k * step))
                           : domain.center();
        const double val = objective(z);
        if (val < best_val) {
          best_val = val;
          best = z;
        }
      }

  const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  double width = std::max(step, vox.h);
  const double tol = 0.02 * vox.h;
  for (int round = 0; round < opts.refine_rounds; ++round) {
    for (int axis = 0; axis < 3; ++axis) {
      auto along = [&](double t) {
        Vec3 z = best;
        z[axis] = t;
        return objective(z);
      };
      double a = best[axis] - width, b = best[axis] + width;
      double c = b - ratio * (b - a), d = a + ratio * (b - a);
      double fc = along(c), fd = along(d);
      while (b - a > tol) {
        if (fc < fd) {
          b = d;
          d = c;
          fd = fc;
          c = b - ratio * (b - a);
          fc = along(c);
        } else {
          a = c;
          c = d;
          fc = fd;
          d = a + ratio * (b - a);
          fd = along(d);
        }
      }
      const double t = 0.5 * (a + b);
      const double ft = along(t);
      if (ft < best_val) {
        best_val = ft;
        best[axis] = t;
      }
    }
    width *= 0.5;
  }
  out.center = best;
  out.alpha = std::max(0.0, 2.0 + 2.0 * best_val / out.volume);
  return out;
}

}  // namespace caplab
