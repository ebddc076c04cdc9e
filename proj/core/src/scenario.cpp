#include "caplab/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include "caplab/fem.hpp"
#include "caplab/fields.hpp"
#include "caplab/pcg.hpp"
#include "caplab/quadrature.hpp"

namespace caplab {

namespace {

// Grid-sampled factor. Inside the grid it interpolates nodal values and their
// finite-difference derivatives; outside R_out it continues as 1 + beta/r.
class GridFactor final : public ConformalFactor {
 public:
  GridFactor(std::shared_ptr<const AnnularGrid> grid, std::vector<double> values)
      : grid_(grid), field_(grid, std::move(values)) {
    const AnnularGrid& g = *grid_;
    const auto& v = field_.values();
    double mean = 0.0, wsum = 0.0;
    for (std::size_t n = 0; n < v.size(); ++n) {
      const int id = static_cast<int>(n);
      if (!g.is_outer(id)) continue;
      mean += g.weight(id) * v[n];
      wsum += g.weight(id);
    }
    // Outer-shell weights are half-cell volumes, proportional to area there.
    beta_ = g.r_out() * (mean / wsum - 1.0);
    decay_ = std::abs(beta_);
    for (std::size_t n = 0; n < v.size(); ++n) {
      const int id = static_cast<int>(n);
      if (g.s_at(g.shell_of(id)) < 0.5) continue;
      decay_ = std::max(decay_, std::abs(v[n] - 1.0) * (g.position(id) - g.center()).norm());
    }
  }

  double value(const Vec3& x) const override {
    const double r = (x - grid_->center()).norm();
    if (r >= grid_->r_out()) return 1.0 + beta_ / r;
    const CellLocation loc = find(x);
    return field_.value(loc.cell, loc.ref);
  }
  Vec3 gradient(const Vec3& x) const override {
    const Vec3 d = x - grid_->center();
    const double r = d.norm();
    if (r >= grid_->r_out()) return -beta_ / (r * r * r) * d;
    const CellLocation loc = find(x);
    return field_.sample(loc.cell, loc.ref).grad;
  }
  Mat3 hessian(const Vec3& x) const override {
    const Vec3 d = x - grid_->center();
    const double r = d.norm();
    if (r >= grid_->r_out()) {
      const double r3 = r * r * r;
      return beta_ * (3.0 * d * d.transpose() / (r3 * r * r) - Mat3::Identity() / r3);
    }
    const CellLocation loc = find(x);
    return field_.sample(loc.cell, loc.ref).hess;
  }
  double decay_constant() const override { return decay_; }
  std::string kind() const override { return "synthesized"; }

 private:
  // Points inside the domain are pulled out to the boundary along their ray.
  CellLocation find(const Vec3& x) const {
    if (auto loc = grid_->locate(x)) return *loc;
    const Vec3 d = x - grid_->center();
    const double r = d.norm();
    const Vec3 w = r > 0.0 ? Vec3(d / r) : Vec3::UnitZ();
    const double rho = grid_->domain().radius(w);
    const Vec3 y = grid_->center() + std::clamp(r, rho, grid_->r_out()) * w;
    if (auto loc = grid_->locate(y)) return *loc;
    throw GeometryError("synthesized factor evaluated outside its grid");
  }

  std::shared_ptr<const AnnularGrid> grid_;
  NodalDerivatives field_;
  double beta_ = 0.0;
  double decay_ = 0.0;
};

void add_entry(CsrMatrix& k, int r, int c, double v) {
  const auto begin = k.col.begin() + k.row_ptr[r];
  const auto end = k.col.begin() + k.row_ptr[r + 1];
  const auto it = std::lower_bound(begin, end, c);
  k.val[static_cast<std::size_t>(it - k.col.begin())] += v;
}

RadialFunction constant_radius(double r) {
  return [r](const Vec3&) { return r; };
}

}  // namespace

MetricScenario make_ball(double radius, const Vec3& center) {
  if (!(radius > 0.0)) throw ScenarioError("ball radius must be positive");
  AnalyticReference ref;
  ref.potential = [radius, center](const Vec3& x) { return std::log((x - center).norm() / radius); };
  ref.capacity = radius;
  ref.m_adm = 0.0;
  std::ostringstream label;
  label << "ball R=" << radius;
  return MetricScenario{make_star_domain(constant_radius(radius), center), constant_factor(1.0),
                        label.str(), ref};
}

MetricScenario make_schwarzschild(double m, const Vec3& center) {
  if (!(m > 0.0)) throw ScenarioError("Schwarzschild mass must be positive");
  AnalyticReference ref;
  ref.potential = [m, center](const Vec3& x) { return std::log(2.0 * (x - center).norm() / m); };
  ref.capacity = 0.5 * m;
  ref.m_adm = m;
  std::ostringstream label;
  label << "schwarzschild m=" << m;
  return MetricScenario{make_star_domain(constant_radius(0.5 * m), center),
                        schwarzschild_factor(m, center), label.str(), ref};
}

FactorPtr synthesize_minimal_boundary_factor(const ImplicitDomain& domain, double r_out,
                                             const SynthesisOptions& opts) {
  auto grid = std::make_shared<const AnnularGrid>(build_grid(domain, r_out, opts.resolution));
  const AnnularGrid& g = *grid;

  for (int j = 0; j < g.ntheta(); ++j)
    for (int k = 0; k < g.nphi(); ++k) {
      const Vec3 w = direction(g.theta_at(j), g.phi_at(k));
      const double h = domain.mean_curvature(w);
      if (!(h > 0.0)) {
        std::ostringstream msg;
        msg << "minimal-boundary synthesis needs a mean-convex boundary; H = " << h
            << " at direction (" << w.transpose() << ")";
        throw ScenarioError(msg.str());
      }
    }

  const FemOperator fem(grid);
  CsrMatrix k;
  fem.assemble(std::vector<double>(fem.quad_count(), 1.0), k);
  std::vector<double> b(g.node_count(), 0.0);
  double nv[8];
  // Robin terms: -int (H/4) f v on the boundary, int (f - 1) v / R on the sphere.
  for (int side = 0; side < 2; ++side) {
    const bool outer = side == 1;
    for (const FacePoint& p : g.face_quadrature(outer)) {
      const Cell& cell = g.cells()[p.cell];
      const int nn = shape_functions(cell.kind, p.ref, nv, nullptr);
      double coeff;
      if (outer) {
        coeff = 1.0 / r_out;
      } else {
        const Vec3 d = p.x - g.center();
        coeff = -0.25 * domain.mean_curvature(d / d.norm());
      }
      for (int a = 0; a < nn; ++a) {
        if (outer) b[cell.nodes[a]] += coeff * nv[a] * p.da;
        for (int c = 0; c < nn; ++c)
          add_entry(k, cell.nodes[a], cell.nodes[c], coeff * nv[a] * nv[c] * p.da);
      }
    }
  }

  std::vector<double> f(g.node_count(), 1.0);
  PcgResult lin;
  try {
    lin = pcg_solve(k, b, f, opts.linear_tol, 1e-14, opts.max_linear);
  } catch (const SolverError& e) {
    throw SolverError(std::string("minimal-boundary synthesis: ") + e.what());
  }
  if (!lin.converged) {
    std::ostringstream msg;
    msg << "minimal-boundary synthesis: linear solve stagnated after " << lin.iterations
        << " iterations (relative residual " << lin.relative_residual << ")";
    throw SolverError(msg.str());
  }
  const auto it = std::min_element(f.begin(), f.end());
  if (!(*it > 0.0)) {
    std::ostringstream msg;
    msg << "minimal-boundary synthesis produced f = " << *it << " <= 0 at ("
        << g.position(static_cast<int>(it - f.begin())).transpose() << ")";
    throw ScenarioError(msg.str());
  }
  return std::make_shared<GridFactor>(grid, std::move(f));
}

AdmissibilityReport check_admissibility(const MetricScenario& scenario,
                                        const AdmissibilityOptions& opts) {
  const ImplicitDomain& dom = scenario.domain;
  const ConformalFactor& f = *scenario.factor;
  const Vec3 c = dom.center();
  AdmissibilityReport rep;
  rep.min_f = std::numeric_limits<double>::infinity();

  const SphereRule coarse = sphere_rule(8, 16);
  double max_hess = 0.0;
  rep.max_laplacian = -std::numeric_limits<double>::infinity();
  for (double factor : {1.02, 1.1, 1.5, 2.0, 4.0, 8.0, 16.0}) {
    for (const Vec3& w : coarse.directions) {
      const Vec3 x = c + factor * dom.radius(w) * w;
      const Mat3 h = f.hessian(x);
      rep.max_laplacian = std::max(rep.max_laplacian, h.trace());
      max_hess = std::max(max_hess, h.norm());
      rep.min_f = std::min(rep.min_f, f.value(x));
    }
  }
  rep.laplacian_tol = opts.laplacian_rel_tol * max_hess + 1e-12;
  rep.scalar_curvature_ok = rep.max_laplacian <= rep.laplacian_tol;
  if (!rep.scalar_curvature_ok) {
    std::ostringstream msg;
    msg << "sampled laplacian of f reaches " << rep.max_laplacian << " > " << rep.laplacian_tol
        << " (negative scalar curvature)";
    rep.warnings.push_back(msg.str());
  }

  bool finite = true;
  for (int m = 1; m <= 5; ++m) {
    DecayShell shell;
    // spaced by 4 so a limit c != 1 shows up as linear growth of |f - 1| r
    shell.radius = dom.bounding_radius() * std::ldexp(1.0, 2 * m);
    const double r = shell.radius;
    for (const Vec3& w : coarse.directions) {
      const Vec3 x = c + r * w;
      shell.c0 = std::max(shell.c0, std::abs(f.value(x) - 1.0) * r);
      shell.c1 = std::max(shell.c1, f.gradient(x).norm() * r * r);
      shell.c2 = std::max(shell.c2, f.hessian(x).norm() * r * r * r);
    }
    finite = finite && std::isfinite(shell.c0) && std::isfinite(shell.c1) &&
             std::isfinite(shell.c2);
    rep.decay.push_back(shell);
  }
  const DecayShell& in = rep.decay.front();
  const DecayShell& out = rep.decay.back();
  const double floor = 1e-9;
  rep.decay_ok = finite && std::isfinite(f.decay_constant()) && out.c0 <= opts.decay_growth * in.c0 + floor &&
                 out.c1 <= opts.decay_growth * in.c1 + floor &&
                 out.c2 <= opts.decay_growth * in.c2 + floor;
  if (!rep.decay_ok) {
    std::ostringstream msg;
    msg << "f does not decay to 1: |f - 1| r grows from " << in.c0 << " at r = " << in.radius
        << " to " << out.c0 << " at r = " << out.radius;
    rep.warnings.push_back(msg.str());
  }

  const SphereRule fine = sphere_rule(16, 32);
  for (const Vec3& w : fine.directions) {
    const Vec3 x = dom.boundary_point(w);
    const double fv = f.value(x);
    rep.min_f = std::min(rep.min_f, fv);
    if (!(fv > 0.0)) continue;
    const double h = dom.mean_curvature(w);
    const double fnu = f.gradient(x).dot(dom.normal(w));
    const double f2 = fv * fv;
    rep.max_abs_h_g = std::max(rep.max_abs_h_g, std::abs(h + 4.0 * fnu / fv) / f2);
    rep.boundary_h_scale = std::max(rep.boundary_h_scale, std::abs(h) / f2);
  }
  rep.positive = rep.min_f > 0.0;
  if (!rep.positive) rep.warnings.push_back("conformal factor is not positive");
  rep.minimal_ok = rep.max_abs_h_g <= opts.minimal_rel_tol * rep.boundary_h_scale;
  if (!rep.minimal_ok) {
    std::ostringstream msg;
    msg << "boundary is not g-minimal: max |H_g| = " << rep.max_abs_h_g
        << " against boundary H/f^2 up to " << rep.boundary_h_scale;
    rep.warnings.push_back(msg.str());
  }
  return rep;
}

}  // namespace caplab
