#include "caplab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "caplab/level_surface.hpp"
#include "caplab/parallel.hpp"

namespace caplab {

namespace {

std::vector<double> coefficients(const std::vector<Vec3>& grads, double eps) {
  std::vector<double> sigma(grads.size());
  for (std::size_t q = 0; q < grads.size(); ++q)
    sigma[q] = std::sqrt(grads[q].squaredNorm() + eps * eps);
  return sigma;
}

std::vector<char> dirichlet_mask(const AnnularGrid& g) {
  std::vector<char> mask(g.node_count());
  for (std::size_t n = 0; n < mask.size(); ++n) {
    const int id = static_cast<int>(n);
    mask[n] = g.is_inner(id) || g.is_outer(id);
  }
  return mask;
}

struct ResidualParts {
  double residual;
  std::vector<double> boundary_load;  // K u_d on free rows
};

ResidualParts residual_parts(const CsrMatrix& k, const std::vector<double>& u,
                             const std::vector<char>& dir) {
  std::vector<double> ud(u.size(), 0.0), ku, kd;
  for (std::size_t n = 0; n < u.size(); ++n)
    if (dir[n]) ud[n] = u[n];
  k.multiply(u, ku);
  k.multiply(ud, kd);
  double num = 0.0, den = 0.0;
  for (std::size_t n = 0; n < u.size(); ++n) {
    if (dir[n]) {
      kd[n] = 0.0;
      continue;
    }
    num += ku[n] * ku[n];
    den += kd[n] * kd[n];
  }
  return {den > 0.0 ? std::sqrt(num / den) : std::sqrt(num), std::move(kd)};
}

std::string history_text(const std::vector<double>& h) {
  std::ostringstream out;
  const std::size_t first = h.size() > 8 ? h.size() - 8 : 0;
  out << "[";
  for (std::size_t i = first; i < h.size(); ++i) out << (i > first ? ", " : "") << h[i];
  out << "]";
  return out.str();
}

}  // namespace

void SolverConfig::validate() const {
  for (std::size_t i = 0; i < epsilon_schedule.size(); ++i) {
    require(epsilon_schedule[i] > 0.0, "solver config: epsilon schedule must be positive");
    require(i == 0 || epsilon_schedule[i] < epsilon_schedule[i - 1],
            "solver config: epsilon schedule must be strictly decreasing");
  }
  require(picard_tol > 0.0 && linear_tol_factor > 0.0 && stage_tol > 0.0,
          "solver config: tolerances must be positive");
  require(max_picard > 0 && max_linear > 0, "solver config: iteration caps must be positive");
  require(damping > 0.0 && damping <= 1.0, "solver config: damping must lie in (0, 1]");
  require(stage_factor > 0.0 && stage_factor < 1.0, "solver config: stage factor in (0, 1)");
  require(terminal_factor > 0.0, "solver config: terminal factor must be positive");
}

double PotentialField::max_value() const {
  const auto& v = values();
  return *std::max_element(v.begin(), v.end());
}

double regularized_energy(const FemOperator& fem, const std::vector<double>& u, double eps) {
  const std::vector<Vec3> grads = fem.quad_gradients(u);
  std::vector<double> density(grads.size());
  for (std::size_t q = 0; q < grads.size(); ++q) {
    const double s = grads[q].squaredNorm() + eps * eps;
    density[q] = s * std::sqrt(s) / 3.0;
  }
  return fem.integrate(density);
}

double picard_residual(const FemOperator& fem, const std::vector<double>& u, double eps) {
  CsrMatrix k;
  fem.assemble(coefficients(fem.quad_gradients(u), eps), k);
  return residual_parts(k, u, dirichlet_mask(fem.grid())).residual;
}

PotentialField potential_from_values(std::shared_ptr<const AnnularGrid> grid,
                                     std::vector<double> values, double epsilon) {
  PotentialField p;
  p.grid = grid;
  p.epsilon = epsilon;
  double outer = 0.0;
  for (std::size_t n = 0; n < values.size(); ++n)
    if (grid->is_outer(static_cast<int>(n))) outer = std::max(outer, values[n]);
  p.outer_value = outer;
  p.field = std::make_shared<NodalDerivatives>(grid, std::move(values));
  p.converged = true;
  return p;
}

PotentialField solve_annulus(std::shared_ptr<const AnnularGrid> grid, double outer_value,
                             const SolverConfig& config) {
  config.validate();
  require(outer_value > 0.0, "solve_annulus: outer value must be positive");
  const AnnularGrid& g = *grid;
  const FemOperator fem(grid);
  const std::size_t n = g.node_count();
  const std::vector<char> dir = dirichlet_mask(g);

  std::vector<double> u(n);
  for (std::size_t m = 0; m < n; ++m)
    u[m] = outer_value * g.s_at(g.shell_of(static_cast<int>(m)));

  std::vector<double> schedule = config.epsilon_schedule;
  if (schedule.empty()) {
    const std::vector<Vec3> g0 = fem.quad_gradients(u);
    double gmax = 0.0, gmin = std::numeric_limits<double>::infinity();
    for (const Vec3& v : g0) {
      gmax = std::max(gmax, v.norm());
      gmin = std::min(gmin, v.norm());
    }
    const double terminal = config.terminal_factor * gmin;
    for (double e = gmax; e > terminal; e *= config.stage_factor) schedule.push_back(e);
    schedule.push_back(terminal);
  }

  PotentialField out;
  out.grid = grid;
  out.outer_value = outer_value;
  out.epsilon_stages = schedule;
  CsrMatrix k, a;
  std::vector<double> b(n), v(n), trial(n);
  double residual = 0.0;
  bool terminal_converged = false;
  for (std::size_t st = 0; st < schedule.size(); ++st) {
    const double eps = schedule[st];
    const bool terminal = st + 1 == schedule.size();
    const double tol = terminal ? config.picard_tol : std::max(config.picard_tol, config.stage_tol);
    double energy = regularized_energy(fem, u, eps);
    for (int it = 0; it < config.max_picard; ++it) {
      fem.assemble(coefficients(fem.quad_gradients(u), eps), k);
      ResidualParts parts = residual_parts(k, u, dir);
      residual = parts.residual;
      out.residual_history.push_back(residual);
      out.energy_history.push_back(energy);
      if (residual <= tol) {
        if (terminal) terminal_converged = true;
        break;
      }
      a = k;
      for (int r = 0; r < a.n; ++r) {
        for (int p = a.row_ptr[r]; p < a.row_ptr[r + 1]; ++p) {
          if (dir[r])
            a.val[p] = a.col[p] == r ? 1.0 : 0.0;
          else if (dir[a.col[p]])
            a.val[p] = 0.0;
        }
        b[r] = dir[r] ? u[r] : -parts.boundary_load[r];
      }
      v = u;
      const PcgResult lin = pcg_solve(a, b, v, config.linear_tol_factor, 1e-15, config.max_linear);
      out.linear_iterations += lin.iterations;
      ++out.iterations;

      bool accepted = false;
      for (double omega = config.damping; omega >= config.damping / 1024.0; omega *= 0.5) {
        for (std::size_t m = 0; m < n; ++m) trial[m] = u[m] + omega * (v[m] - u[m]);
        const double e_trial = regularized_energy(fem, trial, eps);
        if (e_trial <= energy + 1e-13 * std::abs(energy)) {
          u.swap(trial);
          energy = e_trial;
          accepted = true;
          break;
        }
      }
      if (!accepted) break;
    }
  }
  if (!terminal_converged) {
    std::ostringstream msg;
    msg << "Picard iteration did not reach tolerance " << config.picard_tol
        << " (final residual " << residual << "); residual history tail "
        << history_text(out.residual_history);
    throw SolverError(msg.str());
  }
  out.residual_norm = residual;
  out.epsilon = schedule.back();
  out.converged = true;
  out.field = std::make_shared<NodalDerivatives>(grid, std::move(u));
  return out;
}

double regularized_flux(const PotentialField& potential, double t) {
  ExtractionOptions opts;
  opts.vertex_fields = false;
  const LevelSurface s = extract_level_surface(*potential.field, t, opts);
  const double eps = potential.epsilon;
  return s.integrate([eps](const SurfaceSample& q) {
    const double g = q.geo.grad_norm;
    return std::sqrt(g * g + eps * eps) * g;
  });
}

void compute_flux_table(PotentialField& potential, int count, double lo, double hi) {
  require(count >= 1 && lo > 0.0 && hi > lo, "compute_flux_table: invalid level range");
  const AnnularGrid& g = *potential.grid;
  const auto& val = potential.values();
  double limit = std::numeric_limits<double>::infinity();
  for (int j = 0; j < g.ntheta(); ++j)
    for (int k = 0; k < g.nphi(); ++k) limit = std::min(limit, val[g.node_id(g.ns() - 2, j, k)]);
  limit = std::min({limit, val[g.north_pole(g.ns() - 2)], val[g.south_pole(g.ns() - 2)]});
  potential.flux_table.clear();
  ExtractionOptions opts;
  opts.vertex_fields = false;
  const double eps = potential.epsilon;
  for (int m = 0; m < count; ++m) {
    const double frac = count == 1 ? lo : lo + (hi - lo) * m / (count - 1);
    const double t = frac * potential.outer_value;
    if (!(t < limit)) continue;
    const LevelSurface s = extract_level_surface(*potential.field, t, opts);
    FluxSample f;
    f.t = t;
    f.flux = s.integrate([](const SurfaceSample& q) {
      return q.geo.grad_norm * q.geo.grad_norm;
    });
    f.regularized_flux = s.integrate([eps](const SurfaceSample& q) {
      const double gn = q.geo.grad_norm;
      return std::sqrt(gn * gn + eps * eps) * gn;
    });
    potential.flux_table.push_back(f);
  }
}

PotentialField normalize_to_log_growth(const PotentialField& potential) {
  PotentialField p = potential;
  if (p.flux_table.empty()) compute_flux_table(p);
  std::vector<double> fluxes;
  for (const FluxSample& f : p.flux_table) fluxes.push_back(f.flux);
  if (fluxes.empty()) throw SolverError("normalization: no admissible flux levels");
  std::sort(fluxes.begin(), fluxes.end());
  const std::size_t m = fluxes.size();
  const double median = m % 2 ? fluxes[m / 2] : 0.5 * (fluxes[m / 2 - 1] + fluxes[m / 2]);
  if (!(median > 0.0)) throw SolverError("normalization: non-positive flux");
  const double lambda = std::sqrt(kFourPi / median);
  std::vector<double> values = potential.values();
  for (double& x : values) x *= lambda;
  p.field = std::make_shared<NodalDerivatives>(p.grid, std::move(values));
  p.normalization *= lambda;
  p.epsilon *= lambda;
  p.outer_value *= lambda;
  for (FluxSample& f : p.flux_table) {
    f.t *= lambda;
    f.flux *= lambda * lambda;
    f.regularized_flux *= lambda * lambda;
  }
  return p;
}

double flux_spread(const PotentialField& potential) {
  if (potential.flux_table.empty()) return 0.0;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0;
  for (const FluxSample& f : potential.flux_table) {
    lo = std::min(lo, f.flux);
    hi = std::max(hi, f.flux);
    sum += f.flux;
  }
  return (hi - lo) / (sum / potential.flux_table.size());
}

}  // namespace caplab
