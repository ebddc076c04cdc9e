#include "caplab/capacity.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "caplab/parallel.hpp"
#include "caplab/quadrature.hpp"

namespace caplab {

ShellFit fit_far_field(const PotentialField& potential, const CapacityOptions& opts) {
  const AnnularGrid& g = *potential.grid;
  const NodalDerivatives& u = *potential.field;
  const int ns = g.ns();
  ShellFit fit;
  fit.r_out = g.r_out();
  fit.first_shell = static_cast<int>(std::ceil(2.0 * (ns - 1) / 3.0));
  fit.last_shell = ns - 4;
  require(fit.last_shell >= fit.first_shell + 1, "fit_far_field: grid has too few shells");

  // Each shell is replaced by the coordinate sphere about the star center at
  // the shell's mean radius; sphere means remove every l >= 1 harmonic.
  const SphereRule rule = sphere_rule(std::max(8, g.ntheta()), std::max(16, g.nphi()));
  double log_rho = 0.0;
  for (std::size_t q = 0; q < rule.weights.size(); ++q)
    log_rho += rule.weights[q] * std::log(g.domain().radius(rule.directions[q]));
  log_rho /= kFourPi;
  std::vector<double> radii, means;
  for (int i = fit.first_shell; i <= fit.last_shell; ++i) {
    const double s = g.s_at(i);
    const double r = std::exp((1.0 - s) * log_rho + s * std::log(g.r_out()));
    double acc = 0.0, wsum = 0.0;
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const Vec3 x = g.center() + r * rule.directions[q];
      const auto loc = g.locate(x);
      if (!loc) continue;
      acc += rule.weights[q] * (u.value(loc->cell, loc->ref) - std::log(r));
      wsum += rule.weights[q];
    }
    if (wsum < 0.999 * kFourPi) continue;
    radii.push_back(r);
    means.push_back(acc / wsum);
  }
  require(radii.size() >= 2, "fit_far_field: far-field spheres leave the grid");

  Eigen::Matrix2d normal = Eigen::Matrix2d::Zero();
  Eigen::Vector2d rhs = Eigen::Vector2d::Zero();
  for (std::size_t m = 0; m < radii.size(); ++m) {
    const Eigen::Vector2d phi(1.0, 1.0 / radii[m]);
    normal += phi * phi.transpose();
    rhs += means[m] * phi;
  }
  const Eigen::Vector2d coef = normal.ldlt().solve(rhs);
  fit.a = coef[0];
  fit.b = coef[1];
  double ss = 0.0;
  fit.shell_a.resize(radii.size());
  for (std::size_t m = 0; m < radii.size(); ++m) {
    const double e = means[m] - fit.a - fit.b / radii[m];
    ss += e * e;
    fit.shell_a[m] = means[m] - fit.b / radii[m];
  }
  fit.residual = std::sqrt(ss / radii.size());
  bool up = true, down = true;
  for (std::size_t m = 1; m < fit.shell_a.size(); ++m) {
    up = up && fit.shell_a[m] >= fit.shell_a[m - 1];
    down = down && fit.shell_a[m] <= fit.shell_a[m - 1];
  }
  const double spread = std::abs(fit.shell_a.back() - fit.shell_a.front());
  fit.drift = (up || down) && spread > opts.drift_threshold;
  return fit;
}

CapacityResult extract_asymptotic_constant(const PotentialField& potential,
                                           const CapacityOptions& opts) {
  const ShellFit fit = fit_far_field(potential, opts);
  CapacityResult res;
  res.a_hat = fit.a;
  res.capacity = std::exp(-fit.a);
  res.shell_fit_residual = fit.residual;
  res.r_out_pair = {fit.r_out, fit.r_out};
  res.a_pair = {fit.a, fit.a};
  res.low_confidence = fit.residual > opts.residual_threshold;
  res.truncation_dominated = fit.drift;
  return res;
}

CapacityResult combine_truncation_pair(const ShellFit& first, const ShellFit& second,
                                       const CapacityOptions& opts) {
  require(first.r_out > 0.0 && second.r_out > 0.0 && first.r_out != second.r_out,
          "combine_truncation_pair: need two distinct truncation radii");
  const double x1 = 1.0 / (first.r_out * first.r_out);
  const double x2 = 1.0 / (second.r_out * second.r_out);
  CapacityResult res;
  res.a_hat = (first.a * x2 - second.a * x1) / (x2 - x1);
  res.capacity = std::exp(-res.a_hat);
  res.shell_fit_residual = std::max(first.residual, second.residual);
  res.r_out_pair = {first.r_out, second.r_out};
  res.a_pair = {first.a, second.a};
  res.low_confidence = res.shell_fit_residual > opts.residual_threshold;
  res.truncation_dominated = first.drift || second.drift;
  return res;
}

double relative_capacity(const PotentialField& potential) {
  const AnnularGrid& g = *potential.grid;
  const auto& u = potential.values();
  return parallel_sum(g.cells().size(), [&](std::size_t c) {
    const Cell& cell = g.cells()[c];
    const RefQuadrature& rq = reference_quadrature(cell.kind);
    Vec3 grads[8];
    double acc = 0.0;
    for (std::size_t q = 0; q < rq.points.size(); ++q) {
      const int nn = shape_functions(cell.kind, rq.points[q], nullptr, grads);
      Vec3 gr = Vec3::Zero();
      for (int a = 0; a < nn; ++a) gr += u[cell.nodes[a]] * grads[a];
      const QuadPoint& qp = g.quad_points()[g.quad_offset(c) + q];
      const double gn = (qp.jinv.transpose() * gr).norm();
      acc += gn * gn * gn * qp.wdet;
    }
    return acc;
  });
}

double isocapacitary_lower_bound(double volume) {
  require(volume > 0.0, "isocapacitary_lower_bound: volume must be positive");
  return std::cbrt(3.0 * volume / kFourPi);
}

}  // namespace caplab
