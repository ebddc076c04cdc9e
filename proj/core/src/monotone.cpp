#include "caplab/monotone.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace caplab {

double schwarzschild_model_U(double t) {
  // tanh form stays accurate for large t.
  return kEightPi * std::tanh(0.5 * t);
}

double compute_Q(double t, double u_value) {
  const double et = std::exp(t), emt = std::exp(-t);
  return kEightPi * (et + 2.0 - emt) - (et + 1.0) * (et + 1.0) * emt * u_value;
}

double U_from_Q(double t, double q_value) {
  const double et = std::exp(t), emt = std::exp(-t);
  return (kEightPi * (et + 2.0 - emt) - q_value) / ((et + 1.0) * (et + 1.0) * emt);
}

UValue compute_U(const GMetricSurface& g) {
  return {g.u_integral, g.u_integral_euclidean, std::abs(g.u_integral - g.u_integral_euclidean)};
}

namespace {

MonotoneSample make_sample(const LevelSurface& s, const GMetricSurface& g) {
  MonotoneSample m;
  m.t = s.t;
  m.U = compute_U(g).value;
  m.u_consistency = compute_U(g).consistency;
  m.Q = compute_Q(s.t, m.U);
  m.area_euc = s.area();
  m.area_g = g.area_g;
  m.hawking_mass = hawking_mass(g);
  m.ring_integral = g.ring_integral;
  m.gauss_curvature_integral = s.integral_gauss_curvature();
  m.components = s.component_count;
  m.euler_characteristic = s.euler_characteristic;
  m.masked_fraction = s.masked_fraction;
  m.flagged = s.flagged || s.component_count != 1 || s.boundary_edges != 0;
  return m;
}

}  // namespace

MonotoneSeries monotone_series(const PotentialField& potential, const ConformalFactor& factor,
                               const SeriesOptions& opts) {
  require(opts.count >= 2 && opts.t_min > 0.0 && opts.max_fraction > 0.0,
          "monotone_series: invalid level options");
  const AnnularGrid& g = *potential.grid;
  const auto& val = potential.values();
  double limit = std::numeric_limits<double>::infinity();
  for (int j = 0; j < g.ntheta(); ++j)
    for (int k = 0; k < g.nphi(); ++k) limit = std::min(limit, val[g.node_id(g.ns() - 2, j, k)]);
  limit = std::min({limit, val[g.north_pole(g.ns() - 2)], val[g.south_pole(g.ns() - 2)]});

  MonotoneSeries series;
  auto add = [&](const LevelSurface& s) {
    const GMetricSurface gq = g_metric_quantities(s, factor);
    if (opts.on_surface) opts.on_surface(s, gq);
    series.samples.push_back(make_sample(s, gq));
    series.model_U.push_back(schwarzschild_model_U(s.t));
  };
  if (opts.include_boundary) add(boundary_surface(*potential.field));
  const double t_max = opts.max_fraction * potential.max_value();
  for (int m = 0; m < opts.count; ++m) {
    const double t = opts.t_min + (t_max - opts.t_min) * m / (opts.count - 1);
    if (!(t < limit) || t <= 0.0) continue;
    add(extract_level_surface(*potential.field, t));
  }
  return series;
}

MonotonicityReport monotonicity_report(const MonotoneSeries& series,
                                       const MonotonicityTolerances& tol,
                                       std::optional<double> trend_bound) {
  std::vector<const MonotoneSample*> used;
  for (const MonotoneSample& s : series.samples)
    if (!s.flagged) used.push_back(&s);
  MonotonicityReport rep;
  rep.unflagged = static_cast<int>(used.size());
  if (used.size() < 5) {
    std::ostringstream msg;
    msg << "monotonicity report needs at least 5 unflagged samples, got " << used.size();
    throw Error(msg.str());
  }
  rep.trend_bound = trend_bound;
  const double inf = std::numeric_limits<double>::infinity();
  rep.q_monotone.margin = rep.u_bound.margin = rep.ode.margin = inf;

  for (std::size_t i = 0; i < used.size(); ++i) {
    const MonotoneSample& s = *used[i];
    rep.max_q_deviation = std::max(rep.max_q_deviation, std::abs(s.Q - kSixteenPi));
    const double du = schwarzschild_model_U(s.t) + tol.u - s.U;
    rep.u_bound.margin = std::min(rep.u_bound.margin, du);
    ++rep.u_bound.checked;
    if (s.t > 0.0) rep.trend.push_back({s.t, std::exp(s.t) * (kEightPi - s.U)});
    if (i + 1 < used.size()) {
      const double dq = used[i + 1]->Q - s.Q;
      rep.max_q_decrease = std::max(rep.max_q_decrease, -dq);
      rep.q_monotone.margin = std::min(rep.q_monotone.margin, dq + tol.q);
      ++rep.q_monotone.checked;
    }
    if (i > 0 && i + 1 < used.size()) {
      const MonotoneSample& a = *used[i - 1];
      const MonotoneSample& b = *used[i + 1];
      // Three-point derivative on a non-uniform stencil.
      const double h0 = s.t - a.t, h1 = b.t - s.t;
      const double du_dt = (-h1 / (h0 * (h0 + h1))) * a.U +
                           ((h1 - h0) / (h0 * h1)) * s.U + (h0 / (h1 * (h0 + h1))) * b.U;
      const double lhs = du_dt + s.U * s.U / kSixteenPi;
      rep.ode.margin = std::min(rep.ode.margin, kFourPi + tol.ode - lhs);
      ++rep.ode.checked;
    }
  }
  rep.q_monotone.pass = rep.q_monotone.margin >= 0.0;
  rep.u_bound.pass = rep.u_bound.margin >= 0.0;
  rep.ode.pass = rep.ode.margin >= 0.0;
  return rep;
}

StabilityExcess stability_excess(const MonotoneSeries& series, double s_max) {
  require(s_max >= 0.0, "stability_excess: s_max must be non-negative");
  StabilityExcess out;
  if (s_max == 0.0) return out;
  std::vector<std::pair<double, double>> pts;
  for (const MonotoneSample& s : series.samples) {
    if (s.flagged || s.t > s_max) continue;
    const double w = (std::exp(s.t) + 1.0) * (std::exp(s.t) + 1.0) * std::exp(-s.t);
    pts.emplace_back(s.t, w * s.ring_integral);
  }
  double gap = 0.0, prev = 0.0;
  for (const auto& p : pts) {
    gap = std::max(gap, p.first - prev);
    prev = p.first;
  }
  gap = std::max(gap, s_max - prev);
  out.low_confidence = gap > 0.5 * s_max;
  for (std::size_t i = 1; i < pts.size(); ++i)
    out.value += 0.5 * (pts[i].first - pts[i - 1].first) * (pts[i].second + pts[i - 1].second);
  return out;
}

}  // namespace caplab
