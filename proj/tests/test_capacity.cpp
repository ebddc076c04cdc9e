#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "caplab/capacity.hpp"
#include "caplab/quadrature.hpp"
#include "caplab/scenario.hpp"

using namespace caplab;

namespace {

struct Solved {
  PotentialField potential;  // normalized, larger truncation radius
  CapacityResult capacity;
};

Solved capacity_of(const ImplicitDomain& dom, GridResolution res = {32, 12, 24}) {
  Solved out;
  std::array<ShellFit, 2> fits;
  const double rb = dom.bounding_radius();
  for (int k = 0; k < 2; ++k) {
    auto g = std::make_shared<const AnnularGrid>(build_grid(dom, (k ? 64.0 : 32.0) * rb, res));
    PotentialField p = solve_annulus(g, 1.0, {});
    compute_flux_table(p);
    out.potential = normalize_to_log_growth(p);
    fits[k] = fit_far_field(out.potential);
  }
  out.capacity = combine_truncation_pair(fits[0], fits[1]);
  return out;
}

ImplicitDomain ball(double r, const Vec3& c = Vec3::Zero()) {
  return make_star_domain([r](const Vec3&) { return r; }, c);
}

ImplicitDomain ellipsoid(double a) {
  return make_star_domain(ellipsoid_graph(Vec3(a, 1.0, 1.0)), Vec3::Zero());
}

}  // namespace

TEST(Capacity, UnitBall) {
  const Solved s = capacity_of(ball(1.0));
  EXPECT_NEAR(s.capacity.capacity, 1.0, 1e-3);
  EXPECT_NEAR(s.capacity.a_hat, 0.0, 1e-3);
  EXPECT_FALSE(s.capacity.low_confidence);
  EXPECT_LT(s.capacity.shell_fit_residual, 1e-3);
  // truncation radii are multiples of the bounding radius
  const double rb = ball(1.0).bounding_radius();
  EXPECT_DOUBLE_EQ(s.capacity.r_out_pair[0], 32.0 * rb);
  EXPECT_DOUBLE_EQ(s.capacity.r_out_pair[1], 64.0 * rb);
}

TEST(Capacity, BallOfRadiusR) {
  for (double r : {0.5, 3.0}) {
    const Solved s = capacity_of(ball(r));
    EXPECT_NEAR(s.capacity.capacity / r, 1.0, 2e-3);
    EXPECT_NEAR(s.capacity.a_hat, -std::log(r), 2e-3);
  }
}

TEST(Capacity, SchwarzschildChart) {
  // the capacity depends on the domain only: B_{m/2} with m = 2
  const MetricScenario sc = make_schwarzschild(2.0);
  const Solved s = capacity_of(sc.domain);
  EXPECT_NEAR(s.capacity.capacity, sc.reference->capacity, 2e-3);
}

TEST(Capacity, TranslationInvariance) {
  const Solved a = capacity_of(ellipsoid(1.2));
  const Solved b = capacity_of(make_star_domain(ellipsoid_graph(Vec3(1.2, 1.0, 1.0)),
                                                Vec3(4.0, -2.0, 1.0)));
  EXPECT_NEAR(a.capacity.capacity, b.capacity.capacity, 1e-6);
}

TEST(Capacity, SingleTruncation) {
  auto g = std::make_shared<const AnnularGrid>(build_grid(ball(1.0), 32.0, {32, 12, 24}));
  PotentialField p = solve_annulus(g, 1.0, {});
  compute_flux_table(p);
  const CapacityResult c = extract_asymptotic_constant(normalize_to_log_growth(p));
  EXPECT_NEAR(c.capacity, 1.0, 2e-3);
  EXPECT_GT(c.capacity, 0.0);
}

TEST(Capacity, ExtrapolationIsLinearInInverseSquare) {
  ShellFit f1, f2;
  f1.r_out = 10.0;
  f1.a = 0.1 + 5.0 / 100.0;
  f2.r_out = 20.0;
  f2.a = 0.1 + 5.0 / 400.0;
  const CapacityResult c = combine_truncation_pair(f1, f2);
  EXPECT_NEAR(c.a_hat, 0.1, 1e-14);
  EXPECT_NEAR(c.capacity, std::exp(-0.1), 1e-14);
  EXPECT_THROW(combine_truncation_pair(f1, f1), std::invalid_argument);
}

TEST(Capacity, IsocapacitaryBound) {
  EXPECT_NEAR(isocapacitary_lower_bound(4.0 * kPi / 3.0), 1.0, 1e-14);
  EXPECT_NEAR(isocapacitary_lower_bound(32.0 * kPi / 3.0), 2.0, 1e-14);
  EXPECT_THROW(isocapacitary_lower_bound(0.0), std::invalid_argument);
  const ImplicitDomain dom = ellipsoid(1.2);
  const Solved s = capacity_of(dom);
  EXPECT_GT(s.capacity.capacity, isocapacitary_lower_bound(dom.volume()));
}

TEST(Capacity, MonotoneUnderInclusion) {
  const double c_small = capacity_of(ball(0.9)).capacity.capacity;
  const double c_ball = capacity_of(ball(1.0)).capacity.capacity;
  const double c_ell = capacity_of(ellipsoid(1.2)).capacity.capacity;
  const double tol = 1e-3;
  EXPECT_LE(c_small, c_ball + tol);
  EXPECT_LE(c_ball, c_ell + tol);
  EXPECT_GT(c_ell, c_ball + 0.03);
}

TEST(Capacity, SublevelSetRescaling) {
  // c({u <= t}) = e^t c(Omega)
  const ImplicitDomain dom = ellipsoid(1.2);
  const Solved s = capacity_of(dom, {48, 18, 36});
  const double t = 0.5;
  auto field = s.potential.field;
  const Vec3 c = dom.center();
  auto level = [field, c, dom, t](const Vec3& w) {
    double lo = dom.radius(w), hi = 4.0 * lo;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      const auto f = field->sample_at(c + mid * w);
      if (f && f->value < t)
        lo = mid;
      else
        hi = mid;
    }
    return 0.5 * (lo + hi);
  };
  // project the level radius onto harmonics so the new grid sees a smooth graph
  const int l_max = 12;
  std::vector<double> coeffs((l_max + 1) * (l_max + 1), 0.0);
  const SphereRule rule = sphere_rule(32, 64);
  for (std::size_t q = 0; q < rule.directions.size(); ++q) {
    const Vec3& w = rule.directions[q];
    const double theta = std::acos(std::clamp(w.z(), -1.0, 1.0));
    const double phi = std::atan2(w.y(), w.x());
    const std::vector<double> y = real_spherical_harmonics(l_max, theta, phi);
    const double r = level(w);
    for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] += rule.weights[q] * r * y[i];
  }
  const ImplicitDomain sub = make_star_domain(spherical_harmonic_graph(l_max, coeffs), c);
  EXPECT_NEAR(sub.radius(Vec3(1, 0, 0)), level(Vec3(1, 0, 0)), 1e-3);
  const Solved s2 = capacity_of(sub, {32, 12, 24});
  EXPECT_NEAR(s2.capacity.capacity / (std::exp(t) * s.capacity.capacity), 1.0, 5e-3);
}
