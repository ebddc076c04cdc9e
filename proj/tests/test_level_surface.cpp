#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "caplab/level_surface.hpp"
#include "caplab/quadrature.hpp"
#include "caplab/solver.hpp"

using namespace caplab;

namespace {

std::shared_ptr<const AnnularGrid> ball_grid(double r_out, GridResolution res) {
  auto dom = make_star_domain([](const Vec3&) { return 1.0; }, Vec3::Zero());
  return std::make_shared<const AnnularGrid>(build_grid(dom, r_out, res));
}

NodalDerivatives log_r_field(std::shared_ptr<const AnnularGrid> g) {
  auto values = g->sample([](const Vec3& x) { return std::log(x.norm()); });
  return NodalDerivatives(g, std::move(values));
}

class NegativeFactor : public ConformalFactor {
 public:
  double value(const Vec3&) const override { return -1.0; }
  double decay_constant() const override { return 0.0; }
  std::string kind() const override { return "negative"; }
};

}  // namespace

TEST(PointGeometry, AlgebraicIdentity) {
  std::mt19937 rng(3);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 200; ++trial) {
    const Vec3 grad(n(rng), n(rng), n(rng));
    Mat3 h;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) h(a, b) = n(rng);
    h = 0.5 * (h + h.transpose()).eval();
    const PointGeometry p = level_set_geometry(grad, h);
    EXPECT_NEAR(p.norm_a2, p.traceless2 + 0.5 * p.mean_curvature * p.mean_curvature,
                1e-12 * (1.0 + p.norm_a2));
    EXPECT_GE(p.traceless2, 0.0);
    // K = (H^2 - |A|^2) / 2 for a 2x2 shape operator
    EXPECT_NEAR(p.gauss_curvature,
                0.5 * (p.mean_curvature * p.mean_curvature - p.norm_a2),
                1e-12 * (1.0 + p.norm_a2));
  }
}

TEST(PointGeometry, RoundSphere) {
  // u = |x| at x = (0,0,R): grad = e_z, hess = (I - e_z e_z)/R
  const double r = 2.5;
  const Vec3 grad(0, 0, 1);
  Mat3 h = Mat3::Identity() / r;
  h(2, 2) = 0.0;
  const PointGeometry p = level_set_geometry(grad, h);
  EXPECT_NEAR(p.mean_curvature, 2.0 / r, 1e-14);
  EXPECT_NEAR(p.traceless2, 0.0, 1e-14);
  EXPECT_NEAR(p.gauss_curvature, 1.0 / (r * r), 1e-14);
}

TEST(LevelSurface, LogPotentialSphere) {
  auto g = ball_grid(64.0, {48, 16, 32});
  const NodalDerivatives u = log_r_field(g);
  const LevelSurface s = extract_level_surface(u, 1.0);
  const double e = std::exp(1.0);
  EXPECT_NEAR(s.area() / (kFourPi * e * e), 1.0, 1e-2);
  EXPECT_EQ(s.component_count, 1);
  EXPECT_EQ(s.euler_characteristic, 2);
  EXPECT_EQ(s.boundary_edges, 0);
  EXPECT_TRUE(s.regular);
  EXPECT_FALSE(s.flagged);
  for (const Vec3& v : s.vertices) EXPECT_NEAR(v.norm(), e, 1e-2 * e);
  // Schwarzschild m = 2 uses u = log r as well: t = log 2 is r = 2
  const LevelSurface s2 = extract_level_surface(u, std::log(2.0));
  EXPECT_NEAR(s2.area() / (kFourPi * 4.0), 1.0, 1e-2);
}

TEST(LevelSurface, CurvaturesOfRoundLevelSet) {
  auto g = ball_grid(64.0, {48, 16, 32});
  const NodalDerivatives u = log_r_field(g);
  const double t = 1.5, r = std::exp(t);
  const LevelSurface s = extract_level_surface(u, t);
  EXPECT_NEAR(s.integral_gauss_curvature() / kFourPi, 1.0, 0.02);
  EXPECT_LT(s.integral_traceless(), 1e-3);
  const double h_mean =
      s.integrate([](const SurfaceSample& q) { return q.geo.mean_curvature; }) / s.area();
  EXPECT_NEAR(h_mean * r / 2.0, 1.0, 1e-2);
  const SecondFundamentalForm sff = second_fundamental_form(s);
  ASSERT_EQ(sff.gauss_curvature.size(), s.vertices.size());
  for (std::size_t v = 0; v < s.vertices.size(); ++v) {
    EXPECT_NEAR(sff.gauss_curvature[v] * r * r, 1.0, 0.05);
    EXPECT_LT(sff.traceless2[v] * r * r, 0.01);
  }
}

TEST(LevelSurface, RejectsOutOfRange) {
  auto g = ball_grid(16.0, {16, 8, 16});
  const NodalDerivatives u = log_r_field(g);
  EXPECT_THROW(extract_level_surface(u, 0.0), GeometryError);
  EXPECT_THROW(extract_level_surface(u, std::log(16.0) + 0.01), GeometryError);
  EXPECT_THROW(extract_level_surface(u, -1.0), GeometryError);
}

TEST(MeanCurvatureField, LogPotential) {
  auto g = ball_grid(32.0, {40, 16, 32});
  const auto values = g->sample([](const Vec3& x) { return std::log(x.norm()); });
  const MeanCurvatureField mc = mean_curvature_field(*g, values);
  double worst = 0.0, worst_id = 0.0;
  for (int i = 1; i < g->ns() - 1; ++i)
    for (int j = 0; j < g->ntheta(); ++j)
      for (int k = 0; k < g->nphi(); ++k) {
        const int n = g->node_id(i, j, k);
        const double r = g->position(n).norm();
        worst = std::max(worst, std::abs(mc.h[n] * r / 2.0 - 1.0));
        worst_id = std::max(worst_id, std::abs(mc.identity_h[n] * r / 2.0 - 1.0));
      }
  EXPECT_LT(worst, 0.02);
  EXPECT_LT(worst_id, 0.02);
  EXPECT_LT(mc.max_discrepancy, 0.05);
}

TEST(LevelSurface, PerturbedSphereTopology) {
  std::vector<double> c(9, 0.0);
  c[sh_index(2, 0)] = 0.2;
  auto dom = make_star_domain(spherical_harmonic_graph(2, c, 1.0), Vec3::Zero());
  auto g = std::make_shared<const AnnularGrid>(build_grid(dom, 32.0, {32, 12, 24}));
  PotentialField p = solve_annulus(g, 1.0, {});
  compute_flux_table(p);
  const PotentialField q = normalize_to_log_growth(p);
  for (double t : {0.05, 0.2, 1.0}) {
    const LevelSurface s = extract_level_surface(*q.field, t);
    EXPECT_EQ(s.component_count, 1) << t;
    EXPECT_EQ(s.euler_characteristic, 2) << t;
    EXPECT_EQ(s.boundary_edges, 0) << t;
    EXPECT_NEAR(s.integral_gauss_curvature() / kFourPi, 1.0, 0.02) << t;
    EXPECT_GT(s.integral_traceless(), 0.0);
  }
}

TEST(LevelSurface, EllipsoidTracelessPositive) {
  auto dom = make_star_domain(ellipsoid_graph(Vec3(1.5, 1.0, 1.0)), Vec3::Zero());
  auto g = std::make_shared<const AnnularGrid>(build_grid(dom, 48.0, {32, 12, 24}));
  PotentialField p = solve_annulus(g, 1.0, {});
  compute_flux_table(p);
  const PotentialField q = normalize_to_log_growth(p);
  const LevelSurface near = boundary_surface(*q.field);
  const LevelSurface far = extract_level_surface(*q.field, 2.0);
  // the boundary is the ellipsoid itself: |A0|^2 = (k1 - k2)^2 / 2, zero only at the poles
  EXPECT_GT(near.integral_traceless(), 0.05);
  EXPECT_LT(far.integral_traceless(), near.integral_traceless());
  EXPECT_NEAR(near.integral_gauss_curvature() / kFourPi, 1.0, 0.02);
}

TEST(GMetric, IdentityAndConstantFactor) {
  auto g = ball_grid(64.0, {32, 12, 24});
  const NodalDerivatives u = log_r_field(g);
  const LevelSurface s = extract_level_surface(u, 1.0);
  const GMetricSurface flat = g_metric_quantities(s, *constant_factor(1.0));
  EXPECT_NEAR(flat.area_g, s.area(), 1e-12 * s.area());
  for (std::size_t q = 0; q < s.samples.size(); ++q) {
    EXPECT_NEAR(flat.samples[q].h_g, s.samples[q].geo.mean_curvature, 1e-12);
    EXPECT_NEAR(flat.samples[q].grad_g, s.samples[q].geo.grad_norm, 1e-12);
  }
  const double c = 1.7;
  const GMetricSurface scaled = g_metric_quantities(s, *constant_factor(c));
  EXPECT_NEAR(scaled.area_g / s.area(), std::pow(c, 4), 1e-12);
  for (std::size_t q = 0; q < s.samples.size(); ++q) {
    EXPECT_NEAR(scaled.samples[q].h_g, s.samples[q].geo.mean_curvature / (c * c), 1e-12);
    EXPECT_NEAR(scaled.samples[q].traceless2_g, s.samples[q].geo.traceless2 / std::pow(c, 4),
                1e-12);
  }
}

TEST(GMetric, FlatRoundSphereHasZeroHawkingMass) {
  auto g = ball_grid(64.0, {48, 16, 32});
  const NodalDerivatives u = log_r_field(g);
  const GMetricSurface gm = g_metric_quantities(extract_level_surface(u, 1.0), *constant_factor(1.0));
  EXPECT_NEAR(hawking_mass(gm), 0.0, 0.02);
  // U for a round sphere with f = 1 is 8 pi
  EXPECT_NEAR(gm.u_integral / kEightPi, 1.0, 0.01);
}

TEST(GMetric, SchwarzschildHorizonAndLevels) {
  auto g = ball_grid(64.0, {48, 16, 32});
  const NodalDerivatives u = log_r_field(g);
  FactorPtr f = schwarzschild_factor(2.0, Vec3::Zero());
  const LevelSurface horizon = boundary_surface(u);
  const GMetricSurface gh = g_metric_quantities(horizon, *f);
  EXPECT_NEAR(gh.area_g / (4.0 * kSixteenPi), 1.0, 1e-2);  // 64 pi
  EXPECT_LT(gh.max_abs_h_g, 1e-2);
  EXPECT_NEAR(hawking_mass(gh), 2.0, 0.02);
  for (double t : {0.3, 1.0, 2.0, 3.0}) {
    const GMetricSurface gt = g_metric_quantities(extract_level_surface(u, t), *f);
    EXPECT_NEAR(hawking_mass(gt) / 2.0, 1.0, 0.03) << t;
    // closed form: r = e^t, f = 1 + 1/r, Area_g = f^4 4 pi r^2
    const double r = std::exp(t), fr = 1.0 + 1.0 / r;
    EXPECT_NEAR(gt.area_g / (std::pow(fr, 4) * kFourPi * r * r), 1.0, 1e-2) << t;
  }
}

TEST(GMetric, RejectsNonPositiveFactor) {
  auto g = ball_grid(16.0, {16, 8, 16});
  const NodalDerivatives u = log_r_field(g);
  const LevelSurface s = extract_level_surface(u, 1.0);
  EXPECT_THROW(g_metric_quantities(s, NegativeFactor()), GeometryError);
}

TEST(LevelSurface, OffDump) {
  auto g = ball_grid(16.0, {16, 8, 16});
  const NodalDerivatives u = log_r_field(g);
  const LevelSurface s = extract_level_surface(u, 1.0);
  const GMetricSurface gm = g_metric_quantities(s, *constant_factor(1.0));
  std::ostringstream out;
  write_off(out, s, &gm);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "OFF");
  while (std::getline(in, line) && !line.empty() && line[0] == '#') {
  }
  std::istringstream counts(line);
  std::size_t nv = 0, nf = 0;
  counts >> nv >> nf;
  EXPECT_EQ(nv, s.vertices.size());
  EXPECT_EQ(nf, s.triangles.size());
}
