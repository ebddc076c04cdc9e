#include "caplab/domain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "caplab/quadrature.hpp"

namespace caplab {

RadialFunction spherical_harmonic_graph(int l_max, std::vector<double> coeffs, double base) {
  require(l_max >= 0, "spherical_harmonic_graph: l_max must be non-negative");
  const std::size_t n = static_cast<std::size_t>((l_max + 1) * (l_max + 1));
  if (coeffs.size() != n) {
    std::ostringstream msg;
    msg << "spherical harmonic graph with l_max " << l_max << " needs " << n
        << " coefficients, got " << coeffs.size();
    throw ScenarioError(msg.str());
  }
  return [l_max, coeffs = std::move(coeffs), base](const Vec3& w) {
    const double theta = std::acos(std::clamp(w.z() / w.norm(), -1.0, 1.0));
    const double phi = std::atan2(w.y(), w.x());
    const std::vector<double> y = real_spherical_harmonics(l_max, theta, phi);
    double rho = base;
    for (std::size_t i = 0; i < y.size(); ++i) rho += coeffs[i] * y[i];
    return rho;
  };
}

RadialFunction ellipsoid_graph(const Vec3& semi_axes) {
  if (!(semi_axes.minCoeff() > 0.0)) throw ScenarioError("ellipsoid semi-axes must be positive");
  const Vec3 inv2 = semi_axes.cwiseProduct(semi_axes).cwiseInverse();
  return [inv2](const Vec3& w) {
    const Vec3 u = w.normalized();
    return 1.0 / std::sqrt(u.cwiseProduct(u).dot(inv2));
  };
}

ImplicitDomain::ImplicitDomain(RadialFunction rho, const Vec3& center, double bounding_radius,
                               double min_radius, int smoothness_budget)
    : rho_(std::move(rho)),
      center_(center),
      bounding_radius_(bounding_radius),
      min_radius_(min_radius),
      smoothness_budget_(smoothness_budget) {
  require(static_cast<bool>(rho_), "ImplicitDomain: empty radial function");
  require(min_radius_ > 0.0 && bounding_radius_ >= min_radius_,
          "ImplicitDomain: invalid radius bounds");
  require(smoothness_budget_ >= 2, "ImplicitDomain: smoothness budget must be at least 2");
}

double ImplicitDomain::implicit(const Vec3& x) const {
  const Vec3 d = x - center_;
  const double r = d.norm();
  if (r == 0.0) return -min_radius_;
  return r - rho_(d / r);
}

namespace {

struct ImplicitJet {
  Vec3 grad;
  Mat3 hess;
};

// Central differences of the implicit function around a boundary point.
ImplicitJet implicit_jet(const ImplicitDomain& d, const Vec3& x) {
  const double h = 1e-4 * d.bounding_radius();
  const double f0 = d.implicit(x);
  ImplicitJet jet;
  for (int a = 0; a < 3; ++a) {
    Vec3 ea = Vec3::Zero();
    ea[a] = h;
    const double fp = d.implicit(x + ea), fm = d.implicit(x - ea);
    jet.grad[a] = (fp - fm) / (2.0 * h);
    jet.hess(a, a) = (fp - 2.0 * f0 + fm) / (h * h);
    for (int b = 0; b < a; ++b) {
      Vec3 eb = Vec3::Zero();
      eb[b] = h;
      const double v = (d.implicit(x + ea + eb) - d.implicit(x + ea - eb) -
                        d.implicit(x - ea + eb) + d.implicit(x - ea - eb)) /
                       (4.0 * h * h);
      jet.hess(a, b) = jet.hess(b, a) = v;
    }
  }
  return jet;
}

}  // namespace

Vec3 ImplicitDomain::normal(const Vec3& omega) const {
  return implicit_jet(*this, boundary_point(omega)).grad.normalized();
}

double ImplicitDomain::mean_curvature(const Vec3& omega) const {
  const ImplicitJet jet = implicit_jet(*this, boundary_point(omega));
  const double g = jet.grad.norm();
  const Vec3 n = jet.grad / g;
  return (jet.hess.trace() - n.dot(jet.hess * n)) / g;
}

double ImplicitDomain::volume() const {
  const SphereRule rule = sphere_rule(48, 96);
  double v = 0.0;
  for (std::size_t q = 0; q < rule.weights.size(); ++q) {
    const double r = rho_(rule.directions[q]);
    v += rule.weights[q] * r * r * r / 3.0;
  }
  return v;
}

ImplicitDomain ImplicitDomain::scaled(double factor) const {
  require(factor > 0.0, "ImplicitDomain::scaled: factor must be positive");
  RadialFunction rho = [inner = rho_, factor](const Vec3& w) { return factor * inner(w); };
  return ImplicitDomain(std::move(rho), factor * center_, factor * bounding_radius_,
                        factor * min_radius_, smoothness_budget_);
}

ImplicitDomain ImplicitDomain::translated(const Vec3& offset) const {
  return ImplicitDomain(rho_, center_ + offset, bounding_radius_, min_radius_,
                        smoothness_budget_);
}

ImplicitDomain make_star_domain(RadialFunction rho, const Vec3& center, int smoothness_budget) {
  if (!rho) throw ScenarioError("star domain: missing radial function");
  constexpr int kTheta = 64;
  constexpr int kPhi = 128;
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  auto probe = [&](double theta, double phi) {
    const double r = rho(direction(theta, phi));
    if (!std::isfinite(r) || r <= 0.0) {
      std::ostringstream msg;
      msg << "star domain: non-positive radius " << r << " at theta=" << theta
          << " phi=" << phi;
      throw ScenarioError(msg.str());
    }
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  };
  probe(0.0, 0.0);
  probe(kPi, 0.0);
  for (int j = 0; j < kTheta; ++j)
    for (int k = 0; k < kPhi; ++k)
      probe(kPi * (j + 0.5) / kTheta, 2.0 * kPi * k / kPhi);
  for (int k = 0; k < kPhi; ++k) probe(0.5 * kPi, 2.0 * kPi * k / kPhi);
  // Sampled extremes can miss the true ones by O(h^2); pad accordingly.
  return ImplicitDomain(std::move(rho), center, hi * (1.0 + 1e-3), lo * (1.0 - 1e-3),
                        smoothness_budget);
}

}  // namespace caplab
