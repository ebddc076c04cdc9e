#include "caplab/mass.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "caplab/capacity.hpp"
#include "caplab/quadrature.hpp"

namespace caplab {

namespace {

// Least-squares polynomial in 1/r; returns the constant term and the RMS residual.
std::pair<double, double> extrapolate(const std::vector<double>& r, const std::vector<double>& m,
                                      int degree) {
  Eigen::MatrixXd a(r.size(), degree + 1);
  Eigen::VectorXd b(r.size());
  for (std::size_t k = 0; k < r.size(); ++k) {
    for (int p = 0; p <= degree; ++p) a(k, p) = std::pow(1.0 / r[k], p);
    b[k] = m[k];
  }
  const Eigen::VectorXd coef = a.colPivHouseholderQr().solve(b);
  const double rms = std::sqrt((a * coef - b).squaredNorm() / r.size());
  return {coef[0], rms};
}

}  // namespace

AdmMass adm_mass_flux(const ConformalFactor& factor, const Vec3& center, double r_max,
                      const AdmOptions& opts) {
  require(r_max > 0.0 && opts.spheres >= 2, "adm_mass_flux: invalid sphere setup");
  const SphereRule rule = sphere_rule(opts.n_theta, opts.n_phi);
  AdmMass out;
  for (int k = 0; k < opts.spheres; ++k) {
    const double r = r_max / 16.0 * std::pow(8.0, static_cast<double>(k) / (opts.spheres - 1));
    // Cell-scale step: grid-sampled factors are only piecewise smooth.
    const double h = 0.05 * r;
    double flux = 0.0, coord = 0.0;
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const Vec3& nu = rule.directions[q];
      const Vec3 x = center + r * nu;
      flux += rule.weights[q] * factor.gradient(x).dot(nu);
      // g_ij = f^4 delta_ij; partial derivatives by central differences.
      Mat3 dg[3];
      for (int a = 0; a < 3; ++a) {
        Vec3 e = Vec3::Zero();
        e[a] = h;
        auto g4 = [&](double t) { return std::pow(factor.value(x + t * e), 4); };
        dg[a] = (8.0 * (g4(1.0) - g4(-1.0)) - (g4(2.0) - g4(-2.0))) / (12.0 * h) * Mat3::Identity();
      }
      double integrand = 0.0;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) integrand += (dg[i](i, j) - dg[j](i, i)) * nu[j];
      coord += rule.weights[q] * integrand;
    }
    out.radii.push_back(r);
    out.flux_masses.push_back(-flux * r * r / (2.0 * kPi));
    out.coord_masses.push_back(coord * r * r / kSixteenPi);
  }
  const auto [mf, res] = extrapolate(out.radii, out.flux_masses, 1);
  out.m_flux = mf;
  // The coordinate integrand carries f^3 = 1 + 3m/2r + O(1/r^2).
  out.m_coord = extrapolate(out.radii, out.coord_masses, std::min(2, opts.spheres - 1)).first;
  out.fit_residual = res;
  out.low_confidence = res > opts.spread_tol * std::max(std::abs(mf), 1e-9);
  return out;
}

MassReport make_mass_report(double m_adm, double m_adm_coord, double capacity, double vol,
                            double alpha) {
  require(capacity > 0.0 && vol > 0.0, "make_mass_report: capacity and volume must be positive");
  MassReport r;
  r.m_adm = m_adm;
  r.m_adm_coord = m_adm_coord;
  r.capacity = capacity;
  r.ratio = m_adm / (2.0 * capacity);
  r.vol = vol;
  r.iso_radius = isocapacitary_lower_bound(vol);
  r.penrose_ratio = m_adm / (2.0 * r.iso_radius);
  r.eta = r.penrose_ratio - 1.0;
  r.alpha = alpha;
  return r;
}

TheoremVerdicts theorem_verdicts(const MassReport& report, double tol) {
  TheoremVerdicts v;
  v.mass_capacity.name = "mass-capacity m_ADM >= 2c";
  v.mass_capacity.margin = report.ratio - (1.0 - tol);
  v.mass_capacity.pass = v.mass_capacity.margin >= 0.0;
  v.volumetric_penrose.name = "volumetric Penrose m_ADM >= 2(3V/4pi)^(1/3)";
  v.volumetric_penrose.margin = report.penrose_ratio - (1.0 - tol);
  v.volumetric_penrose.pass = v.volumetric_penrose.margin >= 0.0;
  v.strict = report.ratio > 1.0 && report.penrose_ratio > 1.0;
  if (report.eta > 0.0) v.alpha_over_sqrt_eta = report.alpha / std::sqrt(report.eta);
  return v;
}

}  // namespace caplab
