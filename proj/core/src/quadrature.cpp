#include "caplab/quadrature.hpp"

#include <cmath>

namespace caplab {

GaussRule gauss_legendre(int n) {
  require(n >= 1, "gauss_legendre: n must be positive");
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

SphereRule sphere_rule(int n_theta, int n_phi) {
  const GaussRule gl = gauss_legendre(n_theta);
  SphereRule rule;
  rule.directions.reserve(static_cast<std::size_t>(n_theta) * n_phi);
  rule.weights.reserve(rule.directions.capacity());
  const double dphi = 2.0 * kPi / n_phi;
  for (int i = 0; i < n_theta; ++i) {
    const double theta = std::acos(gl.nodes[i]);
    for (int k = 0; k < n_phi; ++k) {
      rule.directions.push_back(direction(theta, (k + 0.5) * dphi));
      rule.weights.push_back(gl.weights[i] * dphi);
    }
  }
  return rule;
}

std::vector<double> real_spherical_harmonics(int l_max, double theta, double phi) {
  require(l_max >= 0, "real_spherical_harmonics: l_max must be non-negative");
  const double x = std::cos(theta);
  const double sx = std::sin(theta);
  // Normalized associated Legendre functions, plm[l][m].
  std::vector<std::vector<double>> plm(l_max + 1, std::vector<double>(l_max + 1, 0.0));
  plm[0][0] = 1.0 / std::sqrt(kFourPi);
  for (int m = 1; m <= l_max; ++m)
    plm[m][m] = std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * sx * plm[m - 1][m - 1];
  for (int m = 0; m < l_max; ++m) plm[m + 1][m] = std::sqrt(2.0 * m + 3.0) * x * plm[m][m];
  for (int m = 0; m <= l_max; ++m) {
    for (int l = m + 2; l <= l_max; ++l) {
      const double a = std::sqrt((4.0 * l * l - 1.0) / (l * l - m * m));
      const double a_prev = std::sqrt((4.0 * (l - 1) * (l - 1) - 1.0) /
                                      ((l - 1) * (l - 1) - m * m));
      plm[l][m] = a * (x * plm[l - 1][m] - plm[l - 2][m] / a_prev);
    }
  }
  std::vector<double> y(static_cast<std::size_t>((l_max + 1) * (l_max + 1)));
  for (int l = 0; l <= l_max; ++l) {
    y[sh_index(l, 0)] = plm[l][0];
    for (int m = 1; m <= l; ++m) {
      y[sh_index(l, m)] = std::sqrt(2.0) * plm[l][m] * std::cos(m * phi);
      y[sh_index(l, -m)] = std::sqrt(2.0) * plm[l][m] * std::sin(m * phi);
    }
  }
  return y;
}

}  // namespace caplab
