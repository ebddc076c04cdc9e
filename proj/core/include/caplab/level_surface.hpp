#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include "caplab/factor.hpp"
#include "caplab/fields.hpp"

namespace caplab {

/// Geometry of the level set through one point, from grad u and Hess u.
/// A = P Hess P / |grad u| with P = I - nu nu^T.
struct PointGeometry {
  double grad_norm = 0.0;
  Vec3 normal = Vec3::Zero();
  double mean_curvature = 0.0;  // H = tr A
  double norm_a2 = 0.0;         // |A|^2
  double traceless2 = 0.0;      // |A - (H/2) P|^2
  double gauss_curvature = 0.0;
};

PointGeometry level_set_geometry(const Vec3& grad, const Mat3& hess);

struct SurfaceSample {
  Vec3 x;
  double da = 0.0;
  int triangle = -1;
  PointGeometry geo;
  bool masked = false;
};

/// Triangulated {u = t}; each triangle lives in one grid cell and carries the
/// reference coordinates of its corners there. Integrals use a 3-point rule on
/// the triangle pushed through the cell map.
struct LevelSurface {
  double t = 0.0;
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<int> triangle_cell;
  std::vector<std::array<Vec3, 3>> triangle_ref;

  std::vector<PointGeometry> vertex_geometry;
  std::vector<SurfaceSample> samples;

  int component_count = 0;
  int euler_characteristic = 0;
  int boundary_edges = 0;
  double min_grad_norm = 0.0;
  double median_grad_norm = 0.0;
  double masked_fraction = 0.0;
  bool regular = true;   // no sample below the gradient threshold
  bool flagged = false;  // masked fraction above 5%

  double area() const;
  double integral_gauss_curvature() const;
  double integral_mean_curvature_squared() const;
  double integral_traceless() const;
  /// sum over unmasked samples of fn(sample) * da.
  template <class Fn>
  double integrate(Fn&& fn) const {
    double acc = 0.0;
    for (const SurfaceSample& s : samples)
      if (!s.masked) acc += fn(s) * s.da;
    return acc;
  }
};

struct ExtractionOptions {
  double mask_ratio = 1e-3;      // mask where |grad u| < ratio * median
  double flag_fraction = 0.05;   // flag when more samples than this are masked
  bool vertex_fields = true;
};

/// Marching tetrahedra over the grid cells (6 per hex, 3 per prism).
/// Throws GeometryError if t is outside (0, min u on the outer sphere) or the
/// surface is empty.
LevelSurface extract_level_surface(const NodalDerivatives& u, double t,
                                   const ExtractionOptions& opts = {});

/// The inner boundary s = 0 as a surface with t = 0.
LevelSurface boundary_surface(const NodalDerivatives& u, const ExtractionOptions& opts = {});

/// Nodal mean curvature of the level sets: div(grad u/|grad u|) and the
/// 3-harmonic identity -2 (grad|grad u| . grad u)/|grad u|^2.
struct MeanCurvatureField {
  std::vector<double> h;
  std::vector<double> identity_h;
  std::vector<char> masked;
  double max_discrepancy = 0.0;  // over unmasked nodes
};
MeanCurvatureField mean_curvature_field(const AnnularGrid& grid, const std::vector<double>& u,
                                        double mask_ratio = 1e-3);

struct SecondFundamentalForm {
  std::vector<double> traceless2;
  std::vector<double> norm_a2;
  std::vector<double> gauss_curvature;
};
SecondFundamentalForm second_fundamental_form(const LevelSurface& surface);

/// Conformal quantities per sample for g = f^4 g_euc.
struct GSample {
  double f = 1.0;
  double f_nu = 0.0;
  double da_g = 0.0;
  double h_g = 0.0;
  double grad_g = 0.0;
  double traceless2_g = 0.0;
};

struct GMetricSurface {
  std::vector<GSample> samples;
  std::vector<double> vertex_f;
  std::vector<double> vertex_f_nu;
  double area_g = 0.0;
  double u_integral = 0.0;            // int H_g |grad^g u| da_g
  double u_integral_euclidean = 0.0;  // int (H + 4 f_nu / f) |grad u| da
  double h_g_squared = 0.0;           // int H_g^2 da_g
  double ring_integral = 0.0;         // int |A_g^o|^2 da_g
  double max_abs_h_g = 0.0;
};

/// Throws GeometryError if f <= 0 on the surface.
GMetricSurface g_metric_quantities(const LevelSurface& surface, const ConformalFactor& factor);

/// sqrt(Area_g / 16 pi) (1 - int H_g^2 da_g / 16 pi).
double hawking_mass(const GMetricSurface& g);

/// OFF mesh with per-vertex columns: x y z |grad u| H |A0|^2 K f f_nu.
void write_off(std::ostream& out, const LevelSurface& surface, const GMetricSurface* g);

}  // namespace caplab
