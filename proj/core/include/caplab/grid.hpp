#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "caplab/common.hpp"
#include "caplab/domain.hpp"

namespace caplab {

struct GridResolution {
  int ns = 64;
  int ntheta = 24;
  int nphi = 48;
};

enum class CellKind : std::uint8_t { Hex, NorthPrism, SouthPrism };

/// Hexes use local node a + 2b + 4c for offsets (a, b, c) in (s, theta, phi)
/// and reference coordinates in [0,1]^3. Prisms around the polar axis use
/// nodes [P_i, a_i, b_i, P_{i+1}, a_{i+1}, b_{i+1}] (a on ring sector k,
/// b on k+1) and reference coordinates (zeta, lambda_a, lambda_b).
struct Cell {
  CellKind kind;
  int i, j, k;
  std::array<int, 8> nodes;
  int node_count() const { return kind == CellKind::Hex ? 8 : 6; }
};

/// Shape values and reference gradients of the cell's nodal basis.
int shape_functions(CellKind kind, const Vec3& ref, double* values, Vec3* ref_gradients);

/// Reference quadrature for one cell kind (weights sum to the reference volume).
struct RefQuadrature {
  std::vector<Vec3> points;
  std::vector<double> weights;
};
const RefQuadrature& reference_quadrature(CellKind kind);

/// Geometry at one volume quadrature point: jinv = d(ref)/dx, wdet = w |det dx/dref|.
struct QuadPoint {
  Mat3 jinv;
  double wdet;
};

/// Inverse chart Jacobian and chart-coordinate Hessians at a point of the
/// spherical chart (s, theta, phi). Row a of jinv is grad(xi_a);
/// hess_xi[a] is the Cartesian Hessian of xi_a.
struct MapDerivatives {
  Vec3 x;
  Mat3 jinv;
  std::array<Mat3, 3> hess_xi;
};

/// Chart-coordinate first and second derivatives of a nodal field.
struct ChartDerivatives {
  Vec3 d;
  Mat3 d2;
};

/// Quadrature point on the inner (s = 0) or outer (s = 1) boundary.
struct FacePoint {
  int cell;
  Vec3 ref;
  Vec3 x;
  double da;
};

struct CellLocation {
  int cell;
  Vec3 ref;
};

/// Boundary-fitted grid on {x outside Omega, |x - c| <= R_out}:
/// x = c + r w(theta, phi), r = rho(w)^(1-s) R_out^s, s = i/(N_s - 1),
/// theta_j = (j + 1/2) pi / N_theta, phi_k = 2 pi k / N_phi. Pole nodes on the
/// axis close the mesh with prisms.
class AnnularGrid {
 public:
  AnnularGrid(ImplicitDomain domain, double r_out, GridResolution res);

  const ImplicitDomain& domain() const { return domain_; }
  const Vec3& center() const { return domain_.center(); }
  double r_out() const { return r_out_; }
  const GridResolution& resolution() const { return res_; }
  int ns() const { return res_.ns; }
  int ntheta() const { return res_.ntheta; }
  int nphi() const { return res_.nphi; }
  double ds() const { return 1.0 / (res_.ns - 1); }
  double dtheta() const { return kPi / res_.ntheta; }
  double dphi() const { return 2.0 * kPi / res_.nphi; }
  double s_at(int i) const { return i * ds(); }
  double theta_at(int j) const { return (j + 0.5) * dtheta(); }
  double phi_at(int k) const { return k * dphi(); }

  std::size_t node_count() const { return positions_.size(); }
  std::size_t regular_count() const {
    return static_cast<std::size_t>(res_.ns) * res_.ntheta * res_.nphi;
  }
  int node_id(int i, int j, int k) const { return (i * res_.ntheta + j) * res_.nphi + k; }
  int north_pole(int i) const { return static_cast<int>(regular_count()) + i; }
  int south_pole(int i) const { return static_cast<int>(regular_count()) + res_.ns + i; }
  bool is_pole(int n) const { return n >= static_cast<int>(regular_count()); }
  /// Shell index i of a node.
  int shell_of(int n) const;
  bool is_inner(int n) const { return shell_of(n) == 0; }
  bool is_outer(int n) const { return shell_of(n) == res_.ns - 1; }

  const Vec3& position(int n) const { return positions_[n]; }
  /// Lumped quadrature weight: integral of the node's basis function.
  double weight(int n) const { return weights_[n]; }
  /// Inverse chart Jacobian at a regular node.
  const Mat3& node_jinv(int n) const { return node_jinv_[n]; }

  /// Spherical chart map and its derivatives.
  Vec3 map(double s, double theta, double phi) const;
  MapDerivatives map_derivatives(double s, double theta, double phi) const;
  /// Physical radius along a ray.
  double radius_at(double s, const Vec3& omega) const;

  const std::vector<Cell>& cells() const { return cells_; }
  Vec3 cell_point(const Cell& cell, const Vec3& ref) const;
  /// dx/dref.
  Mat3 cell_jacobian(const Cell& cell, const Vec3& ref) const;
  /// Spherical chart coordinates of a reference point of a hex.
  Vec3 hex_chart(const Cell& cell, const Vec3& ref) const;

  std::size_t quad_offset(std::size_t cell) const { return quad_offset_[cell]; }
  const std::vector<QuadPoint>& quad_points() const { return quad_; }

  /// 2x2 Gauss points on hex faces, 3 points on prism faces.
  std::vector<FacePoint> face_quadrature(bool outer) const;

  /// Cell and reference coordinates containing x, if x lies in the grid.
  std::optional<CellLocation> locate(const Vec3& x) const;

  /// Second-order chart derivatives at a regular node (one-sided in s at the
  /// inner and outer shells, periodic in phi, continued across the poles).
  ChartDerivatives chart_derivatives(const std::vector<double>& field, int i, int j,
                                     int k) const;
  /// Cartesian gradient and Hessian at any node; pole values average the
  /// adjacent ring.
  Vec3 gradient(const std::vector<double>& field, int n) const;
  Mat3 hessian(const std::vector<double>& field, int n) const;

  /// sum of w_n field_n over nodes satisfying the predicate (all if empty).
  double volume_integral(const std::vector<double>& field,
                         const std::function<bool(int)>& region = {}) const;
  double volume_integral(const std::function<double(const Vec3&)>& integrand) const;

  /// Line-oriented dump: "node i j k x y z w".
  void dump(std::ostream& out) const;

  /// Samples a function at every node.
  std::vector<double> sample(const std::function<double(const Vec3&)>& f) const;

 private:
  double fetch(const std::vector<double>& field, int i, int j, int k) const;
  Vec3 prism_xy(const Cell& cell, const Vec3& ref, Mat3* dchart) const;
  Vec3 polar_map(double s, double x, double y, bool north) const;

  ImplicitDomain domain_;
  double r_out_;
  GridResolution res_;
  std::vector<Vec3> positions_;
  std::vector<double> weights_;
  std::vector<Mat3> node_jinv_;
  std::vector<Cell> cells_;
  std::vector<std::size_t> quad_offset_;
  std::vector<QuadPoint> quad_;
};

/// Builds the grid; throws GeometryError on a non-positive Jacobian (ray
/// crossing) naming the offending direction.
AnnularGrid build_grid(const ImplicitDomain& domain, double r_out, GridResolution res);

}  // namespace caplab
