#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "caplab/factor.hpp"
#include "caplab/level_surface.hpp"
#include "caplab/solver.hpp"

namespace caplab {

/// Model U for Schwarzschild, independent of the mass: 8 pi (e^t - 1)/(e^t + 1).
double schwarzschild_model_U(double t);

/// 8 pi (e^t + 2 - e^-t) - (e^t + 1)^2 e^-t U.
double compute_Q(double t, double u_value);

/// Inverse of compute_Q in U.
double U_from_Q(double t, double q_value);

struct UValue {
  double value = 0.0;        // int H_g |grad^g u| da_g
  double euclidean = 0.0;    // int (H + 4 f_nu/f) |grad u| da
  double consistency = 0.0;  // |value - euclidean|
};
UValue compute_U(const GMetricSurface& g);

struct MonotoneSample {
  double t = 0.0;
  double U = 0.0;
  double Q = 0.0;
  double area_euc = 0.0;
  double area_g = 0.0;
  double hawking_mass = 0.0;
  double ring_integral = 0.0;
  double u_consistency = 0.0;
  double gauss_curvature_integral = 0.0;
  int components = 0;
  int euler_characteristic = 0;
  double masked_fraction = 0.0;
  bool flagged = false;
};

struct MonotoneSeries {
  std::vector<MonotoneSample> samples;
  std::vector<double> model_U;  // schwarzschild_model_U at each t
};

struct SeriesOptions {
  int count = 24;
  double t_min = 0.05;
  double max_fraction = 0.85;  // t_max = max_fraction * u_max
  bool include_boundary = true;
  /// Called with each extracted surface and its g-quantities (dumps).
  std::function<void(const LevelSurface&, const GMetricSurface&)> on_surface;
};

/// Samples U, Q and the surface quantities on level sets of a normalized
/// potential. Levels reaching the last cell layer are dropped. The t = 0
/// sample is evaluated on the boundary mesh itself.
MonotoneSeries monotone_series(const PotentialField& potential, const ConformalFactor& factor,
                               const SeriesOptions& opts = {});

struct Verdict {
  bool pass = true;
  double margin = 0.0;  // smallest slack; negative means violated
  int checked = 0;
};

struct MonotonicityTolerances {
  double q = 0.03 * kSixteenPi;
  double u = 0.03 * kEightPi;
  double ode = 0.05 * kFourPi;
};

struct TrendPoint {
  double t;
  double value;  // e^t (8 pi - U)
};

struct MonotonicityReport {
  Verdict q_monotone;   // Q(t_{i+1}) >= Q(t_i) - tol
  Verdict u_bound;      // U <= U_s + tol
  Verdict ode;          // U' + U^2/16pi <= 4pi + tol at interior samples
  double max_q_decrease = 0.0;
  double max_q_deviation = 0.0;  // max |Q - 16 pi|
  std::vector<TrendPoint> trend;
  std::optional<double> trend_bound;  // 8 pi m / c when known
  int unflagged = 0;
};

/// Throws Error with fewer than 5 unflagged samples.
MonotonicityReport monotonicity_report(const MonotoneSeries& series,
                                       const MonotonicityTolerances& tol = {},
                                       std::optional<double> trend_bound = std::nullopt);

struct StabilityExcess {
  double value = 0.0;
  bool low_confidence = false;
};

/// Trapezoid rule for int_0^s_max (e^t + 1)^2 e^-t ring(t) dt over unflagged
/// samples; low confidence when a gap exceeds half the interval.
StabilityExcess stability_excess(const MonotoneSeries& series, double s_max);

}  // namespace caplab
