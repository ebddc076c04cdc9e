#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/LU>
#include <numbers>
#include <stdexcept>
#include <string>

namespace caplab {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kFourPi = 4.0 * std::numbers::pi;
inline constexpr double kEightPi = 8.0 * std::numbers::pi;
inline constexpr double kSixteenPi = 16.0 * std::numbers::pi;

// Error taxonomy. The CLI maps SolverError to exit status 2 and
// ScenarioError to exit status 3; everything else is a programming or
// precondition failure.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ScenarioError : public Error {
 public:
  using Error::Error;
};

class GeometryError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw std::invalid_argument(message);
}

/// Unit vector for polar angle theta and azimuth phi.
inline Vec3 direction(double theta, double phi) {
  const double st = std::sin(theta);
  return {st * std::cos(phi), st * std::sin(phi), std::cos(theta)};
}

}  // namespace caplab
