#pragma once

#include <memory>
#include <string>

#include "caplab/common.hpp"

namespace caplab {

/// Positive conformal factor f with g = f^4 g_euc. Derivatives default to
/// central differences of value(); closed forms override them.
class ConformalFactor {
 public:
  virtual ~ConformalFactor() = default;

  virtual double value(const Vec3& x) const = 0;
  virtual Vec3 gradient(const Vec3& x) const;
  virtual Mat3 hessian(const Vec3& x) const;
  double laplacian(const Vec3& x) const { return hessian(x).trace(); }

  /// C with |f - 1| <= C / |x - center| far out; infinity if f does not tend to 1.
  virtual double decay_constant() const = 0;
  virtual std::string kind() const = 0;
};

using FactorPtr = std::shared_ptr<const ConformalFactor>;

FactorPtr constant_factor(double c);

/// f = 1 + m / (2 |x - center|).
FactorPtr schwarzschild_factor(double m, const Vec3& center);

/// c * base(x); used to build factors that violate f -> 1.
FactorPtr scaled_factor(FactorPtr base, double c);

}  // namespace caplab
