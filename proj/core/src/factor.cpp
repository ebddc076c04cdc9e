#include "caplab/factor.hpp"

#include <cmath>
#include <limits>

namespace caplab {

namespace {

double fd_step(const Vec3& x, double rel) { return rel * std::max(1.0, x.norm()); }

class ConstantFactor final : public ConformalFactor {
 public:
  explicit ConstantFactor(double c) : c_(c) {}
  double value(const Vec3&) const override { return c_; }
  Vec3 gradient(const Vec3&) const override { return Vec3::Zero(); }
  Mat3 hessian(const Vec3&) const override { return Mat3::Zero(); }
  double decay_constant() const override {
    return c_ == 1.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  std::string kind() const override { return "constant"; }

 private:
  double c_;
};

class SchwarzschildFactor final : public ConformalFactor {
 public:
  SchwarzschildFactor(double m, const Vec3& center) : m_(m), center_(center) {}
  double value(const Vec3& x) const override {
    return 1.0 + 0.5 * m_ / (x - center_).norm();
  }
  Vec3 gradient(const Vec3& x) const override {
    const Vec3 d = x - center_;
    const double r = d.norm();
    return -0.5 * m_ / (r * r * r) * d;
  }
  Mat3 hessian(const Vec3& x) const override {
    const Vec3 d = x - center_;
    const double r = d.norm();
    const double r3 = r * r * r;
    return 0.5 * m_ * (3.0 * d * d.transpose() / (r3 * r * r) - Mat3::Identity() / r3);
  }
  double decay_constant() const override { return 0.5 * m_; }
  std::string kind() const override { return "schwarzschild"; }

 private:
  double m_;
  Vec3 center_;
};

class ScaledFactor final : public ConformalFactor {
 public:
  ScaledFactor(FactorPtr base, double c) : base_(std::move(base)), c_(c) {}
  double value(const Vec3& x) const override { return c_ * base_->value(x); }
  Vec3 gradient(const Vec3& x) const override { return c_ * base_->gradient(x); }
  Mat3 hessian(const Vec3& x) const override { return c_ * base_->hessian(x); }
  double decay_constant() const override {
    return c_ == 1.0 ? base_->decay_constant() : std::numeric_limits<double>::infinity();
  }
  std::string kind() const override { return "scaled " + base_->kind(); }

 private:
  FactorPtr base_;
  double c_;
};

}  // namespace

Vec3 ConformalFactor::gradient(const Vec3& x) const {
  const double h = fd_step(x, 1e-5);
  Vec3 g;
  for (int a = 0; a < 3; ++a) {
    Vec3 e = Vec3::Zero();
    e[a] = h;
    g[a] = (value(x + e) - value(x - e)) / (2.0 * h);
  }
  return g;
}

Mat3 ConformalFactor::hessian(const Vec3& x) const {
  const double h = fd_step(x, 1e-4);
  Mat3 hess;
  for (int a = 0; a < 3; ++a) {
    Vec3 e = Vec3::Zero();
    e[a] = h;
    hess.col(a) = (gradient(x + e) - gradient(x - e)) / (2.0 * h);
  }
  return 0.5 * (hess + hess.transpose());
}

FactorPtr constant_factor(double c) {
  require(c > 0.0, "constant_factor: value must be positive");
  return std::make_shared<ConstantFactor>(c);
}

FactorPtr schwarzschild_factor(double m, const Vec3& center) {
  require(m > 0.0, "schwarzschild_factor: mass must be positive");
  return std::make_shared<SchwarzschildFactor>(m, center);
}

FactorPtr scaled_factor(FactorPtr base, double c) {
  require(base != nullptr && c > 0.0, "scaled_factor: invalid arguments");
  return std::make_shared<ScaledFactor>(std::move(base), c);
}

}  // namespace caplab
