// Scalar C^1 profiles used by the construction: plateau bumps, psi, phi and the transverse cutoff.
#pragma once

#include <array>
#include <memory>
#include <string>

namespace toruslab {

/// Quintic smootherstep S(t) = 6t^5 - 15t^4 + 10t^3 clamped to [0, 1]; sup S' = 15/8.
double smootherstep(double t);
double smootherstep_slope(double t);
inline constexpr double kSmootherstepMaxSlope = 15.0 / 8.0;

class SmoothProfile {
 public:
  virtual ~SmoothProfile() = default;
  virtual double value(double x) const = 0;
  virtual double derivative(double x) const = 0;

  double support_lo() const { return support_lo_; }
  double support_hi() const { return support_hi_; }
  /// Certified bounds (closed form, not sampled).
  double sup_value() const { return sup_value_; }
  double sup_derivative() const { return sup_derivative_; }

 protected:
  double support_lo_ = 0, support_hi_ = 0, sup_value_ = 0, sup_derivative_ = 0;
};

/// Circle bump: 1 on the arc [lo, hi], 0 at distance >= eps from it.
class PlateauBump final : public SmoothProfile {
 public:
  PlateauBump(double lo, double hi, double eps);
  double value(double x) const override;
  double derivative(double x) const override;
  /// Value and derivative in one pass.
  void eval(double x, double& v, double& d) const;

 private:
  double mid_, half_, eps_;
};

/// psi(s) = 2 (1 - S(|s - 1/16| / theta)): max 2 at 1/16, zero off (1/16 - theta, 1/16 + theta).
class PsiProfile final : public SmoothProfile {
 public:
  explicit PsiProfile(double theta);
  double value(double s) const override;
  double derivative(double s) const override;
  double theta() const { return theta_; }

 private:
  double theta_;
};

/// phi with phi(1/4) = 0, obtained by integrating a smoothstep-interpolated phi'.
/// phi' is pinned at 1/4 + delta*t for t in {-1/4, -1/8, 0, 1/8, 1/4, 1/2, 3/4}.
class PhiProfile final : public SmoothProfile {
 public:
  explicit PhiProfile(double delta);
  double value(double x) const override;
  double derivative(double x) const override;  // phi'
  double second_derivative_sup() const;        // sup |phi''|
  double delta() const { return delta_; }
  double min_derivative() const { return -0.75; }
  double max_derivative() const { return 1.0; }

  static constexpr int kKnots = 7;
  static constexpr std::array<double, kKnots> kKnotT{-0.25, -0.125, 0.0, 0.125, 0.25, 0.5, 0.75};
  static constexpr std::array<double, kKnots> kKnotSlope{0.0, -0.25, 0.5, 1.0, -0.75, -1.0 / 16, 0.0};

 private:
  // Phi(t) = phi(1/4 + delta t) / delta
  double unit_integral(double t) const;
  std::array<double, kKnots> knot_integral_{};
  double delta_;
};

/// chi(t) = 1 for t <= inner, 0 for t >= outer, smootherstep in between.
/// With `trivial` it is identically 1 (the n = 2 case, where there are no transverse coordinates).
class CutoffProfile final : public SmoothProfile {
 public:
  CutoffProfile(double inner, double outer, bool trivial);
  double value(double t) const override;
  double derivative(double t) const override;
  bool trivial() const { return trivial_; }
  double inner() const { return inner_; }
  double outer() const { return outer_; }

 private:
  double inner_, outer_;
  bool trivial_;
};

}  // namespace toruslab
