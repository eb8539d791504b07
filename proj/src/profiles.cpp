#include "toruslab/profiles.hpp"

#include "toruslab/torus.hpp"

#include <algorithm>
#include <cmath>

namespace toruslab {

double smootherstep(double t) {
  if (t <= 0) return 0;
  if (t >= 1) return 1;
  return t * t * t * (t * (6 * t - 15) + 10);
}

double smootherstep_slope(double t) {
  if (t <= 0 || t >= 1) return 0;
  double u = t * (1 - t);
  return 30 * u * u;
}

PlateauBump::PlateauBump(double lo, double hi, double eps)
    : mid_(0.5 * (lo + hi)), half_(0.5 * (hi - lo)), eps_(eps) {
  if (!(lo < hi) || !(eps > 0) || hi - lo + 2 * eps >= 2.0)
    throw DomainError("PlateauBump: need lo < hi, eps > 0 and the fattened arc shorter than the circle");
  support_lo_ = lo - eps;
  support_hi_ = hi + eps;
  sup_value_ = 1.0;
  sup_derivative_ = kSmootherstepMaxSlope / eps;
}

void PlateauBump::eval(double x, double& v, double& d) const {
  double w = wrap_diff(x, mid_);
  double gap = std::abs(w) - half_;
  if (gap <= 0) {
    v = 1;
    d = 0;
    return;
  }
  if (gap >= eps_) {
    v = 0;
    d = 0;
    return;
  }
  double t = gap / eps_;
  v = 1 - smootherstep(t);
  d = -smootherstep_slope(t) / eps_ * (w > 0 ? 1.0 : -1.0);
}

double PlateauBump::value(double x) const {
  double v, d;
  eval(x, v, d);
  return v;
}

double PlateauBump::derivative(double x) const {
  double v, d;
  eval(x, v, d);
  return d;
}

PsiProfile::PsiProfile(double theta) : theta_(theta) {
  if (!(theta > 0 && theta < 1.0 / 16)) throw DomainError("PsiProfile: theta must lie in (0, 1/16)");
  support_lo_ = 1.0 / 16 - theta;
  support_hi_ = 1.0 / 16 + theta;
  sup_value_ = 2.0;
  sup_derivative_ = 2.0 * kSmootherstepMaxSlope / theta;
}

double PsiProfile::value(double s) const { return 2.0 * (1.0 - smootherstep(std::abs(s - 1.0 / 16) / theta_)); }

double PsiProfile::derivative(double s) const {
  double w = s - 1.0 / 16;
  double sign = w > 0 ? 1.0 : (w < 0 ? -1.0 : 0.0);
  return -2.0 * smootherstep_slope(std::abs(w) / theta_) / theta_ * sign;
}

namespace {
double smoothstep(double t) { return t * t * (3 - 2 * t); }
}  // namespace

PhiProfile::PhiProfile(double delta) : delta_(delta) {
  if (!(delta > 0)) throw DomainError("PhiProfile: delta must be positive");
  support_lo_ = 0.25 + delta * kKnotT.front();
  support_hi_ = 0.25 + delta * kKnotT.back();
  // Each segment integrates to h (v0 + v1) / 2; anchor Phi(0) = 0.
  std::array<double, kKnots> cum{};
  for (int i = 1; i < kKnots; ++i)
    cum[i] = cum[i - 1] + (kKnotT[i] - kKnotT[i - 1]) * 0.5 * (kKnotSlope[i - 1] + kKnotSlope[i]);
  for (int i = 0; i < kKnots; ++i) knot_integral_[i] = cum[i] - cum[2];
  if (std::abs(knot_integral_.back()) > 1e-15) throw NumericError("PhiProfile: phi' does not integrate to zero");

  // sup |phi| is attained at a knot or where phi' changes sign inside a segment.
  double sup = 0;
  for (int i = 0; i < kKnots; ++i) sup = std::max(sup, std::abs(knot_integral_[i]));
  for (int i = 0; i + 1 < kKnots; ++i) {
    double v0 = kKnotSlope[i], v1 = kKnotSlope[i + 1];
    if (v0 * v1 >= 0) continue;
    double target = -v0 / (v1 - v0), lo = 0, hi = 1;
    for (int it = 0; it < 100; ++it) {
      double m = 0.5 * (lo + hi);
      (smoothstep(m) < target ? lo : hi) = m;
    }
    double t = kKnotT[i] + 0.5 * (lo + hi) * (kKnotT[i + 1] - kKnotT[i]);
    sup = std::max(sup, std::abs(unit_integral(t)));
  }
  sup_value_ = sup * delta;
  sup_derivative_ = 1.0;
}

double PhiProfile::unit_integral(double t) const {
  if (t <= kKnotT.front() || t >= kKnotT.back()) return 0;
  int i = 0;
  while (t > kKnotT[i + 1]) ++i;
  double h = kKnotT[i + 1] - kKnotT[i];
  double tau = (t - kKnotT[i]) / h;
  double v0 = kKnotSlope[i], dv = kKnotSlope[i + 1] - v0;
  // integral of v0 + dv (3 s^2 - 2 s^3) over [0, tau], scaled by h
  return knot_integral_[i] + h * (v0 * tau + dv * (tau * tau * tau - 0.5 * tau * tau * tau * tau));
}

double PhiProfile::value(double x) const { return delta_ * unit_integral((x - 0.25) / delta_); }

double PhiProfile::derivative(double x) const {
  double t = (x - 0.25) / delta_;
  if (t <= kKnotT.front() || t >= kKnotT.back()) return 0;
  int i = 0;
  while (t > kKnotT[i + 1]) ++i;
  double tau = (t - kKnotT[i]) / (kKnotT[i + 1] - kKnotT[i]);
  return kKnotSlope[i] + (kKnotSlope[i + 1] - kKnotSlope[i]) * smoothstep(tau);
}

double PhiProfile::second_derivative_sup() const {
  double s = 0;
  for (int i = 0; i + 1 < kKnots; ++i)
    s = std::max(s, 1.5 * std::abs(kKnotSlope[i + 1] - kKnotSlope[i]) / (kKnotT[i + 1] - kKnotT[i]));
  return s / delta_;
}

CutoffProfile::CutoffProfile(double inner, double outer, bool trivial)
    : inner_(inner), outer_(outer), trivial_(trivial) {
  if (!trivial && !(0 <= inner && inner < outer)) throw DomainError("CutoffProfile: need 0 <= inner < outer");
  support_lo_ = 0.0;
  support_hi_ = trivial ? 1.0 : outer;
  sup_value_ = 1.0;
  sup_derivative_ = trivial ? 0.0 : kSmootherstepMaxSlope / (outer - inner);
}

double CutoffProfile::value(double t) const {
  if (trivial_) return 1.0;
  return 1.0 - smootherstep((t - inner_) / (outer_ - inner_));
}

double CutoffProfile::derivative(double t) const {
  if (trivial_) return 0.0;
  return -smootherstep_slope((t - inner_) / (outer_ - inner_)) / (outer_ - inner_);
}

}  // namespace toruslab
