// Circle maps on S^1 = [-1, 1) / (1 ~ -1) and the two-generator IFS built from them.
#pragma once

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace toruslab {

struct Breakpoint {
  double position;
  double value;
  double left_slope;
  double right_slope;
};

/// Degree-one piecewise-linear lift restricted to [-1, 1]; fixes -1 and 1.
class PiecewiseLinearCircleMap {
 public:
  explicit PiecewiseLinearCircleMap(std::vector<Breakpoint> breakpoints);

  /// Value on [-1, 1] (no wrapping of the result).
  double value(double x) const;
  double slope(double x) const;
  const std::vector<Breakpoint>& breakpoints() const { return breakpoints_; }
  /// sup |pl(x) - x|; attained at a breakpoint or an end since the displacement is piecewise linear.
  double sup_displacement() const;

 private:
  std::vector<Breakpoint> breakpoints_;
  std::vector<double> xs_;  // nodes including the ends -1 and 1
  std::vector<double> ys_;
};

/// The three-piece map: slope 3/2 on [-a, a], slope (2 - 3a)/(2 - 2a) outside.
PiecewiseLinearCircleMap build_pl_map(double a);

/// C^1 circle diffeomorphism: a PL map with cubic Hermite blends of half-width `band`
/// around each breakpoint, optionally conjugated by the rotation x -> x + shift.
class SmoothCircleMap {
 public:
  SmoothCircleMap(PiecewiseLinearCircleMap pl, double band, double shift = 0.0);

  /// Wrapped value in [-1, 1).
  double operator()(double x) const;
  double derivative(double x) const;
  /// Increasing lift R -> R, G(x + 2) = G(x) + 2.
  double lift(double x) const;
  double inverse_lift(double y) const;
  /// g(x) - x as a real in (-1, 1).
  double displacement(double x) const;
  /// Solve g(x) = y, residual <= 1e-12.
  double inverse(double y) const;

  double sup_derivative() const { return sup_derivative_; }
  double min_derivative() const { return min_derivative_; }
  double sup_displacement() const { return sup_displacement_; }
  double shift() const { return shift_; }
  double band() const { return band_; }
  const PiecewiseLinearCircleMap& pl() const { return pl_; }
  SmoothCircleMap shifted(double extra) const { return SmoothCircleMap(pl_, band_, shift_ + extra); }

  /// Arc (centre, half-width) outside of which |g'| < 1.
  double expanding_center() const;
  double expanding_half_width() const { return expanding_half_width_; }

  nlohmann::json describe() const;

 private:
  double base_value(double x) const;  // unshifted, x in [-1, 1]
  double base_slope(double x) const;
  double base_inverse(double y) const;

  PiecewiseLinearCircleMap pl_;
  double band_;
  double shift_;
  double sup_derivative_ = 0;
  double min_derivative_ = 0;
  double sup_displacement_ = 0;
  double expanding_half_width_ = 0;
};

/// Blend the breakpoints of `pl`; throws DomainError if bands overlap or monotonicity fails.
SmoothCircleMap smooth_pl_map(const PiecewiseLinearCircleMap& pl, double band);

/// g2(x) = g1(x - 2/13) + 2/13.
SmoothCircleMap make_g2(const SmoothCircleMap& g1);

inline constexpr double kGeneratorShift = 2.0 / 13.0;

double inverse_branch(const SmoothCircleMap& g, double y);

/// Generators g1, g2 with the contraction regions {|g_i'| < 1}.
struct IFSFamily {
  SmoothCircleMap g1;
  SmoothCircleMap g2;

  const SmoothCircleMap& generator(int i) const { return i == 0 ? g1 : g2; }
  bool contracts(int i, double x) const;
  /// Grid sweep: at every point some generator has |g'| < 1 - margin. Returns the worst point's best |g'|.
  double worst_best_derivative(double spacing) const;
};

/// The generator pair for a displacement budget k: a0 = min(1/27, 0.9 k), band a0/10.
IFSFamily build_ifs(double a0);
double default_a0(double k);

struct Arc {
  double center;
  double length;
};

struct MinimalityResult {
  bool covered = false;
  int steps = 0;
  double final_length = 0;
  bool obstructed = false;   // the arc misses a forward-invariant arc, so covering is impossible
  std::vector<int> choices;  // generator index used at each step; -1 for the final two-branch union
  std::string failure;
};

/// Preimage growth of a single arc. Each step replaces the arc by its preimage under a
/// generator with no attracting fixed point in the uncovered gap (the gap then drifts into
/// that generator's repeller and collapses), preferring the smaller resulting gap; when
/// every generator has an attractor in the gap, the generator that enlarges the arc most is used.
/// Stops when the uncovered gap is below `gap_tolerance`, or when the preimages of the current
/// arc under g1 and g2 together cover S^1 (recorded as choice -1).
struct CircleFixedPoint {
  double x;
  double slope;
};
/// Fixed points of g on the circle (sign changes of lift(x) - x on a 40000-point grid, bisected).
std::vector<CircleFixedPoint> fixed_points(const SmoothCircleMap& g);

MinimalityResult check_minimality(const IFSFamily& family, Arc arc, int max_steps,
                                  double gap_tolerance = 1e-9);

struct IdentityGap {
  double c0_gap;
  double derivative_sup;
};

/// sup |g - Id| and sup |g'| over a dense grid, maxed with the certified bounds.
IdentityGap c1_gap_to_identity(const SmoothCircleMap& g, int grid = 100000);

struct InvariantArc {
  double lo;      // arc [lo, lo + length] in lift coordinates
  double length;
  bool forward_invariant;
};

/// The arc running from g1's attracting fixed point to g2's that avoids both repellers,
/// checked for forward invariance under both generators.
InvariantArc forward_invariant_attractor_arc(const IFSFamily& family);

}  // namespace toruslab
