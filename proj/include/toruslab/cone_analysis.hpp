// Sampled certification of the cone field, expansion, disk growth, blender covering,
// fixed points and preimage covering.
#pragma once

#include "toruslab/maps.hpp"
#include "toruslab/params.hpp"
#include "toruslab/torus.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace toruslab {

struct SweepOptions {
  long points = 10000;
  int vectors_per_point = 10;
  std::uint64_t seed = 0;
  int tasks = 0;
  /// Fraction of points drawn from K^eps x S^1 and B(p, r) together.
  double stratified_fraction = 0.5;
  /// Restrict every point to B(p, r).
  bool ball_only = false;
};

struct ConeReport {
  std::string tag;
  long samples = 0;
  double worst_ratio = 0;
  double worst_expansion = 0;
  double bound = 0;
  long head_failures = 0;
  Vec worst_point, worst_vector;
  bool pass = false;

  nlohmann::json to_json() const;
};

/// Ratio bound on DF v for v in the cone: kappa/14 for A, 5 kappa/14 for f, kappa otherwise.
double theoretical_cone_bound(const std::string& tag, double kappa);

/// Worst tail/head ratio of J v over sampled points and cone vectors (half on the boundary).
ConeReport verify_cone_invariance(const TorusMap& map, const ConstructionParams& params, const SweepOptions& opt);
/// Worst |J v| / |v| over the same samples; pass when above 4.
ConeReport verify_expansion(const TorusMap& map, const ConstructionParams& params, const SweepOptions& opt);

/// Central differences with torus-aware output displacement; h in [1e-8, 1e-3].
Mat fd_jacobian(const TorusMap& map, const Vec& x, double h = 1e-6);

enum class FixedPointClass { Saddle, Repeller, Attractor, Nonhyperbolic, Unresolved };
std::string to_string(FixedPointClass c);

struct FixedPoint {
  Vec seed, point;
  double residual = 0;
  int iterations = 0;
  std::vector<double> moduli;
  FixedPointClass cls = FixedPointClass::Unresolved;
};

/// (0,..,0,1), (0,..,0,0), (2/13,..,2/13), (2/13,..,2/13,15/13).
std::vector<Vec> default_fixed_point_seeds(int n);
std::vector<FixedPoint> find_and_classify_fixed_points(const TorusMap& map, const std::vector<Vec>& seeds);

struct DiskGrowthOptions {
  double resolution = 1.0 / 400;
  long max_points = 6'000'000;
  int tasks = 0;
};

struct DiskGrowthStep {
  double inradius = 0;
  double previous_inradius = 0;  // the same parameter set one step earlier
  bool saturated = false;
  double ratio = 0;  // inradius / previous_inradius; 0 at step 0 or when saturated
  double param_radius = 0;  // < disk radius when only a sub-disk fits the point budget
  double spacing = 0;
  long points = 0;
};

struct DiskGrowthReport {
  std::vector<DiskGrowthStep> steps;
  double min_ratio = 0;  // over unsaturated steps
  bool pass = false;
  nlohmann::json to_json() const;
};

/// Pushes the flat horizontal disk {center + (v, 0) : |v| <= radius} forward `iterations`
/// times and records the (n-1)-inradius of its horizontal projection after each step.
/// Each step re-samples the parameter disk fine enough that neighbouring images are at
/// most half a cell apart (pilot Jacobian estimate with a safety factor 2). When the
/// point budget is exceeded a central sub-disk is used, and the ratio compares the
/// images of that same sub-disk at consecutive steps.
DiskGrowthReport disk_growth_check(const TorusMap& map, const Vec& center, double radius, int iterations,
                                   double factor, const DiskGrowthOptions& opt = {});

struct CoveringCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct BlenderCoveringReport {
  Rational epsilon;
  bool precondition = true;  // K0^eps and K1^eps disjoint
  std::vector<CoveringCheck> checks;
  bool pass = false;
  nlohmann::json to_json() const;
};

/// Exact rational interval check of the blender covering inclusions; the fiber generators
/// (built from a0) are checked to be orientation-preserving circle diffeomorphisms.
BlenderCoveringReport blender_covering_check(const Rational& epsilon, double a0 = 1.0 / 27);

struct PreimageCoverResult {
  bool covered = false;
  int depth = 0;
  std::vector<double> projected_lengths;
  std::vector<int> branch;  // 0 = K0, 1 = K1, -1 = final union of both
  std::string failure;
  nlohmann::json to_json() const;
};

/// Recursive preimage components of a box {x0} x [y_lo, y_lo + length] inside K0 x S^1 and
/// K1 x S^1, following the S^1-projection until it covers the circle.
PreimageCoverResult preimage_projection_cover(const TorusMap& map, const ConstructionParams& params, double x0,
                                              double y_center, double length, int max_depth, int fiber_points = 256);

struct InvariantCircle {
  std::vector<Vec> points;
  std::vector<bool> flagged;  // Newton failed on that fiber
  double max_horizontal_deviation = 0;
};

/// Fiber grid of N = intersection of preimages of K0 x S^1 under the K0 inverse branch.
InvariantCircle invariant_circle_approx(const TorusMap& map, const ConstructionParams& params, int depth,
                                        int fiber_points = 256);

/// Solves map(z) = target for z near `guess` (torus-aware Newton).
std::optional<Vec> newton_preimage(const TorusMap& map, const Vec& target, Vec guess, double tol = 1e-12,
                                   int max_iter = 50);

}  // namespace toruslab
