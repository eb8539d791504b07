#include "toruslab/cone_analysis.hpp"

#include "toruslab/parallel.hpp"
#include "toruslab/rng.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <random>

namespace toruslab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();


std::vector<double> as_vector(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

// Uniform in B(p, r) on the lift.
Vec sample_ball(const ConstructionParams& P, std::mt19937_64& rng) {
  std::normal_distribution<double> N;
  std::uniform_real_distribution<double> U(0, 1);
  Vec d(P.n);
  for (int j = 0; j < P.n; ++j) d[j] = N(rng);
  double rad = P.r * std::pow(U(rng), 1.0 / P.n);
  return wrap(Vec(P.p + rad * d / d.norm())).coords();
}

// Uniform in K0^eps x S^1 or K1^eps x S^1.
Vec sample_blender(const ConstructionParams& P, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0, 1);
  const double eps = P.eps();
  const bool k1 = U(rng) < 0.5;
  const double lo = (k1 ? 3.0 / 28 : -1.0 / 28) - eps, hi = (k1 ? 5.0 / 28 : 1.0 / 28) + eps;
  Vec x(P.n);
  for (int j = 0; j + 1 < P.n; ++j) x[j] = lo + (hi - lo) * U(rng);
  x[P.n - 1] = -1 + 2 * U(rng);
  return x;
}

Vec sample_point(const ConstructionParams& P, const SweepOptions& opt, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0, 1);
  if (opt.ball_only) return sample_ball(P, rng);
  if (U(rng) < opt.stratified_fraction) return U(rng) < 0.5 ? sample_blender(P, rng) : sample_ball(P, rng);
  Vec x(P.n);
  for (int j = 0; j < P.n; ++j) x[j] = -1 + 2 * U(rng);
  return x;
}

struct SweepResult {
  long samples = 0, head_failures = 0;
  double worst_ratio = 0, worst_expansion = kInf;
  Vec ratio_point, ratio_vector, expansion_point, expansion_vector;
};

SweepResult cone_sweep(const TorusMap& map, const ConstructionParams& P, const SweepOptions& opt) {
  if (map.dim() != P.n) throw DomainError("map and params disagree on n");
  if (opt.points < 1 || opt.vectors_per_point < 1) throw DomainError("empty cone sweep");
  const int n = P.n;
  const double kappa = P.kappa;
  const long blocks = (opt.points + kBlockSize - 1) / kBlockSize;
  std::vector<SweepResult> parts(static_cast<std::size_t>(blocks));
  parallel_for(blocks, opt.tasks, [&](long b) {
    auto rng = block_rng(opt.seed, static_cast<std::uint64_t>(b), 0xc0);
    std::normal_distribution<double> N;
    std::uniform_real_distribution<double> U(0, 1);
    SweepResult& out = parts[static_cast<std::size_t>(b)];
    const long end = std::min(opt.points, (b + 1) * kBlockSize);
    for (long i = b * kBlockSize; i < end; ++i) {
      Vec x = sample_point(P, opt, rng);
      Mat J = map.jacobian(x);
      for (int k = 0; k < opt.vectors_per_point; ++k) {
        Vec v(n);
        for (int j = 0; j + 1 < n; ++j) v[j] = N(rng);
        v.head(n - 1) /= v.head(n - 1).norm();
        double t = (k % 2 == 0) ? kappa : kappa * U(rng);
        v[n - 1] = U(rng) < 0.5 ? t : -t;
        Vec w = J * v;
        ++out.samples;
        double ratio = cone_ratio(w, n - 1);
        if (!std::isfinite(ratio)) ++out.head_failures;
        if (ratio > out.worst_ratio || out.ratio_point.size() == 0) {
          out.worst_ratio = std::max(out.worst_ratio, ratio);
          out.ratio_point = x;
          out.ratio_vector = v;
        }
        double e = w.norm() / v.norm();
        if (e < out.worst_expansion) {
          out.worst_expansion = e;
          out.expansion_point = x;
          out.expansion_vector = v;
        }
      }
    }
  });
  SweepResult all;
  for (const auto& p : parts) {
    all.samples += p.samples;
    all.head_failures += p.head_failures;
    if (p.worst_ratio > all.worst_ratio || all.ratio_point.size() == 0) {
      all.worst_ratio = p.worst_ratio;
      all.ratio_point = p.ratio_point;
      all.ratio_vector = p.ratio_vector;
    }
    if (p.worst_expansion < all.worst_expansion) {
      all.worst_expansion = p.worst_expansion;
      all.expansion_point = p.expansion_point;
      all.expansion_vector = p.expansion_vector;
    }
  }
  return all;
}

}  // namespace

nlohmann::json ConeReport::to_json() const {
  return {{"map", tag},
          {"samples", samples},
          {"worst_ratio", worst_ratio},
          {"worst_expansion", worst_expansion},
          {"bound", bound},
          {"margin", bound - worst_ratio},
          {"head_failures", head_failures},
          {"worst_point", as_vector(worst_point)},
          {"worst_vector", as_vector(worst_vector)},
          {"pass", pass}};
}

double theoretical_cone_bound(const std::string& tag, double kappa) {
  if (tag == "A") return kappa / 14 + 1e-12;
  if (tag == "f") return 5 * kappa / 14 + 1e-9;
  return kappa;
}

ConeReport verify_cone_invariance(const TorusMap& map, const ConstructionParams& params, const SweepOptions& opt) {
  auto s = cone_sweep(map, params, opt);
  ConeReport r;
  r.tag = map.tag();
  r.samples = s.samples;
  r.worst_ratio = s.worst_ratio;
  r.worst_expansion = s.worst_expansion;
  r.bound = theoretical_cone_bound(r.tag, params.kappa);
  r.head_failures = s.head_failures;
  r.worst_point = s.ratio_point;
  r.worst_vector = s.ratio_vector;
  r.pass = s.head_failures == 0 && r.worst_ratio < r.bound && r.worst_expansion > 4;
  return r;
}

ConeReport verify_expansion(const TorusMap& map, const ConstructionParams& params, const SweepOptions& opt) {
  auto s = cone_sweep(map, params, opt);
  ConeReport r;
  r.tag = map.tag();
  r.samples = s.samples;
  r.worst_ratio = s.worst_ratio;
  r.worst_expansion = s.worst_expansion;
  r.bound = 4;
  r.head_failures = s.head_failures;
  r.worst_point = s.expansion_point;
  r.worst_vector = s.expansion_vector;
  r.pass = s.head_failures == 0 && r.worst_expansion > 4;
  return r;
}

Mat fd_jacobian(const TorusMap& map, const Vec& x, double h) {
  if (!(h >= 1e-8 && h <= 1e-3)) throw DomainError("fd_jacobian: h must lie in [1e-8, 1e-3]");
  const int n = map.dim();
  if (x.size() != n) throw DomainError("fd_jacobian: dimension mismatch");
  Mat J(n, n);
  for (int j = 0; j < n; ++j) {
    Vec a = x, b = x;
    a[j] += h;
    b[j] -= h;
    J.col(j) = torus_delta(map.apply(a), map.apply(b)) / (2 * h);
  }
  return J;
}

std::string to_string(FixedPointClass c) {
  switch (c) {
    case FixedPointClass::Saddle: return "saddle";
    case FixedPointClass::Repeller: return "repeller";
    case FixedPointClass::Attractor: return "attractor";
    case FixedPointClass::Nonhyperbolic: return "nonhyperbolic";
    case FixedPointClass::Unresolved: return "unresolved";
  }
  return "unresolved";
}

std::vector<Vec> default_fixed_point_seeds(int n) {
  std::vector<Vec> seeds;
  Vec s = Vec::Zero(n);
  s[n - 1] = 1;
  seeds.push_back(s);
  seeds.push_back(Vec::Zero(n));
  seeds.push_back(Vec::Constant(n, 2.0 / 13));
  s = Vec::Constant(n, 2.0 / 13);
  s[n - 1] = 15.0 / 13;
  seeds.push_back(s);
  return seeds;
}

std::vector<FixedPoint> find_and_classify_fixed_points(const TorusMap& map, const std::vector<Vec>& seeds) {
  const int n = map.dim();
  std::vector<FixedPoint> out;
  for (const Vec& seed : seeds) {
    if (seed.size() != n) throw DomainError("fixed-point seed has the wrong dimension");
    FixedPoint fp;
    fp.seed = seed;
    Vec z = wrap(seed).coords();
    Mat I = Mat::Identity(n, n);
    fp.residual = kInf;
    for (int it = 0; it < 60; ++it) {
      Vec r = torus_delta(map.apply(z), z);
      fp.residual = r.cwiseAbs().maxCoeff();
      fp.iterations = it;
      if (fp.residual <= 1e-12) break;
      Mat J = map.jacobian(z) - I;
      Vec dz = J.fullPivLu().solve(r);
      if (!dz.allFinite() || dz.norm() > 0.5) break;
      z = wrap(Vec(z - dz)).coords();
    }
    fp.point = z;
    if (fp.residual <= 1e-9) {
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic> J = map.jacobian(z);
      Eigen::EigenSolver<decltype(J)> es(J, false);
      int above = 0, below = 0, unit = 0;
      for (int i = 0; i < n; ++i) {
        double m = std::abs(es.eigenvalues()[i]);
        fp.moduli.push_back(m);
        if (std::abs(m - 1) <= 1e-6) ++unit;
        else if (m > 1) ++above;
        else ++below;
      }
      std::sort(fp.moduli.begin(), fp.moduli.end(), std::greater<>());
      if (unit > 0) fp.cls = FixedPointClass::Nonhyperbolic;
      else if (below == 0) fp.cls = FixedPointClass::Repeller;
      else if (above == 0) fp.cls = FixedPointClass::Attractor;
      else fp.cls = FixedPointClass::Saddle;
    }
    out.push_back(fp);
  }
  return out;
}

namespace {

// Horizontal stretching of map^steps at x: max column norm of the head block of the product Jacobian.
double horizontal_stretch(const TorusMap& map, Vec x, int steps) {
  const int n = map.dim();
  Mat D = Mat::Identity(n, n);
  for (int s = 0; s < steps; ++s) {
    D = map.jacobian(x) * D;
    x = map.apply(x);
  }
  double L = 0;
  for (int j = 0; j + 1 < n; ++j) L = std::max(L, D.col(j).head(n - 1).norm());
  return L;
}

// Calls fn(v) for every point v of the cubic grid of spacing h inside the ball of radius rho in R^d.
template <class Fn>
void for_grid_ball(int d, double rho, double h, int tasks, Fn&& fn) {
  const long m = static_cast<long>(std::floor(rho / h));
  const long side = 2 * m + 1;
  long total = 1;
  for (int i = 0; i < d; ++i) total *= side;
  const long chunk = 4096;
  parallel_for((total + chunk - 1) / chunk, tasks, [&](long c) {
    Vec v(d);
    for (long idx = c * chunk; idx < std::min(total, (c + 1) * chunk); ++idx) {
      long rest = idx;
      for (int i = 0; i < d; ++i) {
        v[i] = h * static_cast<double>(rest % side - m);
        rest /= side;
      }
      if (v.norm() <= rho) fn(v);
    }
  });
}

}  // namespace

nlohmann::json DiskGrowthReport::to_json() const {
  nlohmann::json s = nlohmann::json::array();
  for (const auto& st : steps)
    s.push_back({{"inradius", st.inradius},
                 {"previous_inradius", st.previous_inradius},
                 {"saturated", st.saturated},
                 {"ratio", st.ratio},
                 {"param_radius", st.param_radius},
                 {"spacing", st.spacing},
                 {"points", st.points}});
  return {{"steps", s}, {"min_ratio", min_ratio}, {"pass", pass}};
}

DiskGrowthReport disk_growth_check(const TorusMap& map, const Vec& center, double radius, int iterations,
                                   double factor, const DiskGrowthOptions& opt) {
  const int n = map.dim();
  const int d = n - 1;
  if (center.size() != n) throw DomainError("disk centre has the wrong dimension");
  if (d < 1 || d > 3) throw DomainError("disk growth supports n = 2..4");
  if (!(radius > 0) || radius >= 1) throw DomainError("disk radius must lie in (0, 1)");
  if (iterations < 0) throw DomainError("negative iteration count");

  auto point = [&](const Vec& v) {
    Vec x = center;
    x.head(d) += v;
    return wrap(x).coords();
  };

  DiskGrowthReport rep;
  // Step 0: the disk itself.
  {
    DiskGrowthStep st;
    st.spacing = opt.resolution / 4;
    st.param_radius = radius;
    OccupancyGrid g(d, opt.resolution);
    std::atomic<long> count{0};
    for_grid_ball(d, radius, st.spacing, opt.tasks, [&](const Vec& v) {
      g.add(point(v));
      count.fetch_add(1, std::memory_order_relaxed);
    });
    st.points = count;
    auto est = g.inradius();
    st.inradius = est.radius;
    st.saturated = est.saturated;
    rep.steps.push_back(st);
  }

  rep.min_ratio = kInf;
  bool ok = true;
  for (int s = 1; s <= iterations; ++s) {
    DiskGrowthStep st;
    if (rep.steps.back().saturated) {
      st.saturated = true;
      st.inradius = rep.steps.back().inradius;
      rep.steps.push_back(st);
      continue;
    }
    // Pilot estimate of the horizontal stretching of map^s over the disk.
    double L = 1;
    const double pilot_h = radius / 8;
    for_grid_ball(d, radius, pilot_h, 1, [&](const Vec& v) { L = std::max(L, horizontal_stretch(map, point(v), s)); });
    st.spacing = opt.resolution / (4 * L);
    const double per_axis = std::floor(std::pow(static_cast<double>(opt.max_points), 1.0 / d));
    st.param_radius = std::min(radius, 0.5 * (per_axis - 1) * st.spacing);

    OccupancyGrid prev(d, opt.resolution), cur(d, opt.resolution);
    std::atomic<long> count{0};
    for_grid_ball(d, st.param_radius, st.spacing, opt.tasks, [&](const Vec& v) {
      Vec x = point(v);
      for (int k = 0; k + 1 < s; ++k) x = map.apply(x);
      prev.add(x);
      cur.add(map.apply(x));
      count.fetch_add(1, std::memory_order_relaxed);
    });
    st.points = count;
    auto a = prev.inradius(), b = cur.inradius();
    st.previous_inradius = a.radius;
    st.inradius = b.radius;
    st.saturated = b.saturated;
    if (!st.saturated) {
      st.ratio = a.radius > 0 ? b.radius / a.radius : kInf;
      rep.min_ratio = std::min(rep.min_ratio, st.ratio);
      if (st.ratio < factor) ok = false;
    }
    rep.steps.push_back(st);
  }
  if (!std::isfinite(rep.min_ratio)) rep.min_ratio = 0;
  rep.pass = ok;
  return rep;
}

nlohmann::json BlenderCoveringReport::to_json() const {
  nlohmann::json c = nlohmann::json::array();
  for (const auto& k : checks) c.push_back({{"name", k.name}, {"pass", k.pass}, {"detail", k.detail}});
  return {{"epsilon", to_string(epsilon)}, {"precondition", precondition}, {"checks", c}, {"pass", pass}};
}

BlenderCoveringReport blender_covering_check(const Rational& epsilon, double a0) {
  if (epsilon < 0) throw DomainError("epsilon must be non-negative");
  using R = Rational;
  struct Interval {
    R lo, hi;
  };
  auto str = [](const Interval& I) { return "[" + to_string(I.lo) + ", " + to_string(I.hi) + "]"; };
  auto contains = [](const Interval& a, const Interval& b) { return a.lo <= b.lo && b.hi <= a.hi; };
  auto scale = [](const Interval& I, R s, R shift) { return Interval{I.lo * s + shift, I.hi * s + shift}; };

  const R e = epsilon;
  const Interval k0{R(-1, 28) - e, R(1, 28) + e}, k1{R(3, 28) - e, R(5, 28) + e};
  const Interval target{R(-1, 2) - e, R(1, 2) + e};

  BlenderCoveringReport rep;
  rep.epsilon = epsilon;
  rep.precondition = k0.hi < k1.lo;
  rep.checks.push_back({"cubes_disjoint", rep.precondition, "K0^eps = " + str(k0) + ", K1^eps = " + str(k1)});

  const Interval img0 = scale(k0, 14, 0), img1 = scale(k1, 14, -2);
  rep.checks.push_back({"image_K0_covers", contains(img0, target), "14 K0^eps = " + str(img0) + " vs " + str(target)});
  rep.checks.push_back(
      {"image_K1_covers", contains(img1, target), "14 K1^eps - 2 = " + str(img1) + " vs " + str(target)});
  rep.checks.push_back({"cubes_inside_target", contains(target, k0) && contains(target, k1), "K^eps within " + str(target)});

  auto ifs = build_ifs(a0);
  bool onto = true;
  std::string detail;
  for (int i = 0; i < 2; ++i) {
    const auto& g = ifs.generator(i);
    double lift_gap = std::abs(g.lift(0.3 + 2) - g.lift(0.3) - 2);
    bool ok = g.min_derivative() > 0 && lift_gap < 1e-12;
    onto = onto && ok;
    detail += "g" + std::to_string(i + 1) + ": min g' = " + std::to_string(g.min_derivative()) + "; ";
  }
  rep.checks.push_back({"fiber_maps_onto", onto, detail});

  rep.pass = true;
  for (const auto& c : rep.checks) rep.pass = rep.pass && c.pass;
  return rep;
}

std::optional<Vec> newton_preimage(const TorusMap& map, const Vec& target, Vec guess, double tol, int max_iter) {
  Vec z = wrap(guess).coords();
  for (int it = 0; it < max_iter; ++it) {
    Vec r = torus_delta(map.apply(z), target);
    if (r.cwiseAbs().maxCoeff() <= tol) return z;
    Vec dz = map.jacobian(z).fullPivLu().solve(r);
    if (!dz.allFinite() || dz.norm() > 0.5) return std::nullopt;
    z = wrap(Vec(z - dz)).coords();
  }
  return std::nullopt;
}

namespace {

struct ProjectedArc {
  double lo = 0, length = 0;
};

// Extent of the S^1-projection of a polyline, unwrapping consecutive steps.
ProjectedArc project(const std::vector<Vec>& pts) {
  const int n = static_cast<int>(pts.front().size());
  double y = pts.front()[n - 1], lo = y, hi = y;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    y += wrap_diff(pts[i][n - 1], pts[i - 1][n - 1]);
    lo = std::min(lo, y);
    hi = std::max(hi, y);
  }
  return {lo, hi - lo};
}

double posmod2(double x) { return x - 2.0 * std::floor(x / 2.0); }

bool arcs_cover(const ProjectedArc& a, const ProjectedArc& b) {
  if (a.length >= 2 || b.length >= 2) return true;
  double s = a.lo + a.length;
  s = b.lo + std::fmod(std::fmod(s - b.lo, 2.0) + 2.0, 2.0);
  return s + (2 - a.length) <= b.lo + b.length;
}

// Preimage of every polyline point in K_branch x S^1, seeded from the closed-form f-preimage.
std::optional<std::vector<Vec>> branch_preimage(const TorusMap& map, const IFSFamily& ifs, const std::vector<Vec>& pts,
                                                int branch) {
  std::vector<Vec> out;
  out.reserve(pts.size());
  for (const Vec& p : pts) {
    const int n = static_cast<int>(p.size());
    Vec guess(n);
    for (int j = 0; j + 1 < n; ++j) guess[j] = (wrap_scalar(p[j]) + 2.0 * branch) / 14;
    guess[n - 1] = inverse_branch(ifs.generator(branch), p[n - 1]);
    auto z = newton_preimage(map, p, guess, 1e-11);
    if (!z) return std::nullopt;
    out.push_back(*z);
  }
  return out;
}

}  // namespace

nlohmann::json PreimageCoverResult::to_json() const {
  return {{"covered", covered}, {"depth", depth}, {"projected_lengths", projected_lengths}, {"branch", branch},
          {"failure", failure}};
}

PreimageCoverResult preimage_projection_cover(const TorusMap& map, const ConstructionParams& params, double x0,
                                              double y_center, double length, int max_depth, int fiber_points) {
  if (map.dim() != params.n) throw DomainError("map and params disagree on n");
  if (!(length > 0) || fiber_points < 2 || max_depth < 0) throw DomainError("bad preimage-cover arguments");
  PreimageCoverResult res;
  res.projected_lengths.push_back(std::min(length, 2.0));
  if (length >= 2) {
    res.covered = true;
    return res;
  }
  const int n = params.n;
  const auto ifs = build_ifs(params);
  std::vector<Vec> pts;
  for (int i = 0; i < fiber_points; ++i) {
    Vec z = Vec::Constant(n, x0);
    z[n - 1] = y_center - length / 2 + length * i / (fiber_points - 1);
    pts.push_back(wrap(z).coords());
  }
  double current = length, current_lo = y_center - length / 2;
  std::vector<double> attractors[2];
  for (int i = 0; i < 2; ++i)
    for (const auto& fp : fixed_points(ifs.generator(i)))
      if (fp.slope < 1) attractors[i].push_back(fp.x);
  for (int depth = 1; depth <= max_depth; ++depth) {
    std::optional<std::vector<Vec>> comp[2] = {branch_preimage(map, ifs, pts, 0), branch_preimage(map, ifs, pts, 1)};
    ProjectedArc arc[2];
    for (int i = 0; i < 2; ++i)
      if (comp[i]) arc[i] = project(*comp[i]);
    if (comp[0] && comp[1] && arcs_cover(arc[0], arc[1])) {
      res.covered = true;
      res.depth = depth;
      res.branch.push_back(-1);
      res.projected_lengths.push_back(2.0);
      return res;
    }
    // As in check_minimality: a branch whose generator has an attractor inside the current
    // gap only circles the gap around that attractor, so prefer the other branch even if it
    // does not enlarge the projection this step.
    const double gap = 2.0 - current, right = current_lo + current;
    int pick = -1, grow = -1;
    for (int i = 0; i < 2; ++i) {
      if (!comp[i]) continue;
      bool holds_attractor = false;
      for (double x : attractors[i]) holds_attractor = holds_attractor || posmod2(x - right) < gap;
      if (!holds_attractor && (pick < 0 || arc[i].length > arc[pick].length)) pick = i;
      if (arc[i].length > current && (grow < 0 || arc[i].length > arc[grow].length)) grow = i;
    }
    if (pick < 0) pick = grow;
    if (pick < 0) {
      res.failure = (!comp[0] || !comp[1]) ? "Newton failed on a preimage component"
                                           : "neither component enlarges the projection";
      res.depth = depth;
      return res;
    }
    pts = std::move(*comp[pick]);
    current = arc[pick].length;
    current_lo = arc[pick].lo;
    res.branch.push_back(pick);
    res.projected_lengths.push_back(std::min(current, 2.0));
    res.depth = depth;
    if (current >= 2) {
      res.covered = true;
      return res;
    }
  }
  res.failure = "max_depth exceeded";
  return res;
}

InvariantCircle invariant_circle_approx(const TorusMap& map, const ConstructionParams& params, int depth,
                                        int fiber_points) {
  if (map.dim() != params.n) throw DomainError("map and params disagree on n");
  if (depth < 0 || fiber_points < 2) throw DomainError("bad invariant-circle arguments");
  const int n = params.n;
  const auto ifs = build_ifs(params);
  InvariantCircle out;
  for (int i = 0; i < fiber_points; ++i) {
    Vec z = Vec::Constant(n, 0.5);
    z[n - 1] = -1 + 2.0 * i / fiber_points;
    bool ok = true;
    for (int k = 0; k < depth && ok; ++k) {
      auto next = branch_preimage(map, ifs, {z}, 0);
      if (next) z = next->front();
      else ok = false;
    }
    out.points.push_back(z);
    out.flagged.push_back(!ok);
    if (ok) out.max_horizontal_deviation = std::max(out.max_horizontal_deviation, z.head(n - 1).cwiseAbs().maxCoeff());
  }
  return out;
}

}  // namespace toruslab
