#include "toruslab/circle_ifs.hpp"

#include "toruslab/torus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace toruslab {

namespace {

struct Node {
  double x;
  double y;
};

std::vector<Node> nodes_of(const std::vector<Breakpoint>& bps) {
  std::vector<Node> nodes{{-1.0, -1.0}};
  for (const auto& b : bps) nodes.push_back({b.position, b.value});
  nodes.push_back({1.0, 1.0});
  return nodes;
}

double posmod2(double x) {
  double r = std::fmod(x, 2.0);
  return r < 0 ? r + 2.0 : r;
}

// Cubic Hermite segment on [x0, x0 + h].
struct Hermite {
  double x0, h, y0, m0, y1, m1;

  double value(double x) const {
    double t = (x - x0) / h;
    double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * m0 + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * h * m1;
  }
  double slope(double x) const {
    double t = (x - x0) / h;
    double t2 = t * t;
    return ((6 * t2 - 6 * t) * y0 + (3 * t2 - 4 * t + 1) * h * m0 + (-6 * t2 + 6 * t) * y1 + (3 * t2 - 2 * t) * h * m1) / h;
  }
  // Points t in [0, 1] with slope == c.
  std::vector<double> slope_level(double c) const {
    double a = 6 * y0 + 3 * h * m0 - 6 * y1 + 3 * h * m1;
    double b = -6 * y0 - 4 * h * m0 + 6 * y1 - 2 * h * m1;
    double cc = h * m0 - c * h;
    std::vector<double> ts;
    if (std::abs(a) < 1e-14 * (std::abs(b) + std::abs(cc) + 1e-300)) {
      if (b != 0) ts.push_back(-cc / b);
    } else {
      double disc = b * b - 4 * a * cc;
      if (disc >= 0) {
        double s = std::sqrt(disc);
        ts.push_back((-b - s) / (2 * a));
        ts.push_back((-b + s) / (2 * a));
      }
    }
    std::vector<double> xs;
    for (double t : ts)
      if (t >= 0 && t <= 1) xs.push_back(x0 + t * h);
    return xs;
  }
};

}  // namespace

PiecewiseLinearCircleMap::PiecewiseLinearCircleMap(std::vector<Breakpoint> breakpoints)
    : breakpoints_(std::move(breakpoints)) {
  std::sort(breakpoints_.begin(), breakpoints_.end(),
            [](const Breakpoint& a, const Breakpoint& b) { return a.position < b.position; });
  auto nodes = nodes_of(breakpoints_);
  for (const auto& nd : nodes) {
    xs_.push_back(nd.x);
    ys_.push_back(nd.y);
  }
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    if (!(nodes[i].x > nodes[i - 1].x) || !(nodes[i].y > nodes[i - 1].y))
      throw DomainError("PiecewiseLinearCircleMap: must be strictly increasing inside (-1, 1)");
  }
  for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
    double left = (nodes[i + 1].y - nodes[i].y) / (nodes[i + 1].x - nodes[i].x);
    double right = (nodes[i + 2].y - nodes[i + 1].y) / (nodes[i + 2].x - nodes[i + 1].x);
    if (std::abs(left - breakpoints_[i].left_slope) > 1e-12 || std::abs(right - breakpoints_[i].right_slope) > 1e-12)
      throw DomainError("PiecewiseLinearCircleMap: slopes inconsistent with values");
  }
  double wrap_left = (nodes[1].y - nodes[0].y) / (nodes[1].x - nodes[0].x);
  double wrap_right = (nodes.back().y - nodes[nodes.size() - 2].y) / (nodes.back().x - nodes[nodes.size() - 2].x);
  if (std::abs(wrap_left - wrap_right) > 1e-12)
    throw DomainError("PiecewiseLinearCircleMap: slope must match across 1 ~ -1");
}

double PiecewiseLinearCircleMap::value(double x) const {
  std::size_t i = 1;
  while (i + 1 < xs_.size() && x > xs_[i]) ++i;
  return ys_[i - 1] + (ys_[i] - ys_[i - 1]) / (xs_[i] - xs_[i - 1]) * (x - xs_[i - 1]);
}

double PiecewiseLinearCircleMap::slope(double x) const {
  std::size_t i = 1;
  while (i + 1 < xs_.size() && x > xs_[i]) ++i;
  return (ys_[i] - ys_[i - 1]) / (xs_[i] - xs_[i - 1]);
}

double PiecewiseLinearCircleMap::sup_displacement() const {
  double s = 0;
  for (const auto& n : nodes_of(breakpoints_)) s = std::max(s, std::abs(n.y - n.x));
  return s;
}

PiecewiseLinearCircleMap build_pl_map(double a) {
  if (!(a > 0 && a < 2.0 / 3.0)) throw DomainError("build_pl_map: a must lie in (0, 2/3)");
  const double outer = (2 - 3 * a) / (2 - 2 * a);
  return PiecewiseLinearCircleMap({{-a, -1.5 * a, outer, 1.5}, {a, 1.5 * a, 1.5, outer}});
}

SmoothCircleMap::SmoothCircleMap(PiecewiseLinearCircleMap pl, double band, double shift)
    : pl_(std::move(pl)), band_(band), shift_(shift) {
  const auto& bps = pl_.breakpoints();
  if (!(band > 0)) throw DomainError("smooth_pl_map: band must be positive");
  for (std::size_t i = 0; i < bps.size(); ++i) {
    if (bps[i].position - band <= -1.0 || bps[i].position + band >= 1.0)
      throw DomainError("smooth_pl_map: band crosses the wrap point");
    if (i > 0 && bps[i].position - bps[i - 1].position <= 2 * band)
      throw DomainError("smooth_pl_map: blend bands overlap");
  }
  double pl_slope_min = std::numeric_limits<double>::infinity(), pl_slope_max = 0;
  for (const auto& b : bps) {
    pl_slope_min = std::min({pl_slope_min, b.left_slope, b.right_slope});
    pl_slope_max = std::max({pl_slope_max, b.left_slope, b.right_slope});
  }
  if (bps.empty()) pl_slope_min = pl_slope_max = 1.0;
  sup_derivative_ = pl_slope_max;
  min_derivative_ = pl_slope_min;
  // Displacement outside bands is linear between band edges and the ends +-1.
  sup_displacement_ = std::max(std::abs(pl_.value(-1.0) + 1.0), std::abs(pl_.value(1.0) - 1.0));
  for (const auto& b : bps) {
    Hermite hm{b.position - band, 2 * band, pl_.value(b.position - band), b.left_slope, pl_.value(b.position + band),
               b.right_slope};
    std::vector<double> xs{hm.x0, hm.x0 + hm.h};
    for (double x : hm.slope_level(1.0)) xs.push_back(x);
    for (double x : xs) sup_displacement_ = std::max(sup_displacement_, std::abs(hm.value(x) - x));
    // Slope extrema: the end slopes and, if interior, the vertex of the quadratic slope.
    // When the secant is the mean of the end slopes the slope is linear (a2 = 0 up to rounding).
    std::vector<double> ss{b.left_slope, b.right_slope};
    double a2 = 6 * hm.y0 + 3 * hm.h * hm.m0 - 6 * hm.y1 + 3 * hm.h * hm.m1;
    double b2 = -6 * hm.y0 - 4 * hm.h * hm.m0 + 6 * hm.y1 - 2 * hm.h * hm.m1;
    if (std::abs(a2) > 1e-9 * hm.h * (std::abs(hm.m0) + std::abs(hm.m1))) {
      double tv = -b2 / (2 * a2);
      if (tv > 0 && tv < 1) ss.push_back(hm.slope(hm.x0 + tv * hm.h));
    }
    for (double s : ss) {
      sup_derivative_ = std::max(sup_derivative_, s);
      min_derivative_ = std::min(min_derivative_, s);
    }
    if (b.position > 0) {
      auto lv = hm.slope_level(1.0);
      if (!lv.empty()) expanding_half_width_ = std::max(expanding_half_width_, lv.front());
    }
  }
  if (!(min_derivative_ > 0)) throw DomainError("smooth_pl_map: blend is not monotone");
}

double SmoothCircleMap::base_value(double x) const {
  for (const auto& b : pl_.breakpoints()) {
    if (std::abs(x - b.position) < band_) {
      Hermite hm{b.position - band_, 2 * band_, pl_.value(b.position - band_), b.left_slope,
                 pl_.value(b.position + band_), b.right_slope};
      return hm.value(x);
    }
  }
  return pl_.value(x);
}

double SmoothCircleMap::base_slope(double x) const {
  for (const auto& b : pl_.breakpoints()) {
    if (std::abs(x - b.position) < band_) {
      Hermite hm{b.position - band_, 2 * band_, pl_.value(b.position - band_), b.left_slope,
                 pl_.value(b.position + band_), b.right_slope};
      return hm.slope(x);
    }
  }
  return pl_.slope(x);
}

double SmoothCircleMap::base_inverse(double y) const {
  // Safeguarded Newton on the increasing base map over [-1, 1].
  double lo = -1.0, hi = 1.0;
  double x = std::clamp(y, lo, hi);
  for (int it = 0; it < 200; ++it) {
    double r = base_value(x) - y;
    if (std::abs(r) <= 1e-15) return x;
    if (r > 0) hi = x; else lo = x;
    double nx = x - r / base_slope(x);
    if (!(nx > lo && nx < hi)) nx = 0.5 * (lo + hi);
    if (hi - lo < 1e-16) return nx;
    x = nx;
  }
  if (std::abs(base_value(x) - y) <= 1e-12) return x;
  throw NumericError("inverse_branch: no convergence after 200 iterations");
}

double SmoothCircleMap::lift(double x) const {
  double z = x - shift_;
  double w = wrap_scalar(z);
  return base_value(w) + (z - w) + shift_;
}

double SmoothCircleMap::inverse_lift(double y) const {
  double z = y - shift_;
  double w = wrap_scalar(z);
  return base_inverse(w) + (z - w) + shift_;
}

double SmoothCircleMap::operator()(double x) const { return wrap_scalar(lift(x)); }

double SmoothCircleMap::derivative(double x) const { return base_slope(wrap_scalar(x - shift_)); }

double SmoothCircleMap::displacement(double x) const {
  double w = wrap_scalar(x);
  return lift(w) - w;
}

double SmoothCircleMap::inverse(double y) const {
  double x = wrap_scalar(inverse_lift(y));
  if (std::abs(wrap_diff((*this)(x), y)) > 1e-12) throw NumericError("inverse_branch: residual above 1e-12");
  return x;
}

double SmoothCircleMap::expanding_center() const { return wrap_scalar(shift_); }

nlohmann::json SmoothCircleMap::describe() const {
  nlohmann::json bps = nlohmann::json::array();
  for (const auto& b : pl_.breakpoints())
    bps.push_back({{"position", b.position}, {"value", b.value}, {"left_slope", b.left_slope},
                   {"right_slope", b.right_slope}});
  return {{"kind", "hermite-smoothed piecewise-linear circle map"},
          {"breakpoints", bps},
          {"band_half_width", band_},
          {"conjugating_shift", shift_},
          {"certified", {{"sup_derivative", sup_derivative_},
                         {"min_derivative", min_derivative_},
                         {"sup_displacement", sup_displacement_},
                         {"expanding_half_width", expanding_half_width_}}}};
}

SmoothCircleMap smooth_pl_map(const PiecewiseLinearCircleMap& pl, double band) { return SmoothCircleMap(pl, band); }

SmoothCircleMap make_g2(const SmoothCircleMap& g1) { return g1.shifted(kGeneratorShift); }

double inverse_branch(const SmoothCircleMap& g, double y) { return g.inverse(y); }

bool IFSFamily::contracts(int i, double x) const { return std::abs(generator(i).derivative(x)) < 1.0; }

double IFSFamily::worst_best_derivative(double spacing) const {
  const long n = std::lround(2.0 / spacing);
  double worst = 0;
  for (long i = 0; i < n; ++i) {
    double x = -1.0 + 2.0 * double(i) / double(n);
    worst = std::max(worst, std::min(std::abs(g1.derivative(x)), std::abs(g2.derivative(x))));
  }
  return worst;
}

double default_a0(double k) { return std::min(1.0 / 27.0, 0.9 * k); }

IFSFamily build_ifs(double a0) {
  if (!(a0 > 0 && a0 < 1.0 / 26.0)) throw DomainError("build_ifs: a0 must lie in (0, 1/26)");
  SmoothCircleMap g1 = smooth_pl_map(build_pl_map(a0), a0 / 10.0);
  return IFSFamily{g1, make_g2(g1)};
}

std::vector<CircleFixedPoint> fixed_points(const SmoothCircleMap& g) {
  std::vector<CircleFixedPoint> out;
  const int n = 40000;
  auto d = [&](double x) { return g.lift(x) - x; };
  double prev_x = -1.0, prev = d(prev_x);
  for (int i = 1; i <= n; ++i) {
    double x = -1.0 + 2.0 * i / n;
    double cur = d(x);
    if (prev == 0.0) {
      out.push_back({prev_x, g.derivative(prev_x)});
    } else if ((prev < 0) != (cur < 0) && cur != 0.0) {
      double lo = prev_x, hi = x;
      for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
        double mid = 0.5 * (lo + hi);
        if ((d(mid) < 0) == (prev < 0)) lo = mid; else hi = mid;
      }
      out.push_back({0.5 * (lo + hi), g.derivative(0.5 * (lo + hi))});
    }
    prev_x = x;
    prev = cur;
  }
  return out;
}


MinimalityResult check_minimality(const IFSFamily& family, Arc arc, int max_steps, double gap_tolerance) {
  if (!(arc.length > 0)) throw DomainError("check_minimality: arc length must be positive");
  MinimalityResult res;
  double left = arc.center - 0.5 * arc.length;
  double gap = 2.0 - std::min(arc.length, 2.0);
  if (gap <= gap_tolerance) {
    res.covered = true;
    res.final_length = 2.0 - gap;
    return res;
  }

  // Preimages of an arc missing a forward-invariant arc never meet it.
  InvariantArc trap = forward_invariant_attractor_arc(family);
  if (trap.forward_invariant && posmod2(left - trap.lo) > trap.length &&
      posmod2(left + (2.0 - gap) - trap.lo) > trap.length && posmod2(trap.lo - left) > 2.0 - gap) {
    res.obstructed = true;
    res.final_length = 2.0 - gap;
    res.failure = "arc misses the forward-invariant arc; no preimage can cover it";
    return res;
  }

  std::vector<double> attractors[2];
  for (int i = 0; i < 2; ++i)
    for (const auto& fp : fixed_points(family.generator(i)))
      if (fp.slope < 1) attractors[i].push_back(fp.x);

  while (gap > gap_tolerance) {
    if (res.steps >= max_steps) {
      res.failure = "max_steps exceeded";
      res.final_length = 2.0 - gap;
      return res;
    }
    const double right = left + (2.0 - gap);
    // Under g^{-1} the gap drifts to a repeller of g unless it holds an attractor of g.
    int best = -1, best_grow = -1;
    double best_gap = 0, best_left = 0, grow_gap = gap, grow_left = left;
    double gap_lo[2], gap_len[2];
    for (int i = 0; i < 2; ++i) {
      const auto& g = family.generator(i);
      double l = g.inverse_lift(left);
      double r = g.inverse_lift(right);
      double new_gap = 2.0 + l - r;
      gap_lo[i] = r;
      gap_len[i] = new_gap;
      bool holds_attractor = false;
      for (double x : attractors[i]) holds_attractor = holds_attractor || posmod2(x - right) < gap;
      if (!holds_attractor && (best < 0 || new_gap < best_gap)) {
        best = i;
        best_gap = new_gap;
        best_left = l;
      }
      if (new_gap < grow_gap) {
        best_grow = i;
        grow_gap = new_gap;
        grow_left = l;
      }
    }
    // Both preimages are words of the same length; if their gaps are disjoint they cover S^1.
    if (posmod2(gap_lo[1] - gap_lo[0]) >= gap_len[0] && posmod2(gap_lo[0] - gap_lo[1]) >= gap_len[1]) {
      res.choices.push_back(-1);
      ++res.steps;
      res.covered = true;
      res.final_length = 2.0;
      return res;
    }
    if (best < 0) {
      if (best_grow < 0) {
        res.failure = "no generator enlarges the arc";
        res.final_length = 2.0 - gap;
        return res;
      }
      best = best_grow;
      best_gap = grow_gap;
      best_left = grow_left;
    }
    res.choices.push_back(best);
    left = best_left;
    gap = best_gap;
    ++res.steps;
  }
  res.covered = true;
  res.final_length = 2.0 - gap;
  return res;
}

IdentityGap c1_gap_to_identity(const SmoothCircleMap& g, int grid) {
  IdentityGap out{g.sup_displacement(), g.sup_derivative()};
  for (int i = 0; i < grid; ++i) {
    double x = -1.0 + 2.0 * i / grid;
    out.c0_gap = std::max(out.c0_gap, std::abs(g.displacement(x)));
    out.derivative_sup = std::max(out.derivative_sup, std::abs(g.derivative(x)));
  }
  return out;
}

InvariantArc forward_invariant_attractor_arc(const IFSFamily& family) {
  double att[2]{}, rep[2]{};
  for (int i = 0; i < 2; ++i) {
    for (const auto& fp : fixed_points(family.generator(i))) {
      if (fp.slope < 1) att[i] = fp.x; else rep[i] = fp.x;
    }
  }
  auto inside = [](double x, double lo, double len) { return posmod2(x - lo) <= len + 1e-12; };
  InvariantArc arc{att[0], posmod2(att[1] - att[0]), false};
  if (inside(rep[0], arc.lo, arc.length) || inside(rep[1], arc.lo, arc.length)) arc = {att[1], posmod2(att[0] - att[1]), false};
  bool ok = true;
  for (int i = 0; i < 2; ++i) {
    const auto& g = family.generator(i);
    double a = g.lift(arc.lo), b = g.lift(arc.lo + arc.length);
    ok = ok && inside(a, arc.lo, arc.length) && inside(b, arc.lo, arc.length) && (b - a) <= arc.length + 1e-12;
  }
  arc.forward_invariant = ok;
  return arc;
}

}  // namespace toruslab
