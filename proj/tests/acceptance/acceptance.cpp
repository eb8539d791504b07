// One PASS/FAIL line per acceptance criterion. Oracles (finite differences, cone ratios,
// exact rationals) are computed here independently of the library's own checkers where practical.
#include "toruslab/circle_ifs.hpp"
#include "toruslab/cone_analysis.hpp"
#include "toruslab/maps.hpp"
#include "toruslab/orbit_lab.hpp"
#include "toruslab/parallel.hpp"
#include "toruslab/perturbations.hpp"
#include "toruslab/rng.hpp"
#include "toruslab/singular_analysis.hpp"

#include <boost/rational.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace toruslab;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

// Central differences, output displacement taken modulo 2.
Mat oracle_jacobian(const TorusMap& m, const Vec& x, double h) {
  const int n = m.dim();
  Mat J(n, n);
  for (int j = 0; j < n; ++j) {
    Vec a = x, b = x;
    a[j] += h;
    b[j] -= h;
    Vec d = m.apply(a) - m.apply(b);
    for (int i = 0; i < n; ++i) d[i] -= 2.0 * std::round(d[i] / 2.0);
    J.col(j) = d / (2 * h);
  }
  return J;
}

// Half the points uniform on T^n; the rest split between B(p, r) and the fattened blender cubes.
Vec sample_point(const ConstructionParams& P, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0, 1);
  std::normal_distribution<double> N;
  const int n = P.n;
  Vec x(n);
  double pick = U(rng);
  if (pick < 0.25) {
    Vec d(n);
    for (int j = 0; j < n; ++j) d[j] = N(rng);
    x = P.p + P.r * std::pow(U(rng), 1.0 / n) * d / d.norm();
  } else if (pick < 0.5) {
    double c = U(rng) < 0.5 ? 0.0 : 4.0 / 28, w = 1.0 / 28 + P.eps();
    for (int j = 0; j + 1 < n; ++j) x[j] = c - w + 2 * w * U(rng);
    x[n - 1] = -1 + 2 * U(rng);
  } else {
    for (int j = 0; j < n; ++j) x[j] = -1 + 2 * U(rng);
  }
  return wrap(x).coords();
}

struct ConeStats {
  double worst_ratio = 0, worst_expansion = 1e300;
  long samples = 0;
};

// Boundary cone vectors (|tail| = kappa |head|) at stratified points.
ConeStats cone_stats(const TorusMap& m, const ConstructionParams& P, long points, int vectors, std::uint64_t seed) {
  const int n = P.n;
  const long blocks = (points + kBlockSize - 1) / kBlockSize;
  std::vector<ConeStats> part(static_cast<std::size_t>(blocks));
  parallel_for(blocks, 0, [&](long b) {
    auto rng = block_rng(seed, static_cast<std::uint64_t>(b), 0xacc);
    std::normal_distribution<double> N;
    ConeStats& s = part[static_cast<std::size_t>(b)];
    for (long i = b * kBlockSize; i < std::min(points, (b + 1) * kBlockSize); ++i) {
      Vec x = sample_point(P, rng);
      Mat J = m.jacobian(x);
      for (int k = 0; k < vectors; ++k) {
        Vec v(n);
        for (int j = 0; j < n - 1; ++j) v[j] = N(rng);
        v.head(n - 1) /= v.head(n - 1).norm();
        v[n - 1] = (N(rng) < 0 ? -1 : 1) * P.kappa;
        Vec w = J * v;
        double head = w.head(n - 1).norm();
        s.worst_ratio = std::max(s.worst_ratio, head > 0 ? std::abs(w[n - 1]) / head : 1e300);
        s.worst_expansion = std::min(s.worst_expansion, w.norm() / v.norm());
        ++s.samples;
      }
    }
  });
  ConeStats all;
  for (const auto& s : part) {
    all.worst_ratio = std::max(all.worst_ratio, s.worst_ratio);
    all.worst_expansion = std::min(all.worst_expansion, s.worst_expansion);
    all.samples += s.samples;
  }
  return all;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

Outcome c1_determinants() {
  bool ok = true;
  double worst = 0;
  for (int n = 2; n <= 5; ++n) {
    auto P = default_params(n);
    SingularMap F(P);
    const double s = std::pow(14.0, n - 1);
    Vec q1 = P.p, q2 = P.p;
    q1[n - 1] += P.delta / 4;
    q2[n - 1] += P.delta / 8;
    ok = ok && F.det(q1) == 2.5 * s && F.det(q2) == -s;
    double e1 = std::abs(oracle_jacobian(F, q1, 1e-7).determinant() / (2.5 * s) - 1);
    double e2 = std::abs(oracle_jacobian(F, q2, 1e-7).determinant() / -s - 1);
    worst = std::max({worst, e1, e2});
  }
  ok = ok && worst <= 1e-5;
  return {ok, fmt("closed form exact for n=2..5; worst FD relative error %.2e (tol 1e-5)", worst)};
}

Outcome c2_critical_p() {
  auto P = default_params();
  SingularMap F(P);
  double phi1 = F.phi().derivative(0.25), psi = F.psi().value(1.0 / 16);
  double factor = 1 - phi1 * psi;
  return {factor == 0 && phi1 == 0.5 && psi == 2 && F.det(P.p) == 0,
          fmt("phi'(1/4) = %.17g, psi(1/16) = %.17g, 1 - phi' psi = %.3g", phi1, psi, factor)};
}

Outcome c3_cones() {
  bool ok = true;
  std::string d;
  for (int n : {2, 3}) {
    auto P = default_params(n);
    auto sf = cone_stats(BlenderMap(P), P, 10000, 10, 31);
    auto sF = cone_stats(SingularMap(P), P, 10000, 10, 32);
    ok = ok && sf.worst_ratio <= 5 * P.kappa / 14 + 1e-9 && sF.worst_ratio < P.kappa;
    d += fmt("n=%g: f %.5f (<= %.5f), ", n, sf.worst_ratio, 5 * P.kappa / 14) +
         fmt("F %.5f (< %.2f); ", sF.worst_ratio, P.kappa);
  }
  return {ok, d.substr(0, d.size() - 2)};
}

Outcome c4_expansion() {
  auto P = default_params();
  auto sf = cone_stats(BlenderMap(P), P, 10000, 10, 41);
  auto sF = cone_stats(SingularMap(P), P, 10000, 10, 42);
  bool ok = sf.worst_expansion > 4 && sF.worst_expansion > 4 && sf.samples >= 100000;
  return {ok, fmt("min factor f %.4f, F %.4f over %g samples each (need > 4; analytic lower bound %.4f)", sf.worst_expansion,
                  sF.worst_expansion, double(sf.samples), 4 * std::sqrt(196.0 / 160))};
}

Outcome c5_disks() {
  bool ok = true;
  double worst = 1e300;
  for (int n : {2, 3}) {
    auto P = default_params(n);
    Vec c = Vec::Zero(n);
    c[n - 1] = 0.3;
    for (const auto& r : {disk_growth_check(BlenderMap(P), c, 0.01, 3, 4), disk_growth_check(SingularMap(P), P.p, 0.01, 3, 4)}) {
      ok = ok && r.pass;
      for (std::size_t k = 1; k < r.steps.size(); ++k)
        if (!r.steps[k].saturated && r.steps[k].ratio > 0) worst = std::min(worst, r.steps[k].ratio);
    }
  }
  return {ok, fmt("worst unsaturated step ratio %.3f (need >= 4); later steps saturate T^{n-1}", worst)};
}

Outcome c6_blender() {
  using Q = boost::rational<long long>;
  const Q e(1, 1400);
  // 14 K0^eps and 14 K1^eps - 2 each contain [-1/2 - eps, 1/2 + eps].
  bool k0 = Q(14) * (Q(-1, 28) - e) <= Q(-1, 2) - e && Q(14) * (Q(1, 28) + e) >= Q(1, 2) + e;
  bool k1 = Q(14) * (Q(3, 28) - e) - 2 <= Q(-1, 2) - e && Q(14) * (Q(5, 28) + e) - 2 >= Q(1, 2) + e;
  bool disjoint = Q(1, 28) + e < Q(3, 28) - e;
  auto lib = blender_covering_check(Rational(1, 1400), default_params().a0);
  return {k0 && k1 && disjoint && lib.pass, std::string("exact inclusions at eps = 1/1400: ") +
                                                (k0 && k1 && disjoint ? "hold" : "fail") +
                                                "; library check " + (lib.pass ? "passes" : "fails")};
}

Outcome c7_minimality() {
  auto ifs = build_ifs(1.0 / 27);
  auto rng = block_rng(7, 0, 0x7);
  std::uniform_real_distribution<double> U(-1, 1);
  int covered = 0, obstructed = 0, slow = 0, max_steps = 0;
  for (int i = 0; i < 100; ++i) {
    auto r = check_minimality(ifs, {U(rng), 0.02}, 200);
    if (r.covered) {
      ++covered;
      max_steps = std::max(max_steps, r.steps);
    } else if (r.obstructed) {
      ++obstructed;
    } else {
      ++slow;
    }
  }
  double worst = ifs.worst_best_derivative(1e-4);
  bool ok = covered == 100 && worst < 1 - 1e-3;
  return {ok, fmt("%g/100 arcs covered within 200 steps (%g certified obstructed by a forward-invariant arc, %g over budget);",
                  covered, obstructed, slow) +
                  fmt(" contraction margin %.4f (need 1e-3)", 1 - worst)};
}

Outcome c8_persistence() {
  auto P = default_params();
  auto s = persistence_harness(P, 200, 0.5, 8);
  bool ok = s.failures == 0 && s.max_residual <= 1e-8 * 14;
  for (const auto& r : s.results) ok = ok && r.certified_c1 <= 0.5 + 1e-12;
  return {ok, fmt("%g/200 witnesses, max |det| %.2e (tol %.2e), min |det q2| %.3f", 200.0 - s.failures, s.max_residual,
                  1e-8 * 14, s.min_abs_det_q2)};
}

Outcome c9_fixed_points() {
  auto P = default_params();
  BlenderMap f(P);
  auto fps = find_and_classify_fixed_points(f, default_fixed_point_seeds(2));
  const FixedPointClass want[] = {FixedPointClass::Saddle, FixedPointClass::Repeller, FixedPointClass::Repeller,
                                  FixedPointClass::Saddle};
  bool ok = fps.size() == 4;
  std::string d;
  double worst = 0;
  for (std::size_t i = 0; ok && i < 4; ++i) {
    ok = ok && fps[i].residual <= 1e-9 && fps[i].cls == want[i];
    worst = std::max(worst, fps[i].residual);
    d += to_string(fps[i].cls) + (i < 3 ? "/" : "");
  }
  return {ok, d + fmt("; max residual %.1e", worst)};
}

Outcome c10_jacobians() {
  auto P = default_params();
  LinearExpanding A(2);
  BlenderMap f(P);
  SingularMap F(P);
  auto rng = block_rng(10, 0, 0x10);
  double worst[3] = {0, 0, 0};
  const TorusMap* maps[3] = {&A, &f, &F};
  for (int i = 0; i < 1000; ++i) {
    Vec x = sample_point(P, rng);
    for (int k = 0; k < 3; ++k) {
      Mat J = maps[k]->jacobian(x);
      double e = (J - oracle_jacobian(*maps[k], x, 1e-6)).cwiseAbs().maxCoeff() / std::max(1.0, J.cwiseAbs().maxCoeff());
      worst[k] = std::max(worst[k], e);
    }
  }
  bool ok = worst[0] <= 1e-5 && worst[1] <= 1e-5 && worst[2] <= 1e-5;
  return {ok, fmt("worst relative error A %.1e, f %.1e, F %.1e (tol 1e-5)", worst[0], worst[1], worst[2])};
}

Outcome c11_density() {
  auto P = default_params();
  SingularMap F(P);
  auto reps = density_experiment(F, 100, 10'000'000L, 5, 11);
  int reached = 0;
  std::string fr;
  for (const auto& r : reps) {
    reached += r.fraction >= 0.95;
    fr += fmt("%.4f ", r.fraction);
  }
  LinearExpanding A(2);
  auto a = box_density(A, Vec::Constant(2, 0.123), 100, 10'000'000L);
  bool ok = reached >= 4 && a.fraction <= 0.011;
  return {ok, "F fractions " + fr + fmt("(need >= 0.95 for 4 of 5); A control %.4f (<= 0.011)", a.fraction)};
}

Outcome c12_robust_cones() {
  bool ok = true;
  double worst_ratio = 0, worst_exp = 1e300;
  for (int n : {2, 3}) {
    auto P = default_params(n);
    auto f = std::make_shared<BlenderMap>(P);
    auto F = std::make_shared<SingularMap>(P);
    for (int s = 0; s < 10; ++s) {
      for (const TorusMapPtr& base : {TorusMapPtr(f), TorusMapPtr(F)}) {
        PerturbedMap g(base, make_perturbation(n, 1200 + s, 0.05));
        auto st = cone_stats(g, P, 10000, 10, 1300 + s);
        worst_ratio = std::max(worst_ratio, st.worst_ratio);
        worst_exp = std::min(worst_exp, st.worst_expansion);
        ok = ok && st.worst_ratio < P.kappa && st.worst_expansion > 4;
      }
    }
  }
  return {ok, fmt("40 perturbed sweeps: worst ratio %.5f (< kappa = 0.1), min expansion %.4f (> 4)", worst_ratio, worst_exp)};
}

}  // namespace

int main() {
  const std::vector<std::function<Outcome()>> criteria{c1_determinants, c2_critical_p, c3_cones,       c4_expansion,
                                                       c5_disks,        c6_blender,    c7_minimality,  c8_persistence,
                                                       c9_fixed_points, c10_jacobians, c11_density,    c12_robust_cones};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    std::printf("criterion %2zu: %s  %s  [%.1fs]\n", i + 1, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
