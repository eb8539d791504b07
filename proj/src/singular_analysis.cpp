#include "toruslab/singular_analysis.hpp"

#include "toruslab/parallel.hpp"
#include "toruslab/rng.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace toruslab {

namespace {

std::vector<double> as_vector(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace

nlohmann::json CriticalWitness::to_json() const {
  return {{"point", as_vector(point)},
          {"det", det},
          {"residual", residual},
          {"positive", {{"point", as_vector(positive_point)}, {"det", positive_det}}},
          {"negative", {{"point", as_vector(negative_point)}, {"det", negative_det}}}};
}

double critical_tolerance(int n) { return 1e-8 * std::pow(14.0, n - 1); }

Vec critical_q1(const ConstructionParams& params) {
  Vec q = params.p;
  q[params.n - 1] += params.delta / 4;
  return q;
}

Vec critical_q2(const ConstructionParams& params) {
  Vec q = params.p;
  q[params.n - 1] += params.delta / 8;
  return q;
}

std::optional<CriticalWitness> bisect_segment(const TorusMap& map, const Vec& a, const Vec& b, double tol) {
  double da = map.det(a), db = map.det(b);
  if (!(da * db < 0)) {
    if (da == 0 || db == 0) {
      const Vec& z = da == 0 ? a : b;
      return CriticalWitness{z, 0.0, z, z, 0.0, 0.0, 0.0};
    }
    return std::nullopt;
  }
  // Invariant: det(x(lo)) has the sign of da, det(x(hi)) the sign of db.
  double lo = 0, hi = 1, dlo = da, dhi = db;
  Vec mid = a;
  double dm = da;
  for (int it = 0; it < 200; ++it) {
    double t = 0.5 * (lo + hi);
    mid = a + t * (b - a);
    dm = map.det(mid);
    if (dm == 0) break;
    if ((dm < 0) == (dlo < 0)) {
      lo = t;
      dlo = dm;
    } else {
      hi = t;
      dhi = dm;
    }
    if (hi - lo <= 1e-16) break;
  }
  // Bisect to full resolution, then report the better-conditioned endpoint.
  if (dm != 0) {
    bool use_lo = std::abs(dlo) <= std::abs(dhi);
    dm = use_lo ? dlo : dhi;
    mid = a + (use_lo ? lo : hi) * (b - a);
  }
  if (!(std::abs(dm) <= tol)) return std::nullopt;
  CriticalWitness w;
  w.point = wrap(mid).coords();
  w.det = dm;
  w.residual = std::abs(dm);
  Vec plo = a + lo * (b - a), phi = a + hi * (b - a);
  bool lo_positive = dlo > 0;
  w.positive_point = wrap(lo_positive ? plo : phi).coords();
  w.negative_point = wrap(lo_positive ? phi : plo).coords();
  w.positive_det = lo_positive ? dlo : dhi;
  w.negative_det = lo_positive ? dhi : dlo;
  return w;
}

std::vector<CriticalWitness> critical_locus_sample(const TorusMap& map, const Box& region, int resolution, int tasks) {
  const int n = map.dim();
  if (region.lo.size() != n || region.hi.size() != n) throw DomainError("region has the wrong dimension");
  if (resolution < 2) throw DomainError("resolution must be at least 2");
  for (int j = 0; j < n; ++j)
    if (!(region.hi[j] > region.lo[j])) throw DomainError("empty region");
  long total = 1;
  for (int j = 0; j < n; ++j) {
    total *= resolution;
    if (total > 20'000'000L) throw DomainError("critical grid too large");
  }
  auto node = [&](long idx) {
    Vec x(n);
    for (int j = 0; j < n; ++j) {
      long c = idx % resolution;
      idx /= resolution;
      x[j] = region.lo[j] + (region.hi[j] - region.lo[j]) * static_cast<double>(c) / (resolution - 1);
    }
    return x;
  };
  std::vector<double> det(static_cast<std::size_t>(total));
  parallel_for(total, tasks, [&](long i) { det[static_cast<std::size_t>(i)] = map.det(node(i)); });

  const double tol = critical_tolerance(n);
  const long chunk = 4096, chunks = (total + chunk - 1) / chunk;
  std::vector<std::vector<CriticalWitness>> parts(static_cast<std::size_t>(chunks));
  parallel_for(chunks, tasks, [&](long c) {
    for (long i = c * chunk; i < std::min(total, (c + 1) * chunk); ++i) {
      long stride = 1, rest = i;
      for (int j = 0; j < n; ++j) {
        long cj = rest % resolution;
        rest /= resolution;
        if (cj + 1 < resolution) {
          long k = i + stride;
          double a = det[static_cast<std::size_t>(i)], b = det[static_cast<std::size_t>(k)];
          if (a * b < 0)
            if (auto w = bisect_segment(map, node(i), node(k), tol)) parts[static_cast<std::size_t>(c)].push_back(*w);
        }
        stride *= resolution;
      }
    }
  });
  std::vector<CriticalWitness> out;
  for (auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

std::vector<CriticalWitness> critical_segments_sample(const TorusMap& map, const ConstructionParams& params, int count,
                                                      std::uint64_t seed) {
  const int n = params.n;
  const double tol = critical_tolerance(n);
  std::vector<CriticalWitness> out;
  if (auto w = bisect_segment(map, critical_q2(params), critical_q1(params), tol)) out.push_back(*w);
  auto rng = block_rng(seed, 0, 0x5e9);
  std::uniform_real_distribution<double> U(0, 1);
  std::normal_distribution<double> N;
  for (int i = 0; i < count; ++i) {
    // Radial direction near e_1: transverse tilt kept inside the chi plateau.
    Vec u = Vec::Zero(n - 1);
    u[0] = 1;
    for (int j = 1; j < n - 1; ++j) u[j] = 0.01 * N(rng) / std::sqrt(double(n));
    u /= u.norm();
    // Height where phi' lies in (0.55, 1]: phi' psi > 1 at |h| = 1/4 where psi = 2.
    double xn = 0.25 + params.delta * (0.03 + 0.12 * U(rng));
    double outer = std::sqrt(1.0 / 16 + params.theta) + 0.002;
    Vec a(n), b(n);
    a.head(n - 1) = 0.25 * u;
    b.head(n - 1) = outer * u;
    a[n - 1] = b[n - 1] = xn;
    if (auto w = bisect_segment(map, a, b, tol)) out.push_back(*w);
  }
  return out;
}

nlohmann::json PersistenceResult::to_json() const {
  nlohmann::json j{{"det_q1", det_q1}, {"det_q2", det_q2}, {"certified_c1", certified_c1}, {"ok", ok()}};
  if (witness) j["witness"] = witness->to_json();
  if (!failure.empty()) j["failure"] = failure;
  return j;
}

PersistenceResult persistence_check(const TorusMap& map, const ConstructionParams& params, double certified_c1) {
  PersistenceResult r;
  r.certified_c1 = certified_c1;
  const Vec q1 = critical_q1(params), q2 = critical_q2(params);
  r.det_q1 = map.det(q1);
  r.det_q2 = map.det(q2);
  if (!(r.det_q1 * r.det_q2 < 0)) {
    r.failure = "det has the same sign at q1 and q2";
    return r;
  }
  r.witness = bisect_segment(map, q2, q1, critical_tolerance(params.n));
  if (!r.witness) r.failure = "bisection did not reach the tolerance";
  return r;
}

nlohmann::json PersistenceSummary::to_json(bool with_results) const {
  nlohmann::json j{{"count", count},
                   {"failures", failures},
                   {"size", size},
                   {"norm", "max(sup|P|_inf, sup max-row-sum |DP|)"},
                   {"min_abs_det_q1", min_abs_det_q1},
                   {"min_abs_det_q2", min_abs_det_q2},
                   {"max_residual", max_residual}};
  if (with_results) {
    j["results"] = nlohmann::json::array();
    for (const auto& r : results) j["results"].push_back(r.to_json());
  }
  return j;
}

PersistenceSummary persistence_harness(const ConstructionParams& params, int count, double size, std::uint64_t seed,
                                       int tasks) {
  if (count < 0) throw DomainError("negative perturbation count");
  auto F = std::make_shared<SingularMap>(params);
  PersistenceSummary s;
  s.count = count;
  s.size = size;
  s.results.resize(static_cast<std::size_t>(count));
  parallel_for(count, tasks, [&](long i) {
    auto field = make_perturbation(params.n, seed + static_cast<std::uint64_t>(i), size);
    PerturbedMap g(F, field);
    s.results[static_cast<std::size_t>(i)] = persistence_check(g, params, field.c1_bound());
  });
  s.min_abs_det_q1 = s.min_abs_det_q2 = std::numeric_limits<double>::infinity();
  for (const auto& r : s.results) {
    if (!r.ok()) ++s.failures;
    s.min_abs_det_q1 = std::min(s.min_abs_det_q1, std::abs(r.det_q1));
    s.min_abs_det_q2 = std::min(s.min_abs_det_q2, std::abs(r.det_q2));
    if (r.witness) s.max_residual = std::max(s.max_residual, r.witness->residual);
  }
  if (count == 0) s.min_abs_det_q1 = s.min_abs_det_q2 = 0;
  return s;
}

}  // namespace toruslab
