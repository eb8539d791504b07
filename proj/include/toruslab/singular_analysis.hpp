// Critical set of F: determinant sign changes, bisection witnesses, persistence under perturbation.
#pragma once

#include "toruslab/maps.hpp"
#include "toruslab/params.hpp"
#include "toruslab/perturbations.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace toruslab {

struct CriticalWitness {
  Vec point;
  double det = 0;
  Vec positive_point, negative_point;
  double positive_det = 0, negative_det = 0;
  double residual = 0;  // |det| at point

  nlohmann::json to_json() const;
};

/// Stopping tolerance 1e-8 * 14^{n-1}.
double critical_tolerance(int n);

/// q1 = p + (delta/4) e_n (det = 5/2 * 14^{n-1}) and q2 = p + (delta/8) e_n (det = -14^{n-1}).
Vec critical_q1(const ConstructionParams& params);
Vec critical_q2(const ConstructionParams& params);

/// Bisects det along the lift segment a -> b. Empty when the endpoint dets share a sign
/// or the tolerance is not reached.
std::optional<CriticalWitness> bisect_segment(const TorusMap& map, const Vec& a, const Vec& b, double tol);

/// Grid of `resolution` points per axis over the box; bisects every sign-changing grid edge.
std::vector<CriticalWitness> critical_locus_sample(const TorusMap& map, const Box& region, int resolution,
                                                   int tasks = 0);

/// Witnesses on q2 -> q1 followed by `count` random radial segments across the psi annulus.
std::vector<CriticalWitness> critical_segments_sample(const TorusMap& map, const ConstructionParams& params,
                                                      int count, std::uint64_t seed);

struct PersistenceResult {
  double det_q1 = 0, det_q2 = 0;
  double certified_c1 = 0;
  std::optional<CriticalWitness> witness;
  std::string failure;
  bool ok() const { return witness.has_value(); }
  nlohmann::json to_json() const;
};

/// Determinant signs at q1, q2 of a perturbed map and a bisection witness between them.
PersistenceResult persistence_check(const TorusMap& map, const ConstructionParams& params, double certified_c1);

struct PersistenceSummary {
  int count = 0, failures = 0;
  double size = 0;
  double min_abs_det_q1 = 0, min_abs_det_q2 = 0, max_residual = 0;
  std::vector<PersistenceResult> results;
  nlohmann::json to_json(bool with_results = false) const;
};

/// `count` perturbations of F with certified C^1 norm `size`, seeds seed, seed + 1, ...
PersistenceSummary persistence_harness(const ConstructionParams& params, int count, double size, std::uint64_t seed,
                                       int tasks = 0);

}  // namespace toruslab
