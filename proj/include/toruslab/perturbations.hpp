// C^1-small trigonometric perturbations with certified norms.
//
// Norm convention throughout: ||P||_{C^1} = max(sup |P|_inf, sup max-row-sum |DP|).
#pragma once

#include "toruslab/maps.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <vector>

namespace toruslab {

inline constexpr int kMaxFrequency = 3;

/// c * cos(pi <m, x> + phase) added to output coordinate `row`.
struct TrigTerm {
  int row = 0;
  std::array<int, kMaxDim> freq{};
  double coeff = 0.0;
  double phase = 0.0;
};

class PerturbationField {
 public:
  PerturbationField() = default;
  /// Throws DomainError on a bad row, a frequency above kMaxFrequency, or non-finite values.
  PerturbationField(int n, std::vector<TrigTerm> terms);

  int dim() const { return n_; }
  const std::vector<TrigTerm>& terms() const { return terms_; }
  bool zero() const { return terms_.empty(); }

  Vec value(const Vec& x) const;
  Mat derivative(const Vec& x) const;

  /// max over rows of sum |c|.
  double c0_bound() const;
  /// max over rows of sum |c| pi |m|_1.
  double derivative_bound() const;
  /// max over rows of sum |c| max(1, pi |m|_1); dominates both of the above.
  double c1_bound() const;

  PerturbationField scaled(double s) const;

  nlohmann::json to_json() const;
  static PerturbationField from_json(const nlohmann::json& j);

 private:
  int n_ = 0;
  std::vector<TrigTerm> terms_;
};

/// Random field on T^n with certified c1_bound() == budget; budget 0 gives the zero field.
/// The direction depends only on (n, seed), so budgets scale the same field linearly.
PerturbationField make_perturbation(int n, std::uint64_t seed, double budget, int terms_per_row = 6);

/// Field pushing the last row's derivative towards det = 0 at `at`: a single term
/// c sin(pi (x_n - at_n)) on row n with c pi = size, so d P_n / d x_n = size at `at`.
PerturbationField adversarial_perturbation(const Vec& at, double size);

/// base + field, wrapped.
class PerturbedMap final : public TorusMap {
 public:
  PerturbedMap(TorusMapPtr base, PerturbationField field);
  int dim() const override { return base_->dim(); }
  Vec apply(const Vec& x) const override;
  Mat jacobian(const Vec& x) const override;
  std::string tag() const override { return "perturbed"; }

  const TorusMap& base() const { return *base_; }
  const PerturbationField& field() const { return field_; }
  double c1_distance_bound() const { return field_.c1_bound(); }

 private:
  TorusMapPtr base_;
  PerturbationField field_;
};

TorusMapPtr apply_perturbation(TorusMapPtr base, PerturbationField field);

/// Grid/random sweep of the actual norms, for checking the certificate.
struct NormSweep {
  double c0 = 0.0;
  double derivative = 0.0;
};
NormSweep sweep_norms(const PerturbationField& field, int samples, std::uint64_t seed);

}  // namespace toruslab
