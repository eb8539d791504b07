// The parameter chain of the construction and its validity checks.
#pragma once

#include "toruslab/torus.hpp"

#include <boost/rational.hpp>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace toruslab {

using Rational = boost::rational<std::int64_t>;

struct ConstructionParams {
  int n = 2;
  double kappa = 0.1;
  Rational epsilon{1, 1400};
  double a0 = 0;     // IFS parameter, < min(1/26, kappa / m_b)
  Vec p;             // centre of the surgery ball
  double r = 0.06;
  double theta = 0.025;
  double delta = 0;
  double m_psi = 0;  // sup |psi'|
  double m_b = 0;    // sup |grad u|
  double chi_inner = 0.004;  // transverse cutoff radii (unused when n = 2)
  double chi_outer = 0.016;

  double eps() const { return boost::rational_cast<double>(epsilon); }
  /// IFS displacement budget kappa / m_b.
  double budget() const { return kappa / m_b; }
  double m_chi() const;
  /// Bound on |(x_1..x_{n-1})| over the psi' support.
  double rho() const;
};

/// Fill in every derived quantity (m_b, m_psi, a0, delta, p) from n, kappa, epsilon, r, theta.
ConstructionParams derive_params(ConstructionParams base);
ConstructionParams default_params(int n = 2, double kappa = 0.1);

struct ParamCheck {
  std::string name;
  bool pass;
  double margin;  // positive when satisfied
  std::string detail;
  bool advisory = false;  // reported, but does not make the report fail
};

struct ValidationReport {
  std::vector<ParamCheck> checks;
  bool ok() const;
  nlohmann::json to_json() const;
};

ValidationReport validate_params(const ConstructionParams& params);

/// Exact distance from p's first-factor projection to K0^eps and K1^eps.
double ball_clearance(const ConstructionParams& params);

/// Largest distance from p to a point of supp(phi psi chi) near p.
double surgery_support_radius(const ConstructionParams& params);

/// Best rational approximation with denominator <= max_den (continued fractions).
Rational rational_approx(double x, std::int64_t max_den = 1'000'000);
Rational parse_rational(const std::string& s);
std::string to_string(const Rational& q);

nlohmann::json to_json(const ConstructionParams& params);
/// Missing derived fields are computed; `a0` and `delta` may be overridden explicitly.
/// Throws DomainError on malformed input.
ConstructionParams params_from_json(const nlohmann::json& j);

}  // namespace toruslab
