#include "toruslab/params.hpp"

#include "toruslab/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace toruslab {

double ConstructionParams::m_chi() const {
  return n == 2 ? 0.0 : kSmootherstepMaxSlope / (chi_outer - chi_inner);
}

double ConstructionParams::rho() const { return std::sqrt(1.0 / 16 + theta); }

namespace {

// Offset of x_1 from 1/4 over the psi support near p, and the transverse radius.
double x1_offset(const ConstructionParams& P) {
  double t = P.n == 2 ? 0.0 : P.chi_outer;
  double lo = std::sqrt(std::max(0.0, 1.0 / 16 - P.theta - t * t));
  double hi = std::sqrt(1.0 / 16 + P.theta);
  return std::max(std::abs(lo - 0.25), std::abs(hi - 0.25));
}

double transverse_radius(const ConstructionParams& P) { return P.n == 2 ? 0.0 : P.chi_outer; }

// Largest delta whose surgery support stays inside B(p, r).
double support_delta_cap(const ConstructionParams& P) {
  double off = x1_offset(P), t = transverse_radius(P);
  double room = P.r * P.r - off * off - t * t;
  return room > 0 ? (4.0 / 3.0) * std::sqrt(room) : 0.0;
}

}  // namespace

ConstructionParams derive_params(ConstructionParams P) {
  if (P.n < 2 || P.n > kMaxDim) throw DomainError("params: n must lie in [2, 6]");
  if (!(P.theta > 0 && P.theta < 1.0 / 16)) throw DomainError("params: theta must lie in (0, 1/16)");
  if (P.epsilon <= Rational(0)) throw DomainError("params: epsilon must be positive");
  P.m_b = std::sqrt(double(P.n - 1)) * kSmootherstepMaxSlope / P.eps();
  P.m_psi = PsiProfile(P.theta).sup_derivative();
  P.a0 = std::min(1.0 / 27, 0.9 * P.budget());
  double cone = 11.0 * P.kappa / (2.0 * P.m_psi * P.rho() + 2.0 * P.m_chi());
  P.delta = 0.9 * std::min({2.0 * P.theta, cone, support_delta_cap(P)});
  P.p = Vec::Zero(P.n);
  P.p[0] = 0.25;
  P.p[P.n - 1] = 0.25;
  return P;
}

ConstructionParams default_params(int n, double kappa) {
  ConstructionParams P;
  P.n = n;
  P.kappa = kappa;
  return derive_params(P);
}

double ball_clearance(const ConstructionParams& P) {
  BlenderCubes cubes(P.n - 1, P.eps());
  std::vector<double> proj(P.p.data(), P.p.data() + P.n - 1);
  return std::min(cubes.k0_fat.distance(proj), cubes.k1_fat.distance(proj));
}

double surgery_support_radius(const ConstructionParams& P) {
  double off = x1_offset(P), t = transverse_radius(P), z = 0.75 * P.delta;
  return std::sqrt(off * off + t * t + z * z);
}

bool ValidationReport::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const ParamCheck& c) { return c.pass || c.advisory; });
}

nlohmann::json ValidationReport::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : checks)
    arr.push_back({{"name", c.name}, {"pass", c.pass}, {"margin", c.margin}, {"detail", c.detail}, {"advisory", c.advisory}});
  return {{"ok", ok()}, {"checks", arr}};
}

ValidationReport validate_params(const ConstructionParams& P) {
  ValidationReport rep;
  auto add = [&](std::string name, double margin, std::string detail, bool advisory = false) {
    rep.checks.push_back({std::move(name), margin > 0, margin, std::move(detail), advisory});
  };
  add("dimension", std::min(P.n - 1.5, 6.5 - P.n), "2 <= n <= 6");
  add("kappa_range", std::min(P.kappa, 3.0 - P.kappa), "0 < kappa < 3");
  add("kappa_small", 0.1 - P.kappa + 1e-15, "kappa <= 0.1 (cone geometry identification)", true);
  double eps = P.eps();
  add("epsilon_positive", eps, "epsilon > 0");
  add("cube_supports_disjoint", 2.0 / 28 - 2 * eps, "gap 2/28 between cubes exceeds 2 epsilon");
  add("a0_range", std::min(P.a0, 1.0 / 26 - P.a0), "0 < a0 < 1/26");
  add("a0_budget", P.m_b > 0 ? P.budget() - P.a0 : -1.0, "sup|g_i - Id| = a0/2 < kappa/(2 m_b)");
  if (P.p.size() != P.n) {
    add("ball_centre", -1.0, "p must have n coordinates");
    return rep;
  }
  Vec p0 = Vec::Zero(P.n);
  p0[0] = p0[P.n - 1] = 0.25;
  add("ball_centre", 1e-12 - torus_distance(P.p, p0), "p = (1/4, 0, ..., 0, 1/4), where psi and phi are centred");
  add("ball_clear_of_blender", ball_clearance(P) - P.r, "r < dist(p~, K^eps)");
  add("theta_range", std::min(P.theta, P.r / 2 - P.theta), "0 < theta < r/2");
  add("delta_range", std::min(P.delta, 2 * P.theta - P.delta), "0 < delta < 2 theta");
  add("cone_budget_literal", 11 * P.kappa - 2 * P.m_psi * P.r * P.delta, "2 m_psi r delta < 11 kappa");
  add("cone_budget", 11 * P.kappa - P.delta * (2 * P.m_psi * P.rho() + 2 * P.m_chi()),
      "delta (2 m_psi rho + 2 m_chi) < 11 kappa");
  add("surgery_inside_ball", P.r - surgery_support_radius(P), "supp(phi psi chi) near p lies inside B(p, r)");
  if (P.n > 2) add("cutoff_radii", std::min(P.chi_inner, P.chi_outer - P.chi_inner), "0 < chi_inner < chi_outer");
  double m_psi = PsiProfile(std::clamp(P.theta, 1e-12, 1.0 / 16 - 1e-12)).sup_derivative();
  add("m_psi_certified", 1e-12 * m_psi - std::abs(P.m_psi - m_psi), "m_psi equals the closed-form sup |psi'|");
  return rep;
}

Rational rational_approx(double x, std::int64_t max_den) {
  if (!std::isfinite(x) || std::abs(x) > 1e12) throw DomainError("rational_approx: value out of range");
  // Convergents h/k of the continued fraction of x.
  std::int64_t h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  double r = x;
  for (int it = 0; it < 64; ++it) {
    double a = std::floor(r);
    auto ai = static_cast<std::int64_t>(a);
    std::int64_t k2 = ai * k1 + k0;
    if (k2 > max_den) break;
    std::int64_t h2 = ai * h1 + h0;
    h0 = h1, h1 = h2, k0 = k1, k1 = k2;
    double frac = r - a;
    if (frac < 1e-15) break;
    r = 1.0 / frac;
  }
  return Rational(h1, k1);
}

Rational parse_rational(const std::string& s) {
  auto slash = s.find('/');
  try {
    if (slash == std::string::npos) return rational_approx(std::stod(s));
    std::int64_t num = std::stoll(s.substr(0, slash));
    std::int64_t den = std::stoll(s.substr(slash + 1));
    if (den == 0) throw DomainError("parse_rational: zero denominator");
    return Rational(num, den);
  } catch (const std::logic_error&) {
    throw DomainError("parse_rational: cannot parse '" + s + "'");
  }
}

std::string to_string(const Rational& q) {
  std::ostringstream os;
  os << q.numerator() << '/' << q.denominator();
  return os.str();
}

nlohmann::json to_json(const ConstructionParams& P) {
  std::vector<double> p(P.p.data(), P.p.data() + P.p.size());
  return {{"n", P.n},           {"kappa", P.kappa},         {"epsilon", to_string(P.epsilon)},
          {"a0", P.a0},         {"p", p},                   {"r", P.r},
          {"theta", P.theta},   {"delta", P.delta},         {"m_psi", P.m_psi},
          {"m_b", P.m_b},       {"chi_inner", P.chi_inner}, {"chi_outer", P.chi_outer}};
}

ConstructionParams params_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw DomainError("params: configuration must be a JSON object");
  ConstructionParams P;
  try {
    if (j.contains("n")) P.n = j.at("n").get<int>();
    if (j.contains("kappa")) P.kappa = j.at("kappa").get<double>();
    if (j.contains("epsilon")) {
      const auto& e = j.at("epsilon");
      P.epsilon = e.is_string() ? parse_rational(e.get<std::string>()) : rational_approx(e.get<double>());
    }
    if (j.contains("r")) P.r = j.at("r").get<double>();
    if (j.contains("theta")) P.theta = j.at("theta").get<double>();
    if (j.contains("chi_inner")) P.chi_inner = j.at("chi_inner").get<double>();
    if (j.contains("chi_outer")) P.chi_outer = j.at("chi_outer").get<double>();
    P = derive_params(P);
    if (j.contains("a0")) P.a0 = j.at("a0").get<double>();
    if (j.contains("delta")) P.delta = j.at("delta").get<double>();
    if (j.contains("p")) {
      auto v = j.at("p").get<std::vector<double>>();
      if (static_cast<int>(v.size()) != P.n) throw DomainError("params: p must have n coordinates");
      P.p = TorusPoint::from(v).coords();
    }
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("params: ") + e.what());
  }
  return P;
}

}  // namespace toruslab
