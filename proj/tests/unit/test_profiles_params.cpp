#include <doctest.h>

#include "toruslab/params.hpp"
#include "toruslab/profiles.hpp"

#include <cmath>
#include <random>

using namespace toruslab;

namespace {

// Central difference against the closed-form derivative, tolerance relative to max(1, |d|).
void check_derivative(const SmoothProfile& prof, double lo, double hi, double h, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(lo, hi);
  for (int i = 0; i < count; ++i) {
    double x = U(rng);
    double fd = (prof.value(x + h) - prof.value(x - h)) / (2 * h);
    double d = prof.derivative(x);
    REQUIRE(std::abs(fd - d) <= 1e-5 * std::max(1.0, std::abs(d)));
  }
}

}  // namespace

TEST_CASE("smootherstep") {
  CHECK(smootherstep(-1) == 0);
  CHECK(smootherstep(0.5) == doctest::Approx(0.5));
  CHECK(smootherstep(2) == 1);
  CHECK(smootherstep_slope(0.5) == doctest::Approx(kSmootherstepMaxSlope));
  CHECK(smootherstep_slope(0) == 0);
}

TEST_CASE("plateau bump") {
  const double eps = 1.0 / 1400;
  PlateauBump b(-1.0 / 28, 1.0 / 28, eps);
  CHECK(b.value(0) == 1);
  CHECK(b.value(1.0 / 28) == 1);
  CHECK(b.value(1.0 / 28 + eps) == 0);
  CHECK(b.value(0.25) == 0);
  CHECK(b.value(1.0 / 28 + eps / 2) == doctest::Approx(0.5));
  CHECK(b.sup_derivative() == doctest::Approx(1.875 / eps));
  check_derivative(b, 1.0 / 28 - eps, 1.0 / 28 + 2 * eps, 1e-9, 1000, 1);
  check_derivative(b, -1.0 / 28 - 2 * eps, -1.0 / 28 + eps, 1e-9, 1000, 2);
  // wrap-aware: an arc through the identification point
  PlateauBump w(0.95, 1.05, 0.01);
  CHECK(w.value(-0.98) == 1);
  CHECK(w.value(0.97) == 1);
  CHECK_THROWS_AS(PlateauBump(0.1, 0.0, 0.01), DomainError);
}

TEST_CASE("psi") {
  const double theta = 0.025;
  PsiProfile psi(theta);
  CHECK(psi.value(1.0 / 16) == 2.0);
  CHECK(psi.derivative(1.0 / 16) == 0.0);
  CHECK(std::abs(psi.value(1.0 / 16 + theta)) < 1e-14);
  CHECK(std::abs(psi.value(1.0 / 16 - theta)) < 1e-14);
  CHECK(psi.sup_derivative() == doctest::Approx(3.75 / theta));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(0, 1.5 * theta);
  for (int i = 0; i < 1000; ++i) {
    double t = U(rng);
    REQUIRE(psi.value(1.0 / 16 + t) == doctest::Approx(psi.value(1.0 / 16 - t)).epsilon(1e-12));
  }
  // unique interior critical point: psi' has a fixed sign on each side of 1/16
  double sup = 0;
  for (int i = 1; i < 100000; ++i) {
    double s = 1.0 / 16 - theta + 2 * theta * i / 100000.0;
    double d = psi.derivative(s);
    if (s < 1.0 / 16 - 1e-12) REQUIRE(d > 0);
    if (s > 1.0 / 16 + 1e-12) REQUIRE(d < 0);
    REQUIRE(psi.value(s) >= 0);
    REQUIRE(psi.value(s) <= 2);
    sup = std::max(sup, std::abs(d));
  }
  CHECK(sup <= psi.sup_derivative());
  CHECK(sup >= 0.999 * psi.sup_derivative());
  check_derivative(psi, 1.0 / 16 - 1.2 * theta, 1.0 / 16 + 1.2 * theta, 1e-7, 1000, 4);
}

TEST_CASE("phi") {
  const double delta = default_params().delta;
  PhiProfile phi(delta);
  CHECK(phi.value(0.25) == doctest::Approx(0.0).epsilon(1e-18));
  CHECK(phi.derivative(0.25) == 0.5);
  CHECK(phi.derivative(0.25 + delta / 8) == doctest::Approx(1.0));
  CHECK(phi.derivative(0.25 + delta / 4) == doctest::Approx(-0.75));
  CHECK(phi.derivative(0.25 - delta / 2) == 0.0);
  CHECK(phi.value(0.25 - delta / 2) == 0.0);
  CHECK(phi.value(0.25 + delta) == 0.0);
  CHECK(phi.support_lo() == doctest::Approx(0.25 - delta / 4));
  CHECK(phi.support_hi() == doctest::Approx(0.25 + 0.75 * delta));

  double sup = 0;
  for (int i = 0; i <= 100000; ++i) {
    double x = phi.support_lo() - 0.1 * delta + 1.2 * delta * i / 100000.0;
    sup = std::max(sup, std::abs(phi.value(x)));
    double d = phi.derivative(x);
    REQUIRE(d >= -0.75);
    REQUIRE(d <= 1.0);
  }
  CHECK(sup <= delta);
  CHECK(sup <= phi.sup_value() + 1e-15);
  CHECK(sup >= 0.999 * phi.sup_value());
  check_derivative(phi, phi.support_lo() - 0.1 * delta, phi.support_hi() + 0.1 * delta, 1e-9, 1000, 5);
  // phi' (smoothstep pieces) is C^1 with a certified |phi''| bound
  double h = 1e-9, sup2 = 0;
  for (int i = 1; i < 20000; ++i) {
    double x = phi.support_lo() + (phi.support_hi() - phi.support_lo()) * i / 20000.0;
    sup2 = std::max(sup2, std::abs(phi.derivative(x + h) - phi.derivative(x - h)) / (2 * h));
  }
  CHECK(sup2 <= phi.second_derivative_sup() * (1 + 1e-4));
}

TEST_CASE("the determinant factor stays in [-3/2, 5/2]") {
  auto P = default_params();
  PsiProfile psi(P.theta);
  PhiProfile phi(P.delta);
  for (int i = 0; i <= 300; ++i) {
    double x = phi.support_lo() + (phi.support_hi() - phi.support_lo()) * i / 300.0;
    for (int j = 0; j <= 300; ++j) {
      double s = psi.support_lo() + (psi.support_hi() - psi.support_lo()) * j / 300.0;
      double factor = 1 - phi.derivative(x) * psi.value(s);
      REQUIRE(std::abs(factor) <= 2.5 + 1e-12);
    }
  }
}

TEST_CASE("cutoff") {
  CutoffProfile chi(0.004, 0.016, false);
  CHECK(chi.value(0) == 1);
  CHECK(chi.value(0.004) == 1);
  CHECK(chi.value(0.016) == 0);
  CHECK(chi.value(0.01) == doctest::Approx(0.5));
  check_derivative(chi, 0.0, 0.02, 1e-8, 1000, 6);
  CutoffProfile one(0, 0, true);
  CHECK(one.value(0.5) == 1);
  CHECK(one.derivative(0.5) == 0);
  CHECK_THROWS_AS(CutoffProfile(0.02, 0.01, false), DomainError);
}

TEST_CASE("default parameters validate for every supported n") {
  for (int n = 2; n <= 6; ++n) {
    auto P = default_params(n);
    auto rep = validate_params(P);
    for (const auto& c : rep.checks) {
      INFO(n << " " << c.name << " margin " << c.margin);
      CHECK(c.pass);
    }
    CHECK(rep.ok());
    CHECK(P.a0 < P.budget());
    CHECK(P.delta < 2 * P.theta);
    CHECK(2 * P.m_psi * P.r * P.delta < 11 * P.kappa);
    CHECK(PhiProfile(P.delta).sup_value() <= P.delta);
  }
  auto P = default_params();
  CHECK(P.m_b == doctest::Approx(15.0 / 8 * 1400));
  CHECK(P.a0 == doctest::Approx(0.9 * 0.1 / P.m_b));
  CHECK(ball_clearance(P) == doctest::Approx(2.0 / 28 - 1.0 / 1400));
  CHECK(ball_clearance(default_params(3)) > ball_clearance(P));
}

TEST_CASE("validation failures") {
  auto find = [](const ValidationReport& rep, const std::string& name) {
    for (const auto& c : rep.checks)
      if (c.name == name) return c;
    FAIL("missing check " << name);
    return ParamCheck{};
  };
  SUBCASE("ball meets the blender") {
    auto P = default_params();
    P.r = 0.1;
    auto rep = validate_params(P);
    CHECK_FALSE(rep.ok());
    CHECK_FALSE(find(rep, "ball_clear_of_blender").pass);
  }
  SUBCASE("delta = 2 theta is rejected") {
    auto P = default_params();
    P.delta = 2 * P.theta;
    auto rep = validate_params(P);
    CHECK_FALSE(rep.ok());
    CHECK_FALSE(find(rep, "delta_range").pass);
  }
  SUBCASE("a large kappa is advisory only") {
    auto P = default_params(2, 2.9);
    auto rep = validate_params(P);
    CHECK_FALSE(find(rep, "kappa_small").pass);
    CHECK(rep.ok());
  }
  SUBCASE("a0 over budget") {
    auto P = default_params();
    P.a0 = 1.0 / 27;
    CHECK_FALSE(find(validate_params(P), "a0_budget").pass);
  }
  SUBCASE("moved ball centre") {
    auto P = default_params();
    P.p[1] = 0.3;
    CHECK_FALSE(find(validate_params(P), "ball_centre").pass);
  }
  CHECK_THROWS_AS(default_params(7), DomainError);
  CHECK_THROWS_AS(default_params(1), DomainError);
}

TEST_CASE("rationals") {
  CHECK(rational_approx(1.0 / 1400) == Rational(1, 1400));
  CHECK(rational_approx(0.75) == Rational(3, 4));
  CHECK(rational_approx(-0.5) == Rational(-1, 2));
  CHECK(parse_rational("1/1400") == Rational(1, 1400));
  CHECK(parse_rational("0.25") == Rational(1, 4));
  CHECK(to_string(Rational(2, 2800)) == "1/1400");
  CHECK_THROWS_AS(parse_rational("1/0"), DomainError);
  CHECK_THROWS_AS(parse_rational("abc"), DomainError);
}

TEST_CASE("params JSON round trip") {
  for (int n : {2, 4}) {
    auto P = default_params(n);
    auto j = to_json(P);
    CHECK(j["epsilon"] == "1/1400");
    auto Q = params_from_json(nlohmann::json::parse(j.dump()));
    CHECK(Q.n == P.n);
    CHECK(Q.epsilon == P.epsilon);
    CHECK(Q.a0 == P.a0);
    CHECK(Q.delta == P.delta);
    CHECK(Q.m_b == P.m_b);
    CHECK(Q.m_psi == P.m_psi);
    CHECK((Q.p - P.p).norm() == 0);
    CHECK(to_json(Q) == j);
  }
  auto Q = params_from_json({{"n", 3}, {"epsilon", 1.0 / 1400}, {"delta", 0.002}});
  CHECK(Q.epsilon == Rational(1, 1400));
  CHECK(Q.delta == 0.002);
  CHECK(Q.a0 == default_params(3).a0);
  CHECK_THROWS_AS(params_from_json({{"n", "two"}}), DomainError);
  CHECK_THROWS_AS(params_from_json(nlohmann::json::array()), DomainError);
  CHECK_THROWS_AS(params_from_json({{"n", 2}, {"p", {0.25, 0.0, 0.25}}}), DomainError);
}
