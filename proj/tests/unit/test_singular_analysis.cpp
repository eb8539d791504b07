#include <doctest.h>

#include "toruslab/cone_analysis.hpp"
#include "toruslab/singular_analysis.hpp"

#include <cmath>
#include <random>

using namespace toruslab;

namespace {

// Witness on the critical set of the unperturbed F: inside the supports of psi and phi'.
void check_on_supports(const CriticalWitness& w, const ConstructionParams& P) {
  const int n = P.n;
  double s = w.point.head(n - 1).squaredNorm();
  CHECK(torus_distance(w.point, P.p) <= P.r);
  CHECK(s > 1.0 / 16 - P.theta);
  CHECK(s < 1.0 / 16 + P.theta);
  CHECK(w.point[n - 1] >= 0.25 - P.delta / 4);
  CHECK(w.point[n - 1] <= 0.25 + 0.75 * P.delta);
  CHECK(w.residual <= critical_tolerance(n));
  CHECK(w.positive_det > 0);
  CHECK(w.negative_det < 0);
}

}  // namespace

TEST_CASE("witness between q2 and q1") {
  for (int n = 2; n <= 5; ++n) {
    auto P = default_params(n);
    SingularMap F(P);
    auto w = bisect_segment(F, critical_q2(P), critical_q1(P), critical_tolerance(n));
    REQUIRE(w);
    check_on_supports(*w, P);
    // Both brackets converge onto the witness.
    CHECK((w->positive_point - w->negative_point).norm() < 1e-6);
  }
}

TEST_CASE("grid sampling around p") {
  auto P = default_params();
  SingularMap F(P);
  Box box{P.p - Vec::Constant(2, 0.002), P.p + Vec::Constant(2, 0.002)};
  box.lo[1] = 0.25 - P.delta / 4;
  box.hi[1] = 0.25 + 0.75 * P.delta;
  auto ws = critical_locus_sample(F, box, 41, 2);
  CHECK(ws.size() > 10);
  for (const auto& w : ws) check_on_supports(w, P);
  // det is identically 14^{n-1} away from the supports
  Box far{Vec::Constant(2, 0.5), Vec::Constant(2, 0.6)};
  CHECK(critical_locus_sample(F, far, 11).empty());
  CHECK_THROWS_AS(critical_locus_sample(F, box, 1), DomainError);
}

TEST_CASE("random segments across the annulus") {
  for (int n : {2, 3}) {
    auto P = default_params(n);
    SingularMap F(P);
    auto ws = critical_segments_sample(F, P, 20, 7);
    CHECK(ws.size() == 21);
    for (const auto& w : ws) check_on_supports(w, P);
  }
}

TEST_CASE("closed-form and Jacobian determinants agree in the ball") {
  for (int n : {2, 3, 4}) {
    auto P = default_params(n);
    SingularMap F(P);
    std::mt19937_64 rng(n);
    std::normal_distribution<double> N;
    std::uniform_real_distribution<double> U(0, 1);
    for (int i = 0; i < 1000; ++i) {
      Vec d(n);
      for (int j = 0; j < n; ++j) d[j] = N(rng);
      Vec x = P.p + P.r * std::pow(U(rng), 1.0 / n) * d / d.norm();
      double a = F.det(x), b = F.jacobian(x).determinant();
      REQUIRE(std::abs(a - b) <= 1e-10 * std::abs(a) + 1e-12);
    }
  }
}

TEST_CASE("det is 14^{n-1} away from the ball and the blender") {
  auto P = default_params(3);
  SingularMap F(P);
  BlenderCubes cubes(2, P.eps());
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(-1, 1);
  int checked = 0;
  for (int i = 0; i < 10000; ++i) {
    Vec x(3);
    x << U(rng), U(rng), U(rng);
    if (F.in_ball(x) || cubes.in_fat(std::vector<double>{x[0], x[1]})) continue;
    REQUIRE(F.det(x) == 196.0);
    ++checked;
  }
  CHECK(checked > 9000);
}

TEST_CASE("persistence") {
  auto P = default_params();
  auto F = std::make_shared<SingularMap>(P);
  SUBCASE("zero perturbation") {
    PerturbedMap g(F, PerturbationField(2, {}));
    auto r = persistence_check(g, P, 0);
    CHECK(r.ok());
    CHECK(r.det_q2 == doctest::Approx(-14));
  }
  SUBCASE("harness") {
    auto s = persistence_harness(P, 50, 0.5, 100, 2);
    CHECK(s.failures == 0);
    CHECK(s.max_residual <= critical_tolerance(2));
    auto t = persistence_harness(P, 50, 0.5, 100, 1);
    CHECK(t.results[17].witness->point == s.results[17].witness->point);
  }
  SUBCASE("adversarial size 0.99 at q2") {
    auto field = adversarial_perturbation(critical_q2(P), 0.99);
    PerturbedMap g(F, field);
    auto r = persistence_check(g, P, field.c1_bound());
    INFO(r.to_json().dump());
    CHECK(r.ok());
    CHECK(r.det_q2 == doctest::Approx(-14 * 0.01).epsilon(1e-6));
    // The fd Jacobian path agrees with the analytic-plus-perturbation one.
    CHECK(fd_jacobian(g, critical_q2(P)).determinant() == doctest::Approx(r.det_q2).epsilon(1e-4));
  }
}
