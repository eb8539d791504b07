#include <doctest.h>

#include "toruslab/perturbations.hpp"

#include <cmath>
#include <random>

using namespace toruslab;

TEST_CASE("certificate dominates swept norms") {
  for (int seed = 0; seed < 100; ++seed) {
    int n = 2 + seed % 4;
    auto P = make_perturbation(n, seed, 0.5);
    REQUIRE(P.c1_bound() == doctest::Approx(0.5).epsilon(1e-12));
    auto s = sweep_norms(P, 10000, seed + 1000);
    REQUIRE(s.c0 <= P.c0_bound() + 1e-15);
    REQUIRE(s.derivative <= P.derivative_bound() + 1e-15);
    REQUIRE(std::max(s.c0, s.derivative) <= 0.5 + 1e-12);
  }
}

TEST_CASE("budget scaling is linear and deterministic") {
  auto a = make_perturbation(2, 42, 0.5), b = make_perturbation(2, 42, 0.25), c = make_perturbation(2, 42, 0.5);
  REQUIRE(a.terms().size() == b.terms().size());
  for (std::size_t i = 0; i < a.terms().size(); ++i) {
    CHECK(b.terms()[i].coeff == a.terms()[i].coeff / 2);
    CHECK(c.terms()[i].coeff == a.terms()[i].coeff);
  }
  CHECK(make_perturbation(2, 42, 0.0).zero());
  CHECK(make_perturbation(2, 43, 0.5).terms()[0].coeff != a.terms()[0].coeff);
  CHECK_THROWS_AS(make_perturbation(2, 1, -0.1), DomainError);
}

TEST_CASE("derivative matches central differences and the field is 2-periodic") {
  auto P = make_perturbation(3, 7, 0.3);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(-1, 1);
  const double h = 1e-6;
  for (int i = 0; i < 200; ++i) {
    Vec x(3);
    x << U(rng), U(rng), U(rng);
    Mat D = P.derivative(x);
    for (int j = 0; j < 3; ++j) {
      Vec e = Vec::Zero(3);
      e[j] = h;
      Vec fd = (P.value(x + e) - P.value(x - e)) / (2 * h);
      REQUIRE((fd - D.col(j)).norm() <= 1e-7);
      Vec shift = Vec::Zero(3);
      shift[j] = 2;
      REQUIRE((P.value(x + shift) - P.value(x)).norm() <= 1e-12);
    }
  }
}

TEST_CASE("adversarial field") {
  Vec q(2);
  q << 0.0, 1.0;
  auto P = adversarial_perturbation(q, 0.99);
  CHECK(P.c1_bound() == doctest::Approx(0.99));
  CHECK(P.derivative(q)(1, 1) == doctest::Approx(0.99));
  CHECK(std::abs(P.value(q)[1]) < 1e-15);
}

TEST_CASE("perturbed map") {
  auto P = default_params();
  auto f = std::make_shared<BlenderMap>(P);
  PerturbedMap same(f, PerturbationField(2, {}));
  auto field = make_perturbation(2, 5, 0.2);
  PerturbedMap g(f, field);
  auto half = apply_perturbation(f, field.scaled(0.5));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int i = 0; i < 1000; ++i) {
    Vec x(2);
    x << U(rng), U(rng);
    REQUIRE(same.apply(x) == f->apply(x));
    REQUIRE(same.jacobian(x) == f->jacobian(x));
    // linear in the field: the half-perturbed image is the midpoint
    Vec mid = torus_delta(g.apply(x), f->apply(x)) / 2;
    REQUIRE(torus_distance(half->apply(x), wrap(Vec(f->apply(x) + mid)).coords()) <= 1e-12);
    REQUIRE((g.jacobian(x) - f->jacobian(x) - field.derivative(x)).norm() <= 1e-12);
    REQUIRE(g.apply(x).maxCoeff() < 1.0);
  }
  CHECK(g.tag() == "perturbed");
}

TEST_CASE("perturbation JSON round trip") {
  auto P = make_perturbation(4, 11, 0.1);
  auto Q = PerturbationField::from_json(nlohmann::json::parse(P.to_json().dump()));
  CHECK(Q.c1_bound() == P.c1_bound());
  Vec x = Vec::Constant(4, 0.3);
  CHECK(Q.value(x) == P.value(x));
  CHECK_THROWS_AS(PerturbationField::from_json({{"n", 2}, {"terms", {{{"row", 0}, {"freq", {4, 0}}, {"coeff", 1.0}}}}}),
                  DomainError);
  CHECK_THROWS_AS(PerturbationField::from_json({{"n", 2}}), DomainError);
}
