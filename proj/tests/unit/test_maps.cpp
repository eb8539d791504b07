#include <doctest.h>

#include "toruslab/maps.hpp"

#include <cmath>
#include <random>

using namespace toruslab;

namespace {

Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<int>(xs.size()));
  int i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

// Independent oracle: central differences of the map, outputs compared modulo 2.
Mat fd_oracle(const TorusMap& m, const Vec& x, double h = 1e-6) {
  const int n = m.dim();
  Mat J(n, n);
  for (int j = 0; j < n; ++j) {
    Vec a = x, b = x;
    a[j] += h;
    b[j] -= h;
    Vec fa = m.apply(a), fb = m.apply(b);
    for (int i = 0; i < n; ++i) J(i, j) = wrap_diff(fa[i], fb[i]) / (2 * h);
  }
  return J;
}

double rel_err(const Mat& a, const Mat& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff());
}

Vec random_point(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> U(-1, 1);
  Vec x(n);
  for (int i = 0; i < n; ++i) x[i] = U(rng);
  return x;
}

// Points concentrated where the maps are not linear: blender cubes and the surgery ball.
Vec interesting_point(std::mt19937_64& rng, const ConstructionParams& P, int which) {
  std::uniform_real_distribution<double> U(-1, 1);
  Vec x = random_point(rng, P.n);
  const double eps = P.eps();
  if (which == 0) {
    for (int j = 0; j + 1 < P.n; ++j) x[j] = (1.0 / 28 + eps) * 1.05 * U(rng);
  } else if (which == 1) {
    for (int j = 0; j + 1 < P.n; ++j) x[j] = 4.0 / 28 + (1.0 / 28 + eps) * 1.05 * U(rng);
  } else {
    for (int i = 0; i < P.n; ++i) x[i] = P.p[i] + P.r * U(rng) / std::sqrt(double(P.n));
    x[P.n - 1] = 0.25 + P.delta * (0.25 + 0.6 * U(rng));
  }
  return x;
}

}  // namespace

TEST_CASE("map_A examples") {
  CHECK(map_A(wrap(vec({0.0, 0.0}))).coords() == vec({0.0, 0.0}));
  auto y = map_A(wrap(vec({0.25, 0.7})));
  CHECK(y[0] == doctest::Approx(-0.5));
  CHECK(y[1] == doctest::Approx(0.7));
  auto z = map_A(wrap(vec({1.0 / 14, 1.0 / 14, 0.3})));
  CHECK(std::abs(wrap_diff(z[0], -1.0)) < 1e-12);
  CHECK(std::abs(wrap_diff(z[1], -1.0)) < 1e-12);
  CHECK(z[2] == doctest::Approx(0.3));
  LinearExpanding A(3);
  CHECK(A.det(vec({0.1, 0.2, 0.3})) == 196.0);
  CHECK(A.apply(vec({2.25, 0.0, 0.5})) == A.apply(vec({0.25, 0.0, 0.5})));
  CHECK_THROWS_AS(LinearExpanding(1), DomainError);
}

TEST_CASE("bump u") {
  for (int n : {2, 3, 4}) {
    auto P = default_params(n);
    auto u = build_u(P);
    Vec zero = Vec::Zero(n - 1);
    CHECK(u.value(zero) == 1.0);
    Vec k1 = Vec::Constant(n - 1, 4.0 / 28);
    CHECK(u.value(k1) == 1.0);
    Vec corner = Vec::Constant(n - 1, 1.0 / 28);
    CHECK(u.value(corner) == 1.0);
    Vec q = Vec::Zero(n - 1);
    q[0] = 0.25;
    CHECK(u.value(q) == 0.0);
    CHECK(u.gradient_bound() == doctest::Approx(P.m_b));
    // one coordinate outside the fattening kills u even if the others are inside
    Vec mixed = Vec::Zero(n - 1);
    mixed[n - 2] = 1.0 / 28 + 1.1 * P.eps();
    CHECK(u.value(mixed) == 0.0);

    std::mt19937_64 rng(n);
    std::uniform_real_distribution<double> U(-1.0 / 28 - 2 * P.eps(), 5.0 / 28 + 2 * P.eps());
    for (int i = 0; i < 10000; ++i) {
      Vec x(n - 1);
      for (int j = 0; j < n - 1; ++j) x[j] = U(rng);
      double v = u.value(x);
      REQUIRE(v >= 0);
      REQUIRE(v <= 1);
      REQUIRE(u.gradient(x).norm() <= P.m_b);
    }
  }
}

TEST_CASE("f agrees with A off the fattened cubes and with fhat on the cubes") {
  for (int n : {2, 3}) {
    auto P = default_params(n);
    auto ifs = build_ifs(P);
    BlenderMap f(P, ifs);
    LinearExpanding A(n);
    PiecewiseBlender fhat(n, P.eps(), ifs);
    BlenderCubes cubes(n - 1, P.eps());
    std::mt19937_64 rng(100 + n);
    int off = 0;
    while (off < 10000) {
      Vec x = random_point(rng, n);
      std::span<const double> head(x.data(), static_cast<std::size_t>(n - 1));
      if (cubes.in_fat(head)) continue;
      ++off;
      REQUIRE(f.apply(x) == A.apply(x));
      REQUIRE(rel_err(f.jacobian(x), A.jacobian(x)) == 0.0);
    }
    for (int i = 0; i < 10000; ++i) {
      Vec x = random_point(rng, n);
      int which = i % 2;
      std::uniform_real_distribution<double> U(-1.0 / 28, 1.0 / 28);
      for (int j = 0; j + 1 < n; ++j) x[j] = (which ? 4.0 / 28 : 0.0) + U(rng);
      Vec a = f.apply(x), b = fhat.apply(x);
      REQUIRE(torus_distance(a, b) < 1e-15);
      Mat J = f.jacobian(x);
      for (int j = 0; j + 1 < n; ++j) REQUIRE(J(n - 1, j) == 0.0);
    }
  }
}

TEST_CASE("f on the zero fiber and fixed points") {
  auto P = default_params(3);
  auto ifs = build_ifs(P);
  for (double y : {-0.7, 0.1, 0.5}) {
    auto img = map_f(wrap(vec({0.0, 0.0, y})), P, ifs);
    CHECK(img[0] == 0.0);
    CHECK(img[1] == 0.0);
    CHECK(img[2] == doctest::Approx(ifs.g1(y)));
  }
  BlenderMap f(P, ifs);
  for (Vec x : {vec({0.0, 0.0, 1.0}), vec({0.0, 0.0, 0.0}), vec({2.0 / 13, 2.0 / 13, 2.0 / 13}),
                vec({2.0 / 13, 2.0 / 13, 15.0 / 13})}) {
    REQUIRE(torus_distance(f.apply(x), wrap(x).coords()) <= 1e-9);
  }
  Mat J = jac_f(wrap(vec({0.5, 0.5, 0.0})), P, ifs);
  CHECK(J == LinearExpanding(3).jacobian(vec({0.5, 0.5, 0.0})));
}

TEST_CASE("F basics") {
  for (int n : {2, 3, 4, 5}) {
    auto P = default_params(n);
    SingularMap F(P);
    LinearExpanding A(n);
    CHECK(F.apply(P.p) == A.apply(P.p));
    const double s = std::pow(14.0, n - 1);
    Vec q1 = P.p, q2 = P.p;
    q1[n - 1] += P.delta / 4;
    q2[n - 1] += P.delta / 8;
    CHECK(F.det(q1) == doctest::Approx(2.5 * s).epsilon(1e-14));
    CHECK(F.det(q2) == doctest::Approx(-s).epsilon(1e-14));
    CHECK(F.det(P.p) == 0.0);
    CHECK(det_jac_F(TorusPoint(q1), P) == doctest::Approx(2.5 * s));
    CHECK(rel_err(fd_oracle(F, q1), F.jacobian(q1)) < 1e-5);
    CHECK(rel_err(fd_oracle(F, q2), F.jacobian(q2)) < 1e-5);
    // phi''' ~ 1/delta^2, so the step shrinks with delta (delta ~ 2.5e-3 for n >= 3)
    CHECK(fd_oracle(F, q1, 1e-7).determinant() == doctest::Approx(2.5 * s).epsilon(1e-5));
    CHECK(fd_oracle(F, q2, 1e-7).determinant() == doctest::Approx(-s).epsilon(1e-5));
    // critical point: 1 - phi'(1/4) psi(1/16) = 1 - (1/2) 2
    CHECK(1.0 - F.phi().derivative(0.25) * F.psi().value(1.0 / 16) == 0.0);
  }
}

TEST_CASE("F equals f off the surgery support and A off the blender") {
  for (int n : {2, 3}) {
    auto P = default_params(n);
    auto ifs = build_ifs(P);
    SingularMap F(P, ifs);
    BlenderMap f(P, ifs);
    LinearExpanding A(n);
    BlenderCubes cubes(n - 1, P.eps());
    std::mt19937_64 rng(7 + n);
    for (int i = 0; i < 10000; ++i) {
      Vec x = i % 2 ? random_point(rng, n) : interesting_point(rng, P, 2);
      if (F.surgery(x) != 0.0) continue;
      REQUIRE(F.apply(x) == f.apply(x));
      std::span<const double> head(x.data(), static_cast<std::size_t>(n - 1));
      if (!F.in_ball(x) && !cubes.in_fat(head)) REQUIRE(F.apply(x) == A.apply(x));
    }
  }
}

TEST_CASE("F is continuous across the ball boundary") {
  for (int n : {2, 3, 4}) {
    auto P = default_params(n);
    SingularMap F(P);
    std::mt19937_64 rng(50 + n);
    std::normal_distribution<double> N;
    for (int i = 0; i < 1000; ++i) {
      Vec d(n);
      for (int k = 0; k < n; ++k) d[k] = N(rng);
      d.normalize();
      Vec inside = P.p + (P.r - 1e-12) * d, outside = P.p + (P.r + 1e-12) * d;
      REQUIRE(F.in_ball(inside));
      REQUIRE_FALSE(F.in_ball(outside));
      REQUIRE(torus_distance(F.apply(inside), F.apply(outside)) <= 1e-9);
      REQUIRE(F.surgery(inside) == 0.0);
    }
  }
}

TEST_CASE("analytic Jacobians match central differences") {
  for (int n : {2, 3, 4}) {
    auto P = default_params(n);
    auto ifs = build_ifs(P);
    LinearExpanding A(n);
    BlenderMap f(P, ifs);
    SingularMap F(P, ifs);
    std::mt19937_64 rng(31 + n);
    for (int i = 0; i < 1000; ++i) {
      Vec x = i % 4 == 3 ? random_point(rng, n) : interesting_point(rng, P, i % 4);
      REQUIRE(rel_err(fd_oracle(A, x), A.jacobian(x)) < 1e-5);
      REQUIRE(rel_err(fd_oracle(f, x), f.jacobian(x)) < 1e-5);
      REQUIRE(rel_err(fd_oracle(F, x), F.jacobian(x)) < 1e-5);
    }
  }
}

TEST_CASE("closed-form determinants match the matrix determinant") {
  for (int n : {2, 3, 5}) {
    auto P = default_params(n);
    auto ifs = build_ifs(P);
    BlenderMap f(P, ifs);
    SingularMap F(P, ifs);
    std::mt19937_64 rng(77 + n);
    for (int i = 0; i < 1000; ++i) {
      Vec x = i % 4 == 3 ? random_point(rng, n) : interesting_point(rng, P, i % 4);
      double s = std::pow(14.0, n - 1);
      REQUIRE(std::abs(F.det(x) - F.jacobian(x).determinant()) <= 1e-10 * s);
      REQUIRE(std::abs(f.det(x) - f.jacobian(x).determinant()) <= 1e-10 * s);
      REQUIRE(std::abs(F.det(x)) <= 2.5 * s + 1e-9);
    }
  }
}

TEST_CASE("evaluation commutes with wrap") {
  auto P = default_params(3);
  SingularMap F(P);
  std::mt19937_64 rng(8);
  for (int i = 0; i < 1000; ++i) {
    Vec x = interesting_point(rng, P, i % 3);
    Vec shifted = x;
    shifted[i % 3] += 2.0 * ((i % 5) - 2);
    REQUIRE(torus_distance(F.apply(shifted), F.apply(x)) < 1e-12);
    for (int k = 0; k < 3; ++k) {
      REQUIRE(F.apply(x)[k] >= -1.0);
      REQUIRE(F.apply(x)[k] < 1.0);
    }
  }
}

TEST_CASE("construction description") {
  auto j = describe_construction(default_params(2));
  CHECK(j["params"]["epsilon"] == "1/1400");
  CHECK(j["g2"]["conjugating_shift"].get<double>() == doctest::Approx(2.0 / 13));
  CHECK(j["phi"]["sup"].get<double>() <= j["params"]["delta"].get<double>());
  CHECK(j["matrix_diagonal"].size() == 2);
}
