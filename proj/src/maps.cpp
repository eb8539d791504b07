#include "toruslab/maps.hpp"

#include <cmath>

namespace toruslab {

namespace {

Vec wrapped(const Vec& x) { return TorusPoint(x).coords(); }

double pow14(int k) { return std::pow(14.0, k); }

Mat expanding_diag(int n) {
  Mat J = Mat::Identity(n, n) * 14.0;
  J(n - 1, n - 1) = 1.0;
  return J;
}

}  // namespace

LinearExpanding::LinearExpanding(int n) : n_(n) {
  if (n < 2 || n > kMaxDim) throw DomainError("LinearExpanding: n must lie in [2, 6]");
}

Vec LinearExpanding::apply(const Vec& x) const {
  Vec y = wrapped(x);
  for (int i = 0; i + 1 < n_; ++i) y[i] = wrap_scalar(14.0 * y[i]);
  return y;
}

Mat LinearExpanding::jacobian(const Vec&) const { return expanding_diag(n_); }
double LinearExpanding::det(const Vec&) const { return pow14(n_ - 1); }

BlenderBump::BlenderBump(int dim, double eps)
    : dim_(dim), b0_(-1.0 / 28, 1.0 / 28, eps), b1_(3.0 / 28, 5.0 / 28, eps) {
  if (2 * eps >= 2.0 / 28) throw DomainError("BlenderBump: fattened cubes overlap (need 2 eps < 2/28)");
}

void BlenderBump::eval(const double* x, double& u0, double& u1, Vec* g0, Vec* g1) const {
  double v0[kMaxDim], d0[kMaxDim], v1[kMaxDim], d1[kMaxDim];
  u0 = u1 = 1.0;
  for (int j = 0; j < dim_; ++j) {
    b0_.eval(x[j], v0[j], d0[j]);
    b1_.eval(x[j], v1[j], d1[j]);
    u0 *= v0[j];
    u1 *= v1[j];
  }
  auto grad = [&](Vec* g, const double* v, const double* d) {
    if (!g) return;
    g->setZero(dim_);
    for (int j = 0; j < dim_; ++j) {
      if (d[j] == 0) continue;
      double prod = d[j];
      for (int k = 0; k < dim_; ++k)
        if (k != j) prod *= v[k];
      (*g)[j] = prod;
    }
  };
  grad(g0, v0, d0);
  grad(g1, v1, d1);
}

double BlenderBump::value(const Vec& x) const {
  double u0, u1;
  eval(x.data(), u0, u1, nullptr, nullptr);
  return u0 + u1;
}

Vec BlenderBump::gradient(const Vec& x) const {
  double u0, u1;
  Vec g0, g1;
  eval(x.data(), u0, u1, &g0, &g1);
  return g0 + g1;
}

double BlenderBump::gradient_bound() const { return std::sqrt(double(dim_)) * b0_.sup_derivative(); }

PiecewiseBlender::PiecewiseBlender(int n, double eps, IFSFamily ifs)
    : n_(n), cubes_(n - 1, eps), ifs_(std::move(ifs)) {}

Vec PiecewiseBlender::apply(const Vec& x) const {
  Vec y = wrapped(x);
  std::span<const double> head(y.data(), static_cast<std::size_t>(n_ - 1));
  double last = y[n_ - 1];
  if (cubes_.k0_fat.contains(head)) last = ifs_.g1(last);
  else if (cubes_.k1_fat.contains(head)) last = ifs_.g2(last);
  for (int i = 0; i + 1 < n_; ++i) y[i] = wrap_scalar(14.0 * y[i]);
  y[n_ - 1] = last;
  return y;
}

Mat PiecewiseBlender::jacobian(const Vec& x) const {
  Vec y = wrapped(x);
  std::span<const double> head(y.data(), static_cast<std::size_t>(n_ - 1));
  Mat J = expanding_diag(n_);
  if (cubes_.k0_fat.contains(head)) J(n_ - 1, n_ - 1) = ifs_.g1.derivative(y[n_ - 1]);
  else if (cubes_.k1_fat.contains(head)) J(n_ - 1, n_ - 1) = ifs_.g2.derivative(y[n_ - 1]);
  return J;
}

BlenderMap::BlenderMap(const ConstructionParams& params, IFSFamily ifs)
    : n_(params.n), ifs_(std::move(ifs)), bump_(params.n - 1, params.eps()) {}

BlenderMap::BlenderMap(const ConstructionParams& params) : BlenderMap(params, build_ifs(params)) {}

double BlenderMap::fiber(const Vec& x, double* dy) const {
  double u0, u1;
  bump_.eval(x.data(), u0, u1, nullptr, nullptr);
  double y = x[n_ - 1];
  if (u0 == 0 && u1 == 0) {
    if (dy) *dy = 1.0;
    return y;
  }
  double out = y;
  double slope = 1.0;
  if (u0 != 0) {
    out += u0 * ifs_.g1.displacement(y);
    if (dy) slope += u0 * (ifs_.g1.derivative(y) - 1.0);
  }
  if (u1 != 0) {
    out += u1 * ifs_.g2.displacement(y);
    if (dy) slope += u1 * (ifs_.g2.derivative(y) - 1.0);
  }
  if (dy) *dy = slope;
  return wrap_scalar(out);
}

Vec BlenderMap::apply(const Vec& x) const {
  Vec y = wrapped(x);
  double last = fiber(y);
  for (int i = 0; i + 1 < n_; ++i) y[i] = wrap_scalar(14.0 * y[i]);
  y[n_ - 1] = last;
  return y;
}

Mat BlenderMap::jacobian(const Vec& x) const {
  Vec y = wrapped(x);
  double u0, u1;
  Vec g0, g1;
  bump_.eval(y.data(), u0, u1, &g0, &g1);
  Mat J = expanding_diag(n_);
  double t = y[n_ - 1];
  double d1 = ifs_.g1.displacement(t), d2 = ifs_.g2.displacement(t);
  for (int j = 0; j + 1 < n_; ++j) J(n_ - 1, j) = g0[j] * d1 + g1[j] * d2;
  J(n_ - 1, n_ - 1) = 1.0 + u0 * (ifs_.g1.derivative(t) - 1.0) + u1 * (ifs_.g2.derivative(t) - 1.0);
  return J;
}

double BlenderMap::det(const Vec& x) const {
  double dy;
  fiber(wrapped(x), &dy);
  return pow14(n_ - 1) * dy;
}

SingularMap::SingularMap(const ConstructionParams& params, IFSFamily ifs)
    : params_(params),
      f_(params, std::move(ifs)),
      psi_(params.theta),
      phi_(params.delta),
      chi_(params.chi_inner, params.chi_outer, params.n == 2) {}

SingularMap::SingularMap(const ConstructionParams& params) : SingularMap(params, build_ifs(params)) {}

bool SingularMap::in_ball(const Vec& x) const { return torus_distance(wrapped(x), params_.p) < params_.r; }

double SingularMap::transverse(const Vec& x) const {
  double t2 = 0;
  for (int j = 1; j + 1 < params_.n; ++j) t2 += x[j] * x[j];
  return std::sqrt(t2);
}

double SingularMap::surgery(const Vec& x) const {
  Vec y = wrapped(x);
  if (!in_ball(y)) return 0.0;
  const int n = params_.n;
  double s = y.head(n - 1).squaredNorm();
  return phi_.value(y[n - 1]) * psi_.value(s) * chi_.value(transverse(y));
}

Vec SingularMap::apply(const Vec& x) const {
  Vec y = wrapped(x);
  if (!in_ball(y)) return f_.apply(y);
  Vec out = LinearExpanding(params_.n).apply(y);
  out[params_.n - 1] = wrap_scalar(out[params_.n - 1] - surgery(y));
  return out;
}

Mat SingularMap::jacobian(const Vec& x) const {
  Vec y = wrapped(x);
  if (!in_ball(y)) return f_.jacobian(y);
  const int n = params_.n;
  Mat J = expanding_diag(n);
  double s = y.head(n - 1).squaredNorm();
  double t = transverse(y);
  double ph = phi_.value(y[n - 1]), dph = phi_.derivative(y[n - 1]);
  double ps = psi_.value(s), dps = psi_.derivative(s);
  double ch = chi_.value(t), dch = chi_.derivative(t);
  for (int j = 0; j + 1 < n; ++j) {
    double dchi_j = (j >= 1 && t > 0) ? dch * y[j] / t : 0.0;
    J(n - 1, j) = -ph * (2.0 * dps * y[j] * ch + ps * dchi_j);
  }
  J(n - 1, n - 1) = 1.0 - dph * ps * ch;
  return J;
}

double SingularMap::det(const Vec& x) const {
  Vec y = wrapped(x);
  if (!in_ball(y)) return f_.det(y);
  const int n = params_.n;
  double s = y.head(n - 1).squaredNorm();
  return pow14(n - 1) * (1.0 - phi_.derivative(y[n - 1]) * psi_.value(s) * chi_.value(transverse(y)));
}

TorusPoint map_A(const TorusPoint& x) { return TorusPoint(LinearExpanding(x.dim()).apply(x.coords())); }

BlenderBump build_u(const ConstructionParams& params) { return BlenderBump(params.n - 1, params.eps()); }

IFSFamily build_ifs(const ConstructionParams& params) { return build_ifs(params.a0); }

TorusPoint map_f(const TorusPoint& x, const ConstructionParams& params, const IFSFamily& ifs) {
  return BlenderMap(params, ifs)(x);
}

Mat jac_f(const TorusPoint& x, const ConstructionParams& params, const IFSFamily& ifs) {
  return BlenderMap(params, ifs).jacobian(x.coords());
}

PsiProfile build_psi(const ConstructionParams& params) { return PsiProfile(params.theta); }

PhiProfile build_phi(const ConstructionParams& params) {
  PhiProfile phi(params.delta);
  if (phi.sup_value() > params.delta) throw NumericError("build_phi: sup |phi| exceeds delta");
  return phi;
}

TorusPoint map_F(const TorusPoint& x, const ConstructionParams& params, const IFSFamily& ifs) {
  return SingularMap(params, ifs)(x);
}

Mat jac_F(const TorusPoint& x, const ConstructionParams& params) { return SingularMap(params).jacobian(x.coords()); }

double det_jac_F(const TorusPoint& x, const ConstructionParams& params) { return SingularMap(params).det(x.coords()); }

nlohmann::json describe_construction(const ConstructionParams& params) {
  IFSFamily ifs = build_ifs(params);
  PsiProfile psi(params.theta);
  PhiProfile phi(params.delta);
  return {{"params", to_json(params)},
          {"matrix_diagonal", [&] {
             std::vector<double> d(static_cast<std::size_t>(params.n), 14.0);
             d.back() = 1.0;
             return d;
           }()},
          {"cubes", {{"K0", {-1.0 / 28, 1.0 / 28}}, {"K1", {3.0 / 28, 5.0 / 28}}, {"epsilon", to_string(params.epsilon)}}},
          {"bump", {{"gradient_bound", params.m_b}, {"budget", params.budget()}}},
          {"psi", {{"support", {psi.support_lo(), psi.support_hi()}}, {"sup", psi.sup_value()}, {"sup_derivative", psi.sup_derivative()}}},
          {"phi",
           {{"support", {phi.support_lo(), phi.support_hi()}},
            {"sup", phi.sup_value()},
            {"derivative_range", {phi.min_derivative(), phi.max_derivative()}}}},
          {"cutoff", {{"inner", params.chi_inner}, {"outer", params.chi_outer}, {"active", params.n > 2}}},
          {"g1", ifs.g1.describe()},
          {"g2", ifs.g2.describe()}};
}

}  // namespace toruslab
