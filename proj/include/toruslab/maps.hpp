// The torus endomorphisms A, fhat, f and F with analytic Jacobians.
#pragma once

#include "toruslab/circle_ifs.hpp"
#include "toruslab/params.hpp"
#include "toruslab/profiles.hpp"
#include "toruslab/torus.hpp"

#include <memory>
#include <string>

namespace toruslab {

class TorusMap {
 public:
  virtual ~TorusMap() = default;
  virtual int dim() const = 0;
  /// Image of x (wrapped first); result wrapped into [-1, 1)^n.
  virtual Vec apply(const Vec& x) const = 0;
  virtual Mat jacobian(const Vec& x) const = 0;
  virtual double det(const Vec& x) const { return jacobian(x).determinant(); }
  /// One of A | fhat | f | F | perturbed.
  virtual std::string tag() const = 0;

  TorusPoint operator()(const TorusPoint& x) const { return TorusPoint(apply(x.coords())); }
};

using TorusMapPtr = std::shared_ptr<const TorusMap>;

/// A(x_1, ..., x_n) = (14 x_1, ..., 14 x_{n-1}, x_n).
class LinearExpanding final : public TorusMap {
 public:
  explicit LinearExpanding(int n);
  int dim() const override { return n_; }
  Vec apply(const Vec& x) const override;
  Mat jacobian(const Vec& x) const override;
  double det(const Vec& x) const override;
  std::string tag() const override { return "A"; }

 private:
  int n_;
};

/// u = u0 + u1 on T^{n-1}, u_i a product of plateau bumps around cube i.
class BlenderBump {
 public:
  BlenderBump(int dim, double eps);
  int dim() const { return dim_; }
  /// u_i(x) and grad u_i(x) for both cubes; x has at least dim() entries.
  void eval(const double* x, double& u0, double& u1, Vec* g0, Vec* g1) const;
  double value(const Vec& x) const;
  Vec gradient(const Vec& x) const;
  /// Closed-form bound sqrt(dim) * 15 / (8 eps) on |grad u|.
  double gradient_bound() const;

 private:
  int dim_;
  PlateauBump b0_, b1_;
};

/// fhat: (14x, g1(y)) over K0^eps, (14x, g2(y)) over K1^eps, A elsewhere.
class PiecewiseBlender final : public TorusMap {
 public:
  PiecewiseBlender(int n, double eps, IFSFamily ifs);
  int dim() const override { return n_; }
  Vec apply(const Vec& x) const override;
  Mat jacobian(const Vec& x) const override;
  std::string tag() const override { return "fhat"; }

 private:
  int n_;
  BlenderCubes cubes_;
  IFSFamily ifs_;
};

/// f(x, y) = (14x, y + u0(x)(g1(y) - y) + u1(x)(g2(y) - y)).
class BlenderMap final : public TorusMap {
 public:
  BlenderMap(const ConstructionParams& params, IFSFamily ifs);
  explicit BlenderMap(const ConstructionParams& params);
  int dim() const override { return n_; }
  Vec apply(const Vec& x) const override;
  Mat jacobian(const Vec& x) const override;
  double det(const Vec& x) const override;
  std::string tag() const override { return "f"; }

  const IFSFamily& ifs() const { return ifs_; }
  const BlenderBump& bump() const { return bump_; }
  /// Fiber component and its y-derivative, for callers that iterate the fiber only.
  double fiber(const Vec& x, double* dy = nullptr) const;

 private:
  int n_;
  IFSFamily ifs_;
  BlenderBump bump_;
};

/// F = f off B(p, r); inside, F(x) = A(x) - phi(x_n) psi(s) chi(t) e_n with
/// s = x_1^2 + ... + x_{n-1}^2 and t = |(x_2, ..., x_{n-1})|.
class SingularMap final : public TorusMap {
 public:
  SingularMap(const ConstructionParams& params, IFSFamily ifs);
  explicit SingularMap(const ConstructionParams& params);
  int dim() const override { return params_.n; }
  Vec apply(const Vec& x) const override;
  Mat jacobian(const Vec& x) const override;
  /// Closed form 14^{n-1} (1 - phi' psi chi) inside the ball, det Df outside.
  double det(const Vec& x) const override;
  std::string tag() const override { return "F"; }

  bool in_ball(const Vec& x) const;
  /// phi(x_n) psi(s) chi(t); zero outside the ball.
  double surgery(const Vec& x) const;
  const BlenderMap& blender() const { return f_; }
  const PsiProfile& psi() const { return psi_; }
  const PhiProfile& phi() const { return phi_; }
  const CutoffProfile& chi() const { return chi_; }
  const ConstructionParams& params() const { return params_; }

 private:
  double transverse(const Vec& x) const;

  ConstructionParams params_;
  BlenderMap f_;
  PsiProfile psi_;
  PhiProfile phi_;
  CutoffProfile chi_;
};

// Free-function forms. Each builds the map from `params`; prefer the classes in loops.
TorusPoint map_A(const TorusPoint& x);
BlenderBump build_u(const ConstructionParams& params);
TorusPoint map_f(const TorusPoint& x, const ConstructionParams& params, const IFSFamily& ifs);
Mat jac_f(const TorusPoint& x, const ConstructionParams& params, const IFSFamily& ifs);
PsiProfile build_psi(const ConstructionParams& params);
PhiProfile build_phi(const ConstructionParams& params);
TorusPoint map_F(const TorusPoint& x, const ConstructionParams& params, const IFSFamily& ifs);
Mat jac_F(const TorusPoint& x, const ConstructionParams& params);
double det_jac_F(const TorusPoint& x, const ConstructionParams& params);

/// The IFS with a0 taken from params.
IFSFamily build_ifs(const ConstructionParams& params);

/// Describe the construction (parameters, profile bounds, generator breakpoints) as JSON.
nlohmann::json describe_construction(const ConstructionParams& params);

}  // namespace toruslab
