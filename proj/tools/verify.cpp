// The `verify` suites: each returns a JSON result and a pass flag.
#include "commands.hpp"

#include "toruslab/circle_ifs.hpp"
#include "toruslab/cone_analysis.hpp"
#include "toruslab/rng.hpp"
#include "toruslab/singular_analysis.hpp"

#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <random>

namespace toruslab::cli {

namespace {

struct SuiteResult {
  nlohmann::json result;
  bool pass = false;
};

SweepOptions sweep(const RunConfig& cfg, const VerifyOptions& opt) {
  SweepOptions s;
  s.points = opt.points;
  s.vectors_per_point = opt.vectors;
  s.seed = cfg.seed;
  s.tasks = cfg.tasks;
  return s;
}

// Uniform on T^n, with a quarter each from B(p, r) and the fattened blender cubes.
Vec stratified_point(const ConstructionParams& P, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(-1, 1);
  Vec x(P.n);
  for (int j = 0; j < P.n; ++j) x[j] = U(rng);
  double pick = 0.5 * (U(rng) + 1);
  if (pick < 0.25) {
    x = P.p + P.r * 0.99 * x / std::max(1.0, x.norm() * std::sqrt(double(P.n)));
  } else if (pick < 0.5) {
    const double shift = pick < 0.375 ? 0.0 : 4.0 / 28;
    for (int j = 0; j + 1 < P.n; ++j) x[j] = shift + (1.0 / 28 + P.eps()) * x[j];
  }
  return wrap(x).coords();
}

SuiteResult suite_cones(const RunConfig& cfg, const VerifyOptions& opt) {
  BlenderMap f(cfg.params);
  SingularMap F(cfg.params);
  auto a = verify_cone_invariance(f, cfg.params, sweep(cfg, opt));
  auto b = verify_cone_invariance(F, cfg.params, sweep(cfg, opt));
  return {{{"f", a.to_json()}, {"F", b.to_json()}}, a.pass && b.pass};
}

SuiteResult suite_expansion(const RunConfig& cfg, const VerifyOptions& opt) {
  BlenderMap f(cfg.params);
  SingularMap F(cfg.params);
  auto a = verify_expansion(f, cfg.params, sweep(cfg, opt));
  auto b = verify_expansion(F, cfg.params, sweep(cfg, opt));
  nlohmann::json r{{"f", a.to_json()}, {"F", b.to_json()}, {"analytic_lower_bound", 4 * std::sqrt(196.0 / 160)}};
  return {r, a.pass && b.pass};
}

SuiteResult suite_blender(const RunConfig& cfg, const VerifyOptions&) {
  auto r = blender_covering_check(cfg.params.epsilon, cfg.params.a0);
  return {r.to_json(), r.pass};
}

SuiteResult suite_fixed_points(const RunConfig& cfg, const VerifyOptions&) {
  BlenderMap f(cfg.params);
  auto fps = find_and_classify_fixed_points(f, default_fixed_point_seeds(cfg.params.n));
  const FixedPointClass expected[] = {FixedPointClass::Saddle, FixedPointClass::Repeller, FixedPointClass::Repeller,
                                      FixedPointClass::Saddle};
  nlohmann::json list = nlohmann::json::array();
  bool pass = true;
  for (std::size_t i = 0; i < fps.size(); ++i) {
    const auto& fp = fps[i];
    bool ok = fp.residual <= 1e-9 && fp.cls == expected[i];
    pass = pass && ok;
    list.push_back({{"seed", std::vector<double>(fp.seed.data(), fp.seed.data() + fp.seed.size())},
                    {"point", std::vector<double>(fp.point.data(), fp.point.data() + fp.point.size())},
                    {"residual", fp.residual},
                    {"moduli", fp.moduli},
                    {"class", to_string(fp.cls)},
                    {"expected", to_string(expected[i])},
                    {"pass", ok}});
  }
  return {{{"fixed_points", list}}, pass};
}

SuiteResult suite_disks(const RunConfig& cfg, const VerifyOptions&) {
  const auto& P = cfg.params;
  if (P.n > 4) return {{{"skipped", "disk growth supports n <= 4"}}, true};
  DiskGrowthOptions o;
  o.tasks = cfg.tasks;
  if (P.n == 4) o.resolution = 1.0 / 100;
  Vec c = Vec::Zero(P.n);
  c[P.n - 1] = 0.3;
  auto a = disk_growth_check(BlenderMap(P), c, 0.01, 3, 4, o);
  auto b = disk_growth_check(SingularMap(P), P.p, 0.01, 3, 4, o);
  return {{{"f", a.to_json()}, {"F", b.to_json()}, {"factor", 4}}, a.pass && b.pass};
}

SuiteResult suite_determinants(const RunConfig& cfg, const VerifyOptions&) {
  const auto& P = cfg.params;
  SingularMap F(P);
  const double s = std::pow(14.0, P.n - 1);
  const Vec q1 = critical_q1(P), q2 = critical_q2(P);
  double d1 = F.det(q1), d2 = F.det(q2), dp = F.det(P.p);
  double fd1 = fd_jacobian(F, q1, 1e-7).determinant(), fd2 = fd_jacobian(F, q2, 1e-7).determinant();
  double factor_p = 1 - F.phi().derivative(0.25) * F.psi().value(1.0 / 16);
  bool pass = d1 == 2.5 * s && d2 == -s && dp == 0 && factor_p == 0 && std::abs(fd1 - d1) <= 1e-5 * std::abs(d1) &&
              std::abs(fd2 - d2) <= 1e-5 * std::abs(d2);
  nlohmann::json r{{"scale", s},          {"det_q1", d1}, {"det_q2", d2},         {"det_p", dp},
                   {"fd_det_q1", fd1},    {"fd_det_q2", fd2}, {"factor_at_p", factor_p}};
  return {r, pass};
}

SuiteResult suite_ifs(const RunConfig& cfg, const VerifyOptions&) {
  auto ifs = build_ifs(cfg.params);
  auto rng = block_rng(cfg.seed, 0, 0x1f5);
  std::uniform_real_distribution<double> U(-1, 1);
  int covered = 0, obstructed = 0, exceeded = 0, max_steps = 0;
  for (int i = 0; i < 100; ++i) {
    auto r = check_minimality(ifs, {U(rng), 0.02}, 200);
    if (r.covered) {
      ++covered;
      max_steps = std::max(max_steps, r.steps);
    } else if (r.obstructed) {
      ++obstructed;
    } else {
      ++exceeded;
    }
  }
  double worst = ifs.worst_best_derivative(1e-4);
  auto trap = forward_invariant_attractor_arc(ifs);
  nlohmann::json r{{"arcs", 100},
                   {"arc_length", 0.02},
                   {"max_steps", 200},
                   {"covered", covered},
                   {"obstructed", obstructed},
                   {"step_budget_exceeded", exceeded},
                   {"max_steps_used", max_steps},
                   {"worst_best_derivative", worst},
                   {"contraction_margin", 1 - worst},
                   {"forward_invariant_arc", {{"lo", trap.lo}, {"length", trap.length}, {"invariant", trap.forward_invariant}}}};
  return {r, covered == 100 && worst < 1 - 1e-3};
}

SuiteResult suite_bump(const RunConfig& cfg, const VerifyOptions&) {
  const auto& P = cfg.params;
  BlenderBump u(P.n - 1, P.eps());
  BlenderCubes cubes(P.n - 1, P.eps());
  auto rng = block_rng(cfg.seed, 0, 0xb5);
  long bad_range = 0, bad_plateau = 0, bad_support = 0;
  double grad = 0;
  for (int i = 0; i < 100000; ++i) {
    Vec x = stratified_point(P, rng).head(P.n - 1);
    double v = u.value(x);
    std::vector<double> xs(x.data(), x.data() + x.size());
    auto tag = cubes.classify(xs);
    if (v < 0 || v > 1) ++bad_range;
    if ((tag == CubeTag::K0 || tag == CubeTag::K1) && v != 1) ++bad_plateau;
    if (tag == CubeTag::None && v != 0) ++bad_support;
    grad = std::max(grad, u.gradient(x).norm());
  }
  nlohmann::json r{{"samples", 100000},        {"range_violations", bad_range}, {"plateau_violations", bad_plateau},
                   {"support_violations", bad_support}, {"sup_gradient_sampled", grad}, {"gradient_bound", u.gradient_bound()},
                   {"m_b", P.m_b},             {"a0", P.a0},                   {"budget", P.budget()}};
  bool pass = bad_range == 0 && bad_plateau == 0 && bad_support == 0 && grad <= u.gradient_bound() &&
              std::abs(u.gradient_bound() - P.m_b) <= 1e-9 * P.m_b && P.a0 <= P.budget();
  return {r, pass};
}

SuiteResult suite_jacobians(const RunConfig& cfg, const VerifyOptions&) {
  const auto& P = cfg.params;
  LinearExpanding A(P.n);
  BlenderMap f(P);
  SingularMap F(P);
  nlohmann::json r;
  bool pass = true;
  for (const TorusMap* m : {static_cast<const TorusMap*>(&A), static_cast<const TorusMap*>(&f),
                            static_cast<const TorusMap*>(&F)}) {
    auto rng = block_rng(cfg.seed, 0, 0x1ac);
    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
      Vec x = stratified_point(P, rng);
      Mat J = m->jacobian(x);
      double err = (J - fd_jacobian(*m, x, 1e-6)).cwiseAbs().maxCoeff() / std::max(1.0, J.cwiseAbs().maxCoeff());
      worst = std::max(worst, err);
    }
    r[m->tag()] = {{"points", 1000}, {"worst_relative_error", worst}};
    pass = pass && worst <= 1e-5;
  }
  return {r, pass};
}

using Suite = std::function<SuiteResult(const RunConfig&, const VerifyOptions&)>;

const std::vector<std::pair<std::string, Suite>>& suites() {
  static const std::vector<std::pair<std::string, Suite>> s{
      {"cones", suite_cones},       {"expansion", suite_expansion},       {"blender", suite_blender},
      {"fixed-points", suite_fixed_points}, {"disks", suite_disks}, {"determinants", suite_determinants},
      {"ifs", suite_ifs},           {"bump", suite_bump},                 {"jacobians", suite_jacobians}};
  return s;
}

}  // namespace

const std::vector<std::string>& verify_suite_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [name, fn] : suites()) v.push_back(name);
    return v;
  }();
  return names;
}

int cmd_verify(const RunConfig& cfg, const VerifyOptions& opt) {
  require_valid(cfg);
  std::vector<std::string> wanted = opt.suites.empty() ? verify_suite_names() : opt.suites;
  bool all = true;
  nlohmann::json summary = nlohmann::json::object();
  for (const auto& name : wanted) {
    auto it = std::find_if(suites().begin(), suites().end(), [&](const auto& s) { return s.first == name; });
    if (it == suites().end()) throw ConfigError("unknown verify suite '" + name + "'");
    auto res = it->second(cfg, opt);
    std::string file = "verify_" + name;
    std::replace(file.begin(), file.end(), '-', '_');
    write_report(cfg, file, "verify " + name, res.result, res.pass);
    std::cout << (res.pass ? "PASS  " : "FAIL  ") << name << '\n';
    summary[name] = res.pass;
    all = all && res.pass;
  }
  write_report(cfg, "verify_summary", "verify", summary, all);
  return all ? kPass : kFail;
}

}  // namespace toruslab::cli
