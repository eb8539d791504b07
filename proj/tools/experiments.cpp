// Experiments, critical-set sampling and orbit commands.
#include "commands.hpp"

#include "toruslab/circle_ifs.hpp"
#include "toruslab/orbit_lab.hpp"
#include "toruslab/rng.hpp"
#include "toruslab/singular_analysis.hpp"

#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

namespace toruslab::cli {

namespace {

Vec to_vec(const std::vector<double>& v, int n, const std::string& what) {
  if (static_cast<int>(v.size()) != n) throw ConfigError(what + " needs " + std::to_string(n) + " coordinates");
  Vec x(n);
  for (int j = 0; j < n; ++j) x[j] = v[static_cast<std::size_t>(j)];
  return x;
}

nlohmann::json map_json(const MapChoice& m) {
  return {{"map", m.name}, {"perturb", m.perturb}, {"perturb_seed", m.perturb_seed}};
}

}  // namespace

int cmd_density(const RunConfig& cfg, const DensityOptions& opt, const std::string& command) {
  require_valid(cfg);
  const int n = cfg.params.n;
  const long steps = opt.steps > 0 ? opt.steps : (n == 2 ? 10'000'000L : 1'000'000L);
  const int grid = opt.grid > 0 ? opt.grid : (n == 2 ? 100 : 32);
  auto map = build_map(cfg, opt.map);
  std::vector<DensityReport> reps;
  if (!opt.x0.empty()) reps.push_back(box_density(*map, to_vec(opt.x0, n, "--x0"), grid, steps));
  else reps = density_experiment(*map, grid, steps, opt.count, cfg.seed, cfg.tasks);

  int reached = 0;
  nlohmann::json list = nlohmann::json::array();
  for (std::size_t i = 0; i < reps.size(); ++i) {
    const auto& r = reps[i];
    reached += r.fraction >= opt.threshold;
    list.push_back(r.to_json());
    std::cout << "start " << i << ": fraction " << std::fixed << std::setprecision(4) << r.fraction << " ("
              << r.visited << "/" << r.total << ")" << std::defaultfloat << '\n';
    std::ostringstream gp;
    write_density_gnuplot(gp, r);
    write_text(cfg, "density_" + std::to_string(i) + ".gnuplot", gp.str());
    if (cfg.format == "csv") {
      std::ostringstream cs;
      write_density_csv(cs, r);
      write_text(cfg, "density_" + std::to_string(i) + ".csv", cs.str());
    }
  }
  const int required = opt.x0.empty() ? std::min(opt.required, static_cast<int>(reps.size())) : 1;
  bool pass = reached >= required;
  nlohmann::json res{{"map", map_json(opt.map)}, {"steps", steps},         {"grid", grid},
                     {"threshold", opt.threshold}, {"required", required}, {"reached", reached},
                     {"orbits", list}};
  write_report(cfg, "density", command, res, pass);
  std::cout << reached << "/" << reps.size() << " orbits reached " << opt.threshold << (pass ? "  PASS\n" : "  FAIL\n");
  return pass ? kPass : kFail;
}

int cmd_hit(const RunConfig& cfg, const HitOptions& opt, const std::string& command) {
  require_valid(cfg);
  const int n = cfg.params.n;
  auto map = build_map(cfg, opt.map);
  std::vector<std::pair<Box, Box>> pairs;
  if (!opt.u_lo.empty() || !opt.v_lo.empty()) {
    Box U{to_vec(opt.u_lo, n, "--u-lo"), to_vec(opt.u_hi, n, "--u-hi")};
    Box V{to_vec(opt.v_lo, n, "--v-lo"), to_vec(opt.v_hi, n, "--v-hi")};
    try {
      U.validate();
      V.validate();
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
    pairs.emplace_back(U, V);
  } else {
    for (int i = 0; i < opt.pairs; ++i)
      pairs.emplace_back(random_box(n, opt.side, cfg.seed, 2 * i), random_box(n, opt.side, cfg.seed, 2 * i + 1));
  }
  int hits = 0;
  nlohmann::json list = nlohmann::json::array();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& [U, V] = pairs[i];
    auto r = two_set_hitting(*map, U, V, opt.max_iter, 1.0 / 200, cfg.tasks);
    hits += r.hit;
    auto j = r.to_json();
    j["U"] = {{"lo", std::vector<double>(U.lo.data(), U.lo.data() + n)}, {"hi", std::vector<double>(U.hi.data(), U.hi.data() + n)}};
    j["V"] = {{"lo", std::vector<double>(V.lo.data(), V.lo.data() + n)}, {"hi", std::vector<double>(V.hi.data(), V.hi.data() + n)}};
    list.push_back(j);
    std::cout << "pair " << i << ": " << (r.hit ? "hit at " + std::to_string(r.iterate) : "no hit, closest " + std::to_string(r.closest))
              << '\n';
  }
  bool pass = hits == static_cast<int>(pairs.size());
  write_report(cfg, "hitting", command,
               {{"map", map_json(opt.map)}, {"max_iter", opt.max_iter}, {"hits", hits}, {"pairs", list}}, pass);
  return pass ? kPass : kFail;
}

int cmd_persist(const RunConfig& cfg, const PersistOptions& opt, const std::string& command) {
  require_valid(cfg);
  if (opt.count < 0 || !(opt.size >= 0)) throw ConfigError("count and size must be non-negative");
  auto s = persistence_harness(cfg.params, opt.count, opt.size, cfg.seed, cfg.tasks);
  auto res = s.to_json(true);
  bool pass = s.failures == 0;
  if (opt.adversarial) {
    auto F = std::make_shared<SingularMap>(cfg.params);
    auto field = adversarial_perturbation(critical_q2(cfg.params), 0.99);
    auto r = persistence_check(PerturbedMap(F, field), cfg.params, field.c1_bound());
    res["adversarial"] = r.to_json();
    pass = pass && r.ok();
  }
  if (cfg.format == "csv") {
    std::ostringstream out;
    const int n = cfg.params.n;
    for (int j = 0; j < n; ++j) out << 'x' << j + 1 << ',';
    out << "det,residual\n" << std::setprecision(17);
    for (const auto& r : s.results)
      if (r.witness) {
        for (int j = 0; j < n; ++j) out << r.witness->point[j] << ',';
        out << r.witness->det << ',' << r.witness->residual << '\n';
      }
    write_text(cfg, "persistence_witnesses.csv", out.str());
  }
  write_report(cfg, "persistence", command, res, pass);
  std::cout << s.count - s.failures << "/" << s.count << " perturbations of size " << opt.size
            << " keep a critical witness" << (pass ? "  PASS\n" : "  FAIL\n");
  return pass ? kPass : kFail;
}

int cmd_minimality(const RunConfig& cfg, const MinimalityOptions& opt) {
  if (opt.arcs < 1 || !(opt.min_length > 0) || opt.max_steps < 0) throw ConfigError("bad minimality options");
  double a0 = opt.a0.value_or(cfg.params.a0);
  IFSFamily ifs = [&] {
    try {
      return build_ifs(a0);
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
  }();
  auto rng = block_rng(cfg.seed, 0, 0x313);
  std::uniform_real_distribution<double> U(-1, 1);
  int covered = 0;
  nlohmann::json list = nlohmann::json::array();
  for (int i = 0; i < opt.arcs; ++i) {
    Arc arc{U(rng), opt.min_length};
    auto r = check_minimality(ifs, arc, opt.max_steps);
    covered += r.covered;
    list.push_back({{"center", arc.center},
                    {"length", arc.length},
                    {"covered", r.covered},
                    {"steps", r.steps},
                    {"obstructed", r.obstructed},
                    {"final_length", r.final_length},
                    {"failure", r.failure}});
  }
  double worst = ifs.worst_best_derivative(1e-4);
  bool pass = covered == opt.arcs && worst < 1 - 1e-3;
  write_report(cfg, "minimality", "experiment minimality",
               {{"a0", a0}, {"max_steps", opt.max_steps}, {"covered", covered}, {"worst_best_derivative", worst}, {"arcs", list}},
               pass);
  std::cout << covered << "/" << opt.arcs << " arcs covered within " << opt.max_steps
            << " steps; contraction margin " << 1 - worst << (pass ? "  PASS\n" : "  FAIL\n");
  return pass ? kPass : kFail;
}

int cmd_critical_sample(const RunConfig& cfg, const CriticalSampleOptions& opt) {
  require_valid(cfg);
  const auto& P = cfg.params;
  const int n = P.n;
  SingularMap F(P);
  Box box;
  if (opt.lo.empty() && opt.hi.empty()) {
    box.lo = P.p - Vec::Constant(n, 0.01);
    box.hi = P.p + Vec::Constant(n, 0.01);
    box.lo[n - 1] = 0.25 - P.delta / 4;
    box.hi[n - 1] = 0.25 + 0.75 * P.delta;
  } else {
    box = {to_vec(opt.lo, n, "--lo"), to_vec(opt.hi, n, "--hi")};
  }
  std::vector<CriticalWitness> ws;
  try {
    ws = critical_locus_sample(F, box, opt.resolution, cfg.tasks);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  auto seg = critical_segments_sample(F, P, opt.segments, cfg.seed);
  ws.insert(ws.end(), seg.begin(), seg.end());
  std::ostringstream csv;
  for (int j = 0; j < n; ++j) csv << 'x' << j + 1 << ',';
  csv << "det,residual\n" << std::setprecision(17);
  double worst = 0;
  for (const auto& w : ws) {
    for (int j = 0; j < n; ++j) csv << w.point[j] << ',';
    csv << w.det << ',' << w.residual << '\n';
    worst = std::max(worst, w.residual);
  }
  write_text(cfg, "critical_witnesses.csv", csv.str());
  bool pass = !ws.empty() && worst <= critical_tolerance(n);
  write_report(cfg, "critical_sample", "critical sample",
               {{"witnesses", ws.size()}, {"segment_witnesses", seg.size()}, {"max_residual", worst},
                {"tolerance", critical_tolerance(n)}},
               pass);
  std::cout << ws.size() << " critical witnesses, max |det| " << worst << (pass ? "  PASS\n" : "  FAIL\n");
  return pass ? kPass : kFail;
}

int cmd_orbit_run(const RunConfig& cfg, const OrbitRunOptions& opt) {
  require_valid(cfg);
  const int n = cfg.params.n;
  auto map = build_map(cfg, opt.map);
  Vec x0(n);
  if (opt.x0.empty()) {
    auto rng = block_rng(cfg.seed, 0, 0x0b1);
    std::uniform_real_distribution<double> U(-1, 1);
    for (int j = 0; j < n; ++j) x0[j] = U(rng);
  } else {
    x0 = to_vec(opt.x0, n, "--x0");
  }
  if (opt.steps < 0 || opt.steps > 100'000'000L) throw ConfigError("--steps must lie in [0, 1e8]");
  std::vector<Vec> pts;
  try {
    pts = orbit_prefix(*map, x0, opt.steps);
  } catch (const OrbitError& e) {
    write_report(cfg, "orbit", "orbit run", {{"error", e.what()}, {"index", e.index}}, false);
    std::cout << e.what() << '\n';
    return kFail;
  }
  std::ostringstream csv;
  write_orbit_csv(csv, pts);
  write_text(cfg, "orbit.csv", csv.str());
  const Vec& last = pts.back();
  write_report(cfg, "orbit", "orbit run",
               {{"map", map_json(opt.map)}, {"steps", opt.steps}, {"x0", std::vector<double>(x0.data(), x0.data() + n)},
                {"last", std::vector<double>(last.data(), last.data() + n)}},
               true);
  std::cout << "wrote " << pts.size() << " orbit points\n";
  return kPass;
}

}  // namespace toruslab::cli
