#include "commands.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace toruslab::cli;

namespace {

void add_map_flags(CLI::App* cmd, MapChoice& m) {
  cmd->add_option("--map", m.name, "Map: A, fhat, f or F")->check(CLI::IsMember({"A", "fhat", "f", "F"}));
  cmd->add_option("--perturb", m.perturb, "Add a random field of this certified C^1 size");
  cmd->add_option("--perturb-seed", m.perturb_seed, "Seed of the random field");
}

void add_density(CLI::App* cmd, DensityOptions& o) {
  add_map_flags(cmd, o.map);
  cmd->add_option("--steps", o.steps, "Iterates per orbit (default 1e7 at n = 2, 1e6 otherwise)");
  cmd->add_option("--grid", o.grid, "Boxes per axis (default 100 at n = 2, 32 otherwise)");
  cmd->add_option("--count", o.count, "Number of random starts");
  cmd->add_option("--threshold", o.threshold, "Visited fraction counted as success");
  cmd->add_option("--required", o.required, "Starts that must reach the threshold");
  cmd->add_option("--x0", o.x0, "Single start point instead of random starts");
}

void add_hit(CLI::App* cmd, HitOptions& o) {
  add_map_flags(cmd, o.map);
  cmd->add_option("--pairs", o.pairs, "Random box pairs");
  cmd->add_option("--side", o.side, "Side of the random boxes");
  cmd->add_option("--max-iter", o.max_iter, "Iteration budget");
  cmd->add_option("--u-lo", o.u_lo, "Lower corner of U");
  cmd->add_option("--u-hi", o.u_hi, "Upper corner of U");
  cmd->add_option("--v-lo", o.v_lo, "Lower corner of V");
  cmd->add_option("--v-hi", o.v_hi, "Upper corner of V");
}

void add_persist(CLI::App* cmd, PersistOptions& o) {
  cmd->add_option("--count", o.count, "Number of random perturbations");
  cmd->add_option("--size", o.size, "Certified C^1 size of each perturbation");
  cmd->add_flag("--adversarial", o.adversarial, "Also run the size-0.99 field aimed at q2");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"toruslab: numerical checks for a singular partially hyperbolic torus endomorphism"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags g;
  std::string config_path;
  int n = 0, tasks = 0;
  double kappa = 0;
  std::uint64_t seed = 0;
  std::string out, format;
  app.add_option("--config", config_path, "JSON config file");
  auto* n_opt = app.add_option("--n", n, "Torus dimension (2..6)");
  auto* kappa_opt = app.add_option("--kappa", kappa, "Cone parameter");
  auto* seed_opt = app.add_option("--seed", seed, "Seed (falls back to TORUSLAB_SEED)");
  auto* out_opt = app.add_option("--out", out, "Report directory");
  auto* tasks_opt = app.add_option("--tasks", tasks, "Worker cap (0 = all cores)");
  auto* format_opt = app.add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  auto* params = app.add_subcommand("params", "Parameter tools")->require_subcommand(1);
  auto* params_validate = params->add_subcommand("validate", "Validate the resolved parameters");

  VerifyOptions verify_opt;
  auto* verify = app.add_subcommand("verify", "Run verification suites (all by default)");
  verify->add_option("suites", verify_opt.suites, "Suites to run")->check(CLI::IsMember(verify_suite_names()));
  verify->add_option("--points", verify_opt.points, "Sample points for cone sweeps");
  verify->add_option("--vectors", verify_opt.vectors, "Cone vectors per point");

  auto* experiment = app.add_subcommand("experiment", "Experiments")->require_subcommand(1);
  DensityOptions exp_density;
  add_density(experiment->add_subcommand("density", "Box-counting density of random orbits"), exp_density);
  HitOptions exp_hit;
  add_hit(experiment->add_subcommand("hit", "Two-set hitting times"), exp_hit);
  PersistOptions exp_persist;
  add_persist(experiment->add_subcommand("persist", "Critical set under random perturbations"), exp_persist);
  MinimalityOptions min_opt;
  auto* exp_min = experiment->add_subcommand("minimality", "Greedy preimage growth of random arcs");
  exp_min->add_option("--arcs", min_opt.arcs, "Number of arcs");
  exp_min->add_option("--min-length", min_opt.min_length, "Arc length");
  exp_min->add_option("--max-steps", min_opt.max_steps, "Greedy step budget");
  exp_min->add_option("--a0", min_opt.a0, "Generator half-width (default from parameters)");

  auto* exp = app.add_subcommand("export", "Exports")->require_subcommand(1);
  auto* exp_desc = exp->add_subcommand("map-description", "Describe the construction as JSON");

  auto* critical = app.add_subcommand("critical", "Critical set of F")->require_subcommand(1);
  CriticalSampleOptions crit_opt;
  auto* crit_sample = critical->add_subcommand("sample", "Bisection witnesses on a grid and on segments");
  crit_sample->add_option("--lo", crit_opt.lo, "Region lower corner");
  crit_sample->add_option("--hi", crit_opt.hi, "Region upper corner");
  crit_sample->add_option("--resolution", crit_opt.resolution, "Grid points per axis");
  crit_sample->add_option("--segments", crit_opt.segments, "Random segments across the psi annulus");
  PersistOptions crit_persist_opt;
  auto* crit_persist = critical->add_subcommand("persist", "Same as experiment persist");
  add_persist(crit_persist, crit_persist_opt);

  auto* orbit = app.add_subcommand("orbit", "Orbit tools")->require_subcommand(1);
  OrbitRunOptions run_opt;
  auto* orbit_run = orbit->add_subcommand("run", "Write an orbit prefix as CSV");
  add_map_flags(orbit_run, run_opt.map);
  orbit_run->add_option("--x0", run_opt.x0, "Start point (random from the seed by default)");
  orbit_run->add_option("--steps", run_opt.steps, "Number of iterates");
  DensityOptions orbit_density;
  add_density(orbit->add_subcommand("density", "Box-counting density"), orbit_density);
  HitOptions orbit_hit;
  add_hit(orbit->add_subcommand("hit", "Two-set hitting"), orbit_hit);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  g.config_path = config_path;
  if (*n_opt) g.n = n;
  if (*kappa_opt) g.kappa = kappa;
  if (*seed_opt) g.seed = seed;
  if (*out_opt) g.out_dir = out;
  if (*tasks_opt) g.tasks = tasks;
  if (*format_opt) g.format = format;

  try {
    RunConfig cfg = resolve_config(g);
    if (*params_validate) return cmd_params_validate(cfg);
    if (*verify) return cmd_verify(cfg, verify_opt);
    if (*exp_desc) return cmd_export_description(cfg);
    for (auto* sub : experiment->get_subcommands()) {
      std::string name = sub->get_name();
      if (name == "density") return cmd_density(cfg, exp_density, "experiment density");
      if (name == "hit") return cmd_hit(cfg, exp_hit, "experiment hit");
      if (name == "persist") return cmd_persist(cfg, exp_persist, "experiment persist");
      if (name == "minimality") return cmd_minimality(cfg, min_opt);
    }
    if (*crit_sample) return cmd_critical_sample(cfg, crit_opt);
    if (*crit_persist) return cmd_persist(cfg, crit_persist_opt, "critical persist");
    if (*orbit_run) return cmd_orbit_run(cfg, run_opt);
    for (auto* sub : orbit->get_subcommands()) {
      if (sub->get_name() == "density") return cmd_density(cfg, orbit_density, "orbit density");
      if (sub->get_name() == "hit") return cmd_hit(cfg, orbit_hit, "orbit hit");
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const toruslab::DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  }
  std::cerr << "no command\n";
  return kConfigError;
}
