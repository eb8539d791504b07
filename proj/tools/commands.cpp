#include "commands.hpp"

#include "toruslab/cone_analysis.hpp"
#include "toruslab/perturbations.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace toruslab::cli {

namespace fs = std::filesystem;

nlohmann::json RunConfig::to_json() const {
  return {{"params", toruslab::to_json(params)},
          {"seed", seed},
          {"tasks", tasks},
          {"out", out_dir},
          {"format", format}};
}

RunConfig resolve_config(const GlobalFlags& flags) {
  nlohmann::json file = nlohmann::json::object();
  if (!flags.config_path.empty()) {
    std::ifstream in(flags.config_path);
    if (!in) throw ConfigError("cannot open config file " + flags.config_path);
    try {
      file = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!file.is_object()) throw ConfigError("config must be a JSON object");
  }
  RunConfig cfg;
  try {
    nlohmann::json pj = file.value("params", nlohmann::json::object());
    if (flags.n) pj["n"] = *flags.n;
    if (flags.kappa) pj["kappa"] = *flags.kappa;
    cfg.params = pj.empty() ? default_params() : params_from_json(pj);

    if (flags.seed) {
      cfg.seed = *flags.seed;
    } else if (file.contains("seed")) {
      cfg.seed = file.at("seed").get<std::uint64_t>();
    } else if (const char* env = std::getenv("TORUSLAB_SEED")) {
      try {
        std::size_t used = 0;
        cfg.seed = std::stoull(env, &used);
        if (used != std::string(env).size()) throw std::invalid_argument(env);
      } catch (const std::exception&) {
        throw ConfigError(std::string("TORUSLAB_SEED is not an unsigned integer: ") + env);
      }
    }
    cfg.tasks = flags.tasks.value_or(file.value("tasks", 0));
    cfg.out_dir = flags.out_dir.value_or(file.value("out", cfg.out_dir));
    cfg.format = flags.format.value_or(file.value("format", cfg.format));
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  if (cfg.format != "json" && cfg.format != "csv") throw ConfigError("format must be json or csv");
  if (cfg.tasks < 0) throw ConfigError("tasks must be >= 0");
  return cfg;
}

void require_valid(const RunConfig& cfg) {
  auto rep = validate_params(cfg.params);
  if (rep.ok()) return;
  std::string msg = "parameter validation failed:";
  for (const auto& c : rep.checks)
    if (!c.pass && !c.advisory) msg += " " + c.name + " (" + c.detail + ")";
  throw ConfigError(msg);
}

TorusMapPtr build_map(const RunConfig& cfg, const MapChoice& choice) {
  const auto& P = cfg.params;
  TorusMapPtr base;
  if (choice.name == "A") base = std::make_shared<LinearExpanding>(P.n);
  else if (choice.name == "fhat") base = std::make_shared<PiecewiseBlender>(P.n, P.eps(), build_ifs(P));
  else if (choice.name == "f") base = std::make_shared<BlenderMap>(P);
  else if (choice.name == "F") base = std::make_shared<SingularMap>(P);
  else throw ConfigError("unknown map '" + choice.name + "' (expected A, fhat, f or F)");
  if (choice.perturb < 0) throw ConfigError("perturbation size must be >= 0");
  if (choice.perturb == 0) return base;
  return apply_perturbation(base, make_perturbation(P.n, choice.perturb_seed, choice.perturb));
}

namespace {

std::string utc_timestamp() {
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

fs::path prepare(const RunConfig& cfg, const std::string& name) {
  fs::path dir(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + cfg.out_dir + ": " + ec.message());
  return dir / name;
}

}  // namespace

nlohmann::json write_report(const RunConfig& cfg, const std::string& name, const std::string& command,
                            const nlohmann::json& result, bool pass) {
  nlohmann::json j{{"command", command}, {"config", cfg.to_json()}, {"result", result}, {"pass", pass},
                   {"generated_at", utc_timestamp()}};
  std::ofstream(prepare(cfg, name + ".json")) << j.dump(2) << '\n';
  return j;
}

void write_text(const RunConfig& cfg, const std::string& name, const std::string& text) {
  std::ofstream(prepare(cfg, name)) << text;
}

int cmd_params_validate(const RunConfig& cfg) {
  auto rep = validate_params(cfg.params);
  for (const auto& c : rep.checks)
    std::cout << (c.pass ? "ok      " : (c.advisory ? "advisory" : "FAIL    ")) << "  " << c.name << "  margin "
              << c.margin << (c.detail.empty() ? "" : "  (" + c.detail + ")") << '\n';
  write_report(cfg, "params_validation", "params validate", rep.to_json(), rep.ok());
  std::cout << (rep.ok() ? "parameters valid\n" : "parameters INVALID\n");
  return rep.ok() ? kPass : kConfigError;
}

int cmd_export_description(const RunConfig& cfg) {
  require_valid(cfg);
  auto j = describe_construction(cfg.params);
  write_report(cfg, "map_description", "export map-description", j, true);
  std::cout << j.dump(2) << '\n';
  return kPass;
}

}  // namespace toruslab::cli
