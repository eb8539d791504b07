// Command implementations behind the toruslab CLI.
#pragma once

#include "toruslab/maps.hpp"
#include "toruslab/params.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace toruslab::cli {

enum ExitCode { kPass = 0, kFail = 1, kConfigError = 2 };

/// Raised for anything that should exit with kConfigError.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  ConstructionParams params;
  std::uint64_t seed = 0;
  int tasks = 0;
  std::string out_dir = "toruslab-reports";
  std::string format = "json";
  nlohmann::json to_json() const;
};

/// Flag values as parsed; unset optionals fall back to the config file, then defaults.
struct GlobalFlags {
  std::string config_path;
  std::optional<int> n;
  std::optional<double> kappa;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<int> tasks;
  std::optional<std::string> format;
};

/// Merges config file, flags and TORUSLAB_SEED. Throws ConfigError.
RunConfig resolve_config(const GlobalFlags& flags);

/// Throws ConfigError when the parameters fail validation.
void require_valid(const RunConfig& cfg);

/// Map selection shared by orbit and experiment commands.
struct MapChoice {
  std::string name = "F";  // A | fhat | f | F
  double perturb = 0;      // certified C^1 size of an added random field
  std::uint64_t perturb_seed = 0;
};
TorusMapPtr build_map(const RunConfig& cfg, const MapChoice& choice);

/// Writes {command, config, result, pass, generated_at} to out_dir/name.json and returns it.
nlohmann::json write_report(const RunConfig& cfg, const std::string& name, const std::string& command,
                            const nlohmann::json& result, bool pass);
/// Writes raw text to out_dir/name.
void write_text(const RunConfig& cfg, const std::string& name, const std::string& text);

int cmd_params_validate(const RunConfig& cfg);
int cmd_export_description(const RunConfig& cfg);

struct VerifyOptions {
  std::vector<std::string> suites;  // empty = all
  long points = 10000;
  int vectors = 10;
};
const std::vector<std::string>& verify_suite_names();
int cmd_verify(const RunConfig& cfg, const VerifyOptions& opt);

struct DensityOptions {
  MapChoice map;
  long steps = 0;  // 0 = 10^7 at n = 2, 10^6 otherwise
  int grid = 0;    // 0 = 100 at n = 2, 32 otherwise
  int count = 5;
  double threshold = 0.95;
  int required = 4;
  std::vector<double> x0;  // single orbit from x0 when given
};
int cmd_density(const RunConfig& cfg, const DensityOptions& opt, const std::string& command);

struct HitOptions {
  MapChoice map;
  int pairs = 5;
  double side = 0.05;
  long max_iter = 10000;
  std::vector<double> u_lo, u_hi, v_lo, v_hi;  // explicit boxes override random pairs
};
int cmd_hit(const RunConfig& cfg, const HitOptions& opt, const std::string& command);

struct PersistOptions {
  int count = 200;
  double size = 0.5;
  bool adversarial = false;
};
int cmd_persist(const RunConfig& cfg, const PersistOptions& opt, const std::string& command);

struct MinimalityOptions {
  int arcs = 100;
  double min_length = 0.02;
  int max_steps = 200;
  std::optional<double> a0;
};
int cmd_minimality(const RunConfig& cfg, const MinimalityOptions& opt);

struct CriticalSampleOptions {
  std::vector<double> lo, hi;  // default: the supports of psi and phi' around p
  int resolution = 41;
  int segments = 20;
};
int cmd_critical_sample(const RunConfig& cfg, const CriticalSampleOptions& opt);

struct OrbitRunOptions {
  MapChoice map;
  std::vector<double> x0;
  long steps = 1000;
};
int cmd_orbit_run(const RunConfig& cfg, const OrbitRunOptions& opt);

}  // namespace toruslab::cli
