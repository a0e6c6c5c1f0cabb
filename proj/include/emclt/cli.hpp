#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "emclt/experiments.hpp"
#include "emclt/presets.hpp"

namespace emclt::cli {

inline constexpr const char* kExperiments[] = {"strong-rate",  "quadrature",    "qx-stability",
                                               "clt-holder",   "clt-sobolev",   "zvonkin-sweep",
                                               "area-check"};

/// Schema violation; the message starts with the offending field path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct ExperimentConfig {
  std::string experiment;
  ModelChoice model;
  std::vector<std::size_t> ns;
  std::size_t refinement = 64;
  std::size_t n_paths = 10000;
  double p = 2.0;
  std::uint64_t seed = 1;
  std::string output = "out";

  // quadrature
  FunctionSpec g;
  FunctionSpec f;
  // qx-stability
  std::size_t qx_n = 1024;
  double delta0 = 0.0;
  std::size_t halvings = 3;
  double gamma = 0.0;
  // clt-*
  std::vector<double> times{0.25, 0.5, 1.0};
  std::size_t limit_n = 256;
  std::size_t limit_paths = 0;  // 0: same as n_paths
  double delta_scale = 1.0;
  double theta = 64.0;
  bool cross_check = true;
  std::size_t bootstrap = 200;
  std::size_t floor_splits = 20;
  // clt-sobolev and zvonkin-sweep
  std::vector<double> thetas;
  double half_width = 8.0;
  PdeResolution pde;
  // area-check
  std::size_t area_n = 8;
  std::vector<std::size_t> refinements{16, 64, 256};

  /// Acceptance thresholds for --check (resolved defaults merged with overrides).
  nlohmann::json check = nlohmann::json::object();
};

/// Validates a config document (or a manifest holding one under "config").
/// Throws ConfigError naming the field.
ExperimentConfig parse_config(const nlohmann::json& doc);

/// Fully resolved config: every default written out; parsing it back yields
/// the same config.
nlohmann::json to_json(const ExperimentConfig& cfg);

ExperimentConfig load_config(const std::filesystem::path& path);

/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

/// Hash of the resolved config with the output directory left out.
std::string config_hash(const ExperimentConfig& cfg);

struct RunOptions {
  bool check = false;
  std::optional<std::size_t> threads;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
};

struct RunResult {
  std::string csv;
  nlohmann::json summary;
  bool passed = true;  // all acceptance checks hold
};

/// Executes the experiment in memory.
RunResult execute(const ExperimentConfig& cfg, std::size_t threads);

/// run(config): writes results.csv, summary.json and manifest.json to the
/// output directory. Returns 0 on success, 2 when `check` is set and a
/// threshold is violated, 1 on any error (partial outputs are removed).
int run(const std::filesystem::path& config_path, const RunOptions& options, std::ostream& out,
        std::ostream& err);

/// Version string baked in at build time.
std::string code_version();

}  // namespace emclt::cli
