#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "harrisflow/kernels.hpp"

namespace hflow {

// Malformed configuration: unknown key, wrong type, out-of-range value.
// The CLI maps this to exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// Initial measure on [0, 1].
//   uniform: Lebesgue measure
//   dirac:   unit mass at atoms[0]
//   custom:  atoms with weights (uniform weights when `weights` is empty)
struct MuSpec {
  std::string kind = "uniform";
  std::vector<double> atoms;
  std::vector<double> weights;
};

// One experiment run. Fields unused by a given experiment are ignored but
// still hashed, so reports identify the full configuration.
struct ExperimentConfig {
  std::string experiment = "theorem2";
  std::string flow = "arratia";            // harris | arratia | glued | identity
  std::string reference_flow = "arratia";  // second side of bridge/chain runs
  KernelSpec kernel;                        // Gamma of harris flows
  double reference_d_gamma = 0.0;          // > 0: reference side is a harris flow too
  std::size_t n = 4;
  std::vector<std::size_t> n_grid{2, 4, 8, 16};
  std::size_t n_fine = 256;
  std::vector<double> gaps{0.01, 0.1, 0.5, 1.0};
  std::vector<double> epsilons{1e-2, 1e-4};
  std::vector<double> d_gamma_grid{9e-3, 1e-3, 1e-4, 1e-5};
  std::vector<double> levels{-0.01, -0.05, -0.2};
  std::vector<std::string> flows{"arratia", "harris"};  // lemma1 flow kinds
  double dt = 1e-4;
  double horizon = 1.0;
  double hit_horizon = 4.0;
  std::size_t replicas = 200;
  std::size_t ensemble_size = 256;
  std::uint64_t seed = 20240601;
  MuSpec mu;
  bool bridge_correction = true;
  bool adaptive = true;
};

// Experiment ids accepted by run_experiment.
const std::vector<std::string>& experiment_ids();

// Defaults for a named experiment (replica counts, grids).
ExperimentConfig default_config(const std::string& experiment);

nlohmann::json to_json(const ExperimentConfig& config);
// Starts from default_config(json["experiment"]) and applies the given keys.
// Unknown keys raise ConfigError naming the valid keys.
ExperimentConfig config_from_json(const nlohmann::json& j);

// Dotted keys accepted by apply_override, e.g. "kernel.d_gamma", "n_grid".
// "d_gamma" is shorthand that sets kernel.d_gamma and d_gamma_grid = [value].
const std::vector<std::string>& config_keys();

// Applies one "key=value" override. Lists are comma separated; values are
// parsed as JSON when possible and as strings otherwise.
void apply_override(ExperimentConfig& config, const std::string& assignment);

// Canonical (sorted-key, compact) JSON text and its FNV-1a 64-bit hash as 16
// hex digits.
std::string canonical_json(const ExperimentConfig& config);
std::string config_hash(const ExperimentConfig& config);

// Throws ConfigError for values that make no sense (dt <= 0, empty grids, ...).
void validate(const ExperimentConfig& config);

}  // namespace hflow
