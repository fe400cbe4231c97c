#include "harrisflow/config.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "harrisflow/flows.hpp"

namespace hflow {

using nlohmann::json;

const std::vector<std::string>& experiment_ids() {
  static const std::vector<std::string> ids{"lemma1",         "theorem2",       "lemma3",
                                            "theorem3-bridge", "theorem1-chain", "wald-hitting"};
  return ids;
}

ExperimentConfig default_config(const std::string& experiment) {
  const auto& ids = experiment_ids();
  if (std::find(ids.begin(), ids.end(), experiment) == ids.end()) {
    throw ConfigError(fmt::format("unknown experiment '{}' (valid: {})", experiment, fmt::join(ids, ", ")));
  }
  ExperimentConfig c;
  c.experiment = experiment;
  if (experiment == "lemma1") {
    c.replicas = 2000;
  } else if (experiment == "theorem2") {
    c.replicas = 200;
  } else if (experiment == "lemma3") {
    c.replicas = 500;
    c.n = 4;
  } else if (experiment == "theorem3-bridge") {
    c.flow = "harris";
    c.n = 2;
    c.kernel.d_gamma = 1e-4;
    c.replicas = 10000;
  } else if (experiment == "theorem1-chain") {
    c.flow = "harris";
    c.replicas = 256;
  } else if (experiment == "wald-hitting") {
    c.replicas = 10000;
  }
  return c;
}

json to_json(const ExperimentConfig& c) {
  return json{
      {"experiment", c.experiment},
      {"flow", c.flow},
      {"reference_flow", c.reference_flow},
      {"kernel", {{"family", c.kernel.family}, {"d_gamma", c.kernel.d_gamma}}},
      {"reference_d_gamma", c.reference_d_gamma},
      {"n", c.n},
      {"n_grid", c.n_grid},
      {"n_fine", c.n_fine},
      {"gaps", c.gaps},
      {"epsilons", c.epsilons},
      {"d_gamma_grid", c.d_gamma_grid},
      {"levels", c.levels},
      {"flows", c.flows},
      {"dt", c.dt},
      {"horizon", c.horizon},
      {"hit_horizon", c.hit_horizon},
      {"replicas", c.replicas},
      {"ensemble_size", c.ensemble_size},
      {"seed", c.seed},
      {"mu", {{"kind", c.mu.kind}, {"atoms", c.mu.atoms}, {"weights", c.mu.weights}}},
      {"bridge_correction", c.bridge_correction},
      {"adaptive", c.adaptive},
  };
}

namespace {

void flatten(const json& j, const std::string& prefix, std::vector<std::pair<std::string, json>>& out) {
  for (const auto& [key, value] : j.items()) {
    const std::string name = prefix.empty() ? key : prefix + "." + key;
    if (value.is_object()) {
      flatten(value, name, out);
    } else {
      out.emplace_back(name, value);
    }
  }
}

json::json_pointer pointer_of(const std::string& dotted) {
  std::string p = "/" + dotted;
  std::replace(p.begin(), p.end(), '.', '/');
  return json::json_pointer(p);
}

void check_key(const std::string& key) {
  const auto& keys = config_keys();
  if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
    throw ConfigError(fmt::format("unknown config key '{}' (valid keys: {})", key, fmt::join(keys, ", ")));
  }
}

template <class T>
void read(const json& j, const char* key, T& out) {
  try {
    out = j.at(json::json_pointer(std::string("/") + key)).get<T>();
  } catch (const json::exception& e) {
    std::string dotted = key;
    std::replace(dotted.begin(), dotted.end(), '/', '.');
    throw ConfigError(fmt::format("config key '{}': {}", dotted, e.what()));
  }
}

ExperimentConfig parse_full(const json& j) {
  ExperimentConfig c;
  read(j, "experiment", c.experiment);
  read(j, "flow", c.flow);
  read(j, "reference_flow", c.reference_flow);
  read(j, "kernel/family", c.kernel.family);
  read(j, "kernel/d_gamma", c.kernel.d_gamma);
  read(j, "reference_d_gamma", c.reference_d_gamma);
  read(j, "n", c.n);
  read(j, "n_grid", c.n_grid);
  read(j, "n_fine", c.n_fine);
  read(j, "gaps", c.gaps);
  read(j, "epsilons", c.epsilons);
  read(j, "d_gamma_grid", c.d_gamma_grid);
  read(j, "levels", c.levels);
  read(j, "flows", c.flows);
  read(j, "dt", c.dt);
  read(j, "horizon", c.horizon);
  read(j, "hit_horizon", c.hit_horizon);
  read(j, "replicas", c.replicas);
  read(j, "ensemble_size", c.ensemble_size);
  read(j, "seed", c.seed);
  read(j, "mu/kind", c.mu.kind);
  read(j, "mu/atoms", c.mu.atoms);
  read(j, "mu/weights", c.mu.weights);
  read(j, "bridge_correction", c.bridge_correction);
  read(j, "adaptive", c.adaptive);
  return c;
}

json parse_scalar(const std::string& text) {
  json v = json::parse(text, nullptr, false);
  if (v.is_discarded()) return json(text);
  return v;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::pair<std::string, json>> flat;
    flatten(to_json(ExperimentConfig{}), "", flat);
    std::vector<std::string> out;
    for (const auto& kv : flat) out.push_back(kv.first);
    out.push_back("d_gamma");
    std::sort(out.begin(), out.end());
    return out;
  }();
  return keys;
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  std::string experiment = "theorem2";
  if (j.contains("experiment")) {
    if (!j["experiment"].is_string()) throw ConfigError("config key 'experiment' must be a string");
    experiment = j["experiment"].get<std::string>();
  }
  json full = to_json(default_config(experiment));
  std::vector<std::pair<std::string, json>> flat;
  flatten(j, "", flat);
  for (const auto& [key, value] : flat) {
    check_key(key);
    if (key == "d_gamma") {
      full["kernel"]["d_gamma"] = value;
      full["d_gamma_grid"] = json::array({value});
      continue;
    }
    full[pointer_of(key)] = value;
  }
  ExperimentConfig c = parse_full(full);
  validate(c);
  return c;
}

void apply_override(ExperimentConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError(fmt::format("override '{}' is not of the form key=value", assignment));
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  check_key(key);
  json full = to_json(config);
  if (key == "experiment") {
    // switching experiments restarts from that experiment's defaults
    json fresh = to_json(default_config(text));
    fresh["seed"] = full["seed"];
    full = fresh;
  }
  if (key == "d_gamma") {
    const json v = parse_scalar(text);
    full["kernel"]["d_gamma"] = v;
    full["d_gamma_grid"] = json::array({v});
    config = parse_full(full);
    validate(config);
    return;
  }
  const auto ptr = pointer_of(key);
  if (full[ptr].is_array()) {
    json list = json::array();
    if (!text.empty() && text.front() == '[') {
      list = parse_scalar(text);
    } else if (!text.empty()) {
      std::stringstream ss(text);
      std::string item;
      while (std::getline(ss, item, ',')) list.push_back(parse_scalar(item));
    }
    full[ptr] = list;
  } else if (full[ptr].is_string()) {
    full[ptr] = text;
  } else {
    full[ptr] = parse_scalar(text);
  }
  ExperimentConfig c = parse_full(full);
  validate(c);
  config = std::move(c);
}

std::string canonical_json(const ExperimentConfig& config) { return to_json(config).dump(); }

std::string config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical_json(config)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

void validate(const ExperimentConfig& c) {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  const auto& ids = experiment_ids();
  if (std::find(ids.begin(), ids.end(), c.experiment) == ids.end()) {
    fail(fmt::format("unknown experiment '{}' (valid: {})", c.experiment, fmt::join(ids, ", ")));
  }
  try {
    flow_kind_from_string(c.flow);
    flow_kind_from_string(c.reference_flow);
    for (const auto& f : c.flows) flow_kind_from_string(f);
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  const std::vector<std::string> families{"box", "bump", "triangle", "indicator"};
  if (std::find(families.begin(), families.end(), c.kernel.family) == families.end()) {
    fail(fmt::format("kernel.family '{}' is not one of box, bump, triangle, indicator", c.kernel.family));
  }
  if (!(c.kernel.d_gamma >= 0.0)) fail("kernel.d_gamma must be >= 0");
  if (!(c.reference_d_gamma >= 0.0)) fail("reference_d_gamma must be >= 0");
  if (!(c.dt > 0.0)) fail("dt must be positive");
  if (!(c.horizon > 0.0) || !(c.hit_horizon > 0.0)) fail("horizons must be positive");
  try {
    grid_steps(c.dt, c.horizon);
    grid_steps(c.dt, c.hit_horizon);
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  if (c.replicas == 0) fail("replicas must be positive");
  if (c.ensemble_size == 0) fail("ensemble_size must be positive");
  if (c.n == 0 || c.n_fine == 0) fail("n and n_fine must be positive");
  for (auto v : c.n_grid) {
    if (v == 0) fail("n_grid entries must be positive");
  }
  for (double g : c.gaps) {
    if (!(g >= 0.0)) fail("gaps must be >= 0");
  }
  for (double e : c.epsilons) {
    if (!(e > 0.0)) fail("epsilons must be positive");
  }
  for (double d : c.d_gamma_grid) {
    if (!(d > 0.0)) fail("d_gamma_grid entries must be positive");
  }
  for (double l : c.levels) {
    if (!(l <= 0.0)) fail("levels must be <= 0");
  }
  if (c.mu.kind != "uniform" && c.mu.kind != "dirac" && c.mu.kind != "custom") {
    fail(fmt::format("mu.kind '{}' is not one of uniform, dirac, custom", c.mu.kind));
  }
  if (c.mu.kind != "uniform" && c.mu.atoms.empty()) fail("mu.atoms must be non-empty for dirac/custom");
  if (!c.mu.weights.empty() && c.mu.weights.size() != c.mu.atoms.size()) {
    fail("mu.weights must match mu.atoms in length");
  }
}

}  // namespace hflow
