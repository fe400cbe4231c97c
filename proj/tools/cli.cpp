#include "cli.hpp"

#include <fmt/format.h>

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "harrisflow/assignment.hpp"
#include "harrisflow/config.hpp"
#include "harrisflow/coupling.hpp"
#include "harrisflow/errors.hpp"
#include "harrisflow/flows.hpp"
#include "harrisflow/kernels.hpp"
#include "harrisflow/montecarlo.hpp"
#include "harrisflow/oracles/oracles.hpp"
#include "harrisflow/report.hpp"
#include "harrisflow/transport.hpp"

namespace hflow::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Flow section used by `simulate` and `couple`.
json default_flow_json() {
  return json{{"flow", "arratia"},
              {"kernel", {{"family", "box"}, {"d_gamma", 1e-2}}},
              {"points", {0.0}},
              {"dt", 1e-4},
              {"horizon", 1.0},
              {"seed", 1},
              {"epsilon", 0.0},
              {"bridge_correction", true},
              {"adaptive", true}};
}

std::vector<std::string> flow_keys() {
  return {"adaptive", "bridge_correction", "dt",     "epsilon", "flow", "horizon",
          "kernel.d_gamma", "kernel.family", "points", "seed"};
}

json::json_pointer pointer_of(std::string dotted) {
  std::replace(dotted.begin(), dotted.end(), '.', '/');
  return json::json_pointer("/" + dotted);
}

void require_flow_key(const std::string& key) {
  const auto keys = flow_keys();
  if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
    throw ConfigError(fmt::format("unknown config key '{}' (valid keys: {})", key, fmt::join(keys, ", ")));
  }
}

void merge_flow(json& target, const json& source, const std::string& prefix = "") {
  if (!source.is_object()) throw ConfigError("flow config must be a JSON object");
  for (const auto& [k, v] : source.items()) {
    const std::string key = prefix.empty() ? k : prefix + "." + k;
    if (v.is_object()) {
      merge_flow(target, v, key);
      continue;
    }
    require_flow_key(key);
    target[pointer_of(key)] = v;
  }
}

json parse_value(const std::string& text) {
  json v = json::parse(text, nullptr, false);
  return v.is_discarded() ? json(text) : v;
}

void override_flow(json& target, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError(fmt::format("override '{}' is not of the form key=value", assignment));
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  require_flow_key(key);
  if (key == "points" && (text.empty() || text.front() != '[')) {
    json list = json::array();
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) list.push_back(parse_value(item));
    target["points"] = list;
  } else if (target[pointer_of(key)].is_string()) {
    target[pointer_of(key)] = text;
  } else {
    target[pointer_of(key)] = parse_value(text);
  }
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open '{}'", path));
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError(fmt::format("'{}' is not valid JSON", path));
  return j;
}

std::string hash_text(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

struct FlowRequest {
  json config;
  FlowKind kind = FlowKind::arratia;
  std::vector<double> points;
  SimulationOptions sim;
  KernelSpec kernel;
  double epsilon = 0.0;
  bool bridge_correction = true;
  bool adaptive = true;
};

FlowRequest flow_request(const json& j) {
  FlowRequest r;
  r.config = j;
  try {
    r.kind = flow_kind_from_string(j.at("flow").get<std::string>());
    r.points = j.at("points").get<std::vector<double>>();
    r.sim.dt = j.at("dt").get<double>();
    r.sim.horizon = j.at("horizon").get<double>();
    r.sim.seed = j.at("seed").get<std::uint64_t>();
    r.kernel.family = j.at("kernel").at("family").get<std::string>();
    r.kernel.d_gamma = j.at("kernel").at("d_gamma").get<double>();
    r.epsilon = j.at("epsilon").get<double>();
    r.bridge_correction = j.at("bridge_correction").get<bool>();
    r.adaptive = j.at("adaptive").get<bool>();
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("flow config: {}", e.what()));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (r.points.empty()) throw ConfigError("points must be non-empty");
  if (!std::is_sorted(r.points.begin(), r.points.end())) throw ConfigError("points must be sorted");
  try {
    grid_steps(r.sim.dt, r.sim.horizon);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return r;
}

FlowPath simulate_request(const FlowRequest& r) {
  switch (r.kind) {
    case FlowKind::harris: {
      HarrisOptions h;
      h.adaptive = r.adaptive;
      return simulate_harris(make_kernel(r.kernel), r.points, r.sim, h);
    }
    case FlowKind::arratia:
      return simulate_arratia(r.points, r.sim, r.bridge_correction);
    case FlowKind::glued:
      return simulate_glued({r.epsilon > 0.0 ? r.epsilon : 0.5 * r.kernel.d_gamma}, r.points, r.sim);
    case FlowKind::identity:
      return simulate_identity(r.points, r.sim);
  }
  throw std::logic_error("unreachable");
}

fs::path prepare_dir(const std::string& dir) {
  fs::path p(dir);
  fs::create_directories(p);
  return p;
}

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", file.string()));
  out << text;
}

json provenance(const json& config, std::uint64_t seed) {
  return json{{"schema_version", report_schema_version},
              {"version", version_string()},
              {"config", config},
              {"config_hash", hash_text(config.dump())},
              {"master_seed", seed}};
}

DiscreteMeasure measure_from(const json& j) {
  try {
    return DiscreteMeasure(j.at("atoms").get<std::vector<double>>(), j.at("weights").get<std::vector<double>>());
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("measure must be {{\"atoms\": [...], \"weights\": [...]}}: {}", e.what()));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

MeasureEnsemble ensemble_from(const json& j, const std::string& tag) {
  MeasureEnsemble e;
  e.provenance = tag;
  if (j.is_array()) {
    for (const auto& m : j) e.samples.push_back(measure_from(m));
  } else {
    e.samples.push_back(measure_from(j));
  }
  if (e.samples.empty()) throw ConfigError("empty ensemble");
  return e;
}

// Brute-force oracle suite: quick versions of the exactness checks.
int selftest(std::ostream& out) {
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  bool ok = true;
  auto line = [&](const std::string& name, bool pass, const std::string& detail) {
    out << fmt::format("{} {} ({})\n", pass ? "PASS" : "FAIL", name, detail);
    ok = ok && pass;
  };

  double worst_w1 = 0.0;
  for (int t = 0; t < 200; ++t) {
    auto draw = [&] {
      const int k = 1 + static_cast<int>(unif(rng) * 5.0);
      std::vector<double> x(k), w(k);
      double s = 0.0;
      for (int i = 0; i < k; ++i) {
        x[i] = unif(rng) * 2.0 - 1.0;
        w[i] = unif(rng) + 0.05;
        s += w[i];
      }
      for (double& v : w) v /= s;
      return std::pair{x, w};
    };
    auto [xa, wa] = draw();
    auto [xb, wb] = draw();
    const double fast = w1_real(DiscreteMeasure(xa, wa), DiscreteMeasure(xb, wb));
    worst_w1 = std::max(worst_w1, std::abs(fast - oracle::lp_w1(xa, wa, xb, wb)));
  }
  line("w1_real vs LP", worst_w1 < 1e-10, fmt::format("max error {:.3g}", worst_w1));

  int mismatches = 0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + t % 6;
    CostMatrix c(n, n);
    std::vector<std::vector<double>> dense(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) dense[i][j] = c(i, j) = std::floor(unif(rng) * 5.0);
    }
    const auto fast = assignment_solve(c);
    const auto slow = oracle::brute_force_assignment(dense);
    if (std::abs(fast.total_cost - slow.cost) > 1e-9 || fast.column_of_row != slow.permutation) ++mismatches;
  }
  line("assignment vs brute force", mismatches == 0, fmt::format("{} mismatches", mismatches));

  const double w = 0.01;
  const auto gamma = gamma_from_phi(SmoothingKernel::box(w));
  double worst_k = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const double z = -1.2 * w + 2.4 * w * i / 1000.0;
    worst_k = std::max(worst_k, std::abs(gamma(z) - oracle::box_self_convolution(z, w)));
  }
  line("box convolution vs closed form", worst_k < 1e-8, fmt::format("max error {:.3g}", worst_k));

  const double p = oracle::meeting_probability(1.0, 1.0);
  line("meeting probability", std::abs(p - 0.4795) < 1e-4, fmt::format("{:.6f}", p));
  return ok ? exit_pass : exit_fail;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Harris flow / Arratia flow simulation laboratory", "harrisflow"};
  app.require_subcommand(1);
  unsigned threads = 0;
  int verbosity = 0;
  app.add_option("--threads", threads, "worker threads (0 = hardware concurrency)");
  app.add_flag("-v,--verbose", verbosity, "more output");
  app.set_version_flag("--version", version_string());

  std::string config_path, out_dir = ".", path_csv, a_path, b_path, name;
  std::vector<std::string> overrides;
  bool full_path = false, debug = false;
  double epsilon = 0.0;

  auto* sim = app.add_subcommand("simulate", "simulate one flow path");
  sim->add_option("-c,--config", config_path, "flow config JSON")->required();
  sim->add_option("-o,--out", out_dir, "output directory");
  sim->add_flag("--full-path", full_path, "write every grid time");
  sim->add_option("overrides", overrides, "key=value overrides");

  auto* couple = app.add_subcommand("couple", "apply the epsilon-gluing transform to a path");
  couple->add_option("-c,--config", config_path, "flow config JSON (simulated inline)");
  couple->add_option("--path", path_csv, "full-path CSV written by simulate --full-path");
  couple->add_option("--epsilon", epsilon, "gluing distance (overrides the config)");
  couple->add_option("-o,--out", out_dir, "output directory");
  couple->add_flag("--debug", debug, "also write every stage path as CSV");
  couple->add_option("overrides", overrides, "key=value overrides");

  auto* wass = app.add_subcommand("wasserstein", "W1 between two measures or two ensembles");
  wass->add_option("a", a_path, "measure or ensemble JSON")->required();
  wass->add_option("b", b_path, "measure or ensemble JSON")->required();
  wass->add_option("-o,--out", out_dir, "output directory");

  auto* exp = app.add_subcommand("experiment", "run a named experiment");
  exp->add_option("-c,--config", config_path, "experiment config JSON");
  exp->add_option("-n,--name", name, "experiment id")
      ->check(CLI::IsMember(experiment_ids()));
  exp->add_option("-o,--out", out_dir, "output directory");
  exp->add_option("overrides", overrides, "key=value overrides");

  auto* self = app.add_subcommand("selftest", "run the brute-force oracle suite");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();  // program name
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_pass : exit_usage;
  }

  try {
    if (sim->parsed()) {
      json cfg = default_flow_json();
      merge_flow(cfg, read_json_file(config_path));
      for (const auto& o : overrides) override_flow(cfg, o);
      const FlowRequest req = flow_request(cfg);
      FlowRequest run_req = req;
      run_req.sim.record_full_path = full_path;
      const FlowPath path = simulate_request(run_req);
      const fs::path dir = prepare_dir(out_dir);
      std::ostringstream csv;
      write_csv(csv, path, full_path);
      write_text(dir / "path.csv", csv.str());
      json meta = provenance(cfg, req.sim.seed);
      meta["flow_kind"] = to_string(path.kind);
      meta["particles"] = path.particles();
      meta["steps"] = path.steps;
      meta["full_path"] = full_path;
      write_text(dir / "path.json", meta.dump(2) + "\n");
      if (verbosity > 0) out << fmt::format("wrote {}\n", (dir / "path.csv").string());
      return exit_pass;
    }

    if (couple->parsed()) {
      FlowPath path;
      json cfg;
      if (!path_csv.empty()) {
        std::ifstream in(path_csv);
        if (!in) throw ConfigError(fmt::format("cannot open '{}'", path_csv));
        try {
          path = read_csv(in);
        } catch (const std::invalid_argument& e) {
          throw ConfigError(e.what());
        }
        cfg = json{{"path", path_csv}, {"epsilon", epsilon}};
      } else {
        if (config_path.empty()) throw ConfigError("couple needs --config or --path");
        cfg = default_flow_json();
        merge_flow(cfg, read_json_file(config_path));
        for (const auto& o : overrides) override_flow(cfg, o);
        if (epsilon > 0.0) cfg["epsilon"] = epsilon;
        FlowRequest req = flow_request(cfg);
        req.sim.record_full_path = true;
        epsilon = req.epsilon;
        path = simulate_request(req);
      }
      if (!(epsilon > 0.0)) throw ConfigError("couple needs epsilon > 0");
      const CouplingTrace trace = build_coupling(path, epsilon);
      const fs::path dir = prepare_dir(out_dir);
      json doc = provenance(cfg, path.seed);
      doc["coupling"] = coupling_summary_json(trace);
      write_text(dir / "coupling.json", doc.dump(2) + "\n");
      if (debug) {
        for (std::size_t i = 1; i <= trace.stage_count(); ++i) {
          FlowPath stage = path;
          const auto z = trace.stage(i);
          stage.positions.assign(z.begin(), z.end());
          std::ostringstream csv;
          write_csv(csv, stage, true);
          write_text(dir / fmt::format("stage_{}.csv", i), csv.str());
        }
      }
      out << doc["coupling"].dump() << "\n";
      return exit_pass;
    }

    if (wass->parsed()) {
      const auto a = ensemble_from(read_json_file(a_path), "a");
      const auto b = ensemble_from(read_json_file(b_path), "b");
      json doc{{"schema_version", report_schema_version}, {"version", version_string()}};
      if (a.samples.size() == 1 && b.samples.size() == 1) {
        const double v = w1_real(a.samples[0], b.samples[0]);
        doc["w1"] = v;
        out << format_real(v) << "\n";
      } else {
        const auto d = w1_ensembles(a, b);
        doc["w1"] = d.value;
        doc["se"] = d.se;
        out << format_real(d.value) << "\n";
      }
      const fs::path dir = prepare_dir(out_dir);
      write_text(dir / "wasserstein.json", doc.dump(2) + "\n");
      return exit_pass;
    }

    if (exp->parsed()) {
      ExperimentConfig cfg;
      if (!config_path.empty()) {
        json j = read_json_file(config_path);
        if (!name.empty()) j["experiment"] = name;
        cfg = config_from_json(j);
      } else {
        cfg = default_config(name.empty() ? "theorem2" : name);
      }
      for (const auto& o : overrides) apply_override(cfg, o);
      RunOptions opts;
      opts.threads = threads;
      const ExperimentReport report = run_experiment(cfg, opts);
      const fs::path dir = prepare_dir(out_dir);
      write_text(dir / (cfg.experiment + ".csv"), report_csv(report));
      write_text(dir / (cfg.experiment + ".json"), report_json_text(report));
      for (const auto& fit : report.fits) {
        for (const auto& row : fit.rows) {
          out << fmt::format("{:<5} {} {}={} estimate={:.6g} se={:.3g} bound={:.6g}{}\n", to_string(row.verdict),
                             fit.name, fit.parameter_name, row.parameter, row.estimate.mean, row.estimate.se,
                             row.bound, fit.asserted ? "" : " (informational)");
        }
      }
      for (const auto& c : report.checks) out << fmt::format("{:<5} {} {}\n", to_string(c.verdict), c.name, c.detail);
      const Verdict v = report.overall();
      out << fmt::format("overall {} (config {})\n", to_string(v), config_hash(cfg));
      return v == Verdict::fail ? exit_fail : exit_pass;
    }

    if (self->parsed()) return selftest(out);
  } catch (const HypothesisError& e) {
    err << "hypothesis violated: " << e.what() << "\n";
    return exit_hypothesis;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return exit_usage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_fail;
  }
  return exit_usage;
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  return run(std::vector<std::string>(argv, argv + argc), out, err);
}

}  // namespace hflow::cli
