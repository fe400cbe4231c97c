#include "harrisflow/montecarlo.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "harrisflow/coupling.hpp"
#include "harrisflow/errors.hpp"
#include "harrisflow/parallel.hpp"
#include "harrisflow/random.hpp"

namespace hflow {

Verdict ExperimentReport::overall() const {
  Verdict v = Verdict::pass;
  for (const auto& fit : fits) {
    if (!fit.asserted) continue;
    for (const auto& row : fit.rows) v = worst(v, row.verdict);
  }
  for (const auto& c : checks) v = worst(v, c.verdict);
  return v;
}

void fit_loglog(RateFit& fit) {
  std::vector<double> x, y;
  for (const auto& row : fit.rows) {
    if (row.estimate.mean > 0.0 && row.parameter != 0.0) {
      x.push_back(std::log(std::abs(row.parameter)));
      y.push_back(std::log(row.estimate.mean));
    }
  }
  fit.has_fit = false;
  if (x.size() < 2) return;
  if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); })) return;
  fit.loglog = fit_line(x, y);
  fit.has_fit = true;
}

double lemma1_constant(double t) {
  return 128.0 * std::pow(t, 1.5) / (3.0 * std::sqrt(2.0 * std::numbers::pi));
}

double theorem2_constant() {
  return std::sqrt(64.0 / (3.0 * std::sqrt(2.0 * std::numbers::pi)) + 0.25);
}

double theorem3_bound(std::size_t n, double d_gamma) {
  return std::numbers::sqrt2 * std::pow(static_cast<double>(n), 5) / 3.0 * std::sqrt(d_gamma);
}

double theorem1_constant() {
  return 2.0 * theorem2_constant() * (std::pow(10.0, 1.0 / 11.0) + std::pow(512.0 / 25.0, 5.0 / 11.0));
}

std::size_t optimal_n(double d_gamma) {
  return static_cast<std::size_t>(std::floor(1.0 / std::pow(10.0 * std::sqrt(d_gamma), 2.0 / 11.0))) + 1;
}

DiscreteMeasure initial_discrete(const MuSpec& mu) {
  if (mu.kind == "dirac") return DiscreteMeasure::dirac(mu.atoms.at(0));
  if (mu.kind == "custom") {
    if (mu.weights.empty()) return DiscreteMeasure::uniform_on(mu.atoms);
    return DiscreteMeasure(mu.atoms, mu.weights);
  }
  throw std::invalid_argument("initial_discrete: mu '" + mu.kind + "' has no atoms");
}

DiscreteMeasure fine_proxy(const MuSpec& mu, std::size_t n_fine) {
  if (mu.kind == "uniform") {
    const auto pts = midpoints(n_fine);
    return DiscreteMeasure::uniform_on(pts);
  }
  return initial_discrete(mu);
}

DiscreteMeasure discretize_spec(const MuSpec& mu, std::size_t n) {
  if (mu.kind == "uniform") return discretize(lebesgue_unit(), n);
  return discretize(initial_discrete(mu), n);
}

FlowPath FlowSetup::simulate(std::span<const double> points, const SimulationOptions& sim) const {
  switch (kind) {
    case FlowKind::harris:
      return simulate_harris(kernel, points, sim, harris);
    case FlowKind::arratia:
      return simulate_arratia(points, sim, bridge_correction);
    case FlowKind::glued:
      return simulate_glued({glue_epsilon}, points, sim);
    case FlowKind::identity:
      return simulate_identity(points, sim);
  }
  throw std::logic_error("unreachable flow kind");
}

FlowSetup make_flow_setup(const std::string& kind, const KernelSpec& kernel,
                          const ExperimentConfig& config) {
  FlowSetup s;
  s.kind = flow_kind_from_string(kind);
  s.bridge_correction = config.bridge_correction;
  s.harris.adaptive = config.adaptive;
  if (s.kind == FlowKind::harris) {
    if (kernel.family == "indicator") {
      throw ConfigError("a harris flow needs a kernel with positive support (family indicator is the Arratia flow)");
    }
    if (!(kernel.d_gamma > 0.0)) throw ConfigError("a harris flow needs kernel.d_gamma > 0");
    s.kernel = make_kernel(kernel);
  }
  if (s.kind == FlowKind::glued) {
    if (!(kernel.d_gamma > 0.0)) throw ConfigError("a glued flow needs kernel.d_gamma > 0 (epsilon = d_gamma / 2)");
    s.glue_epsilon = 0.5 * kernel.d_gamma;
  }
  return s;
}

namespace {

SimulationOptions sim_options(const ExperimentConfig& c, std::uint64_t seed, bool full) {
  SimulationOptions o;
  o.dt = c.dt;
  o.horizon = c.horizon;
  o.seed = seed;
  o.record_full_path = full;
  return o;
}

RateRow bound_row(double parameter, const Estimate& e, double bound) {
  return {parameter, e, bound, check_upper_bound(e, bound)};
}

std::vector<double> sorted_union(const std::vector<DiscreteMeasure>& measures) {
  std::vector<double> pts;
  for (const auto& m : measures) pts.insert(pts.end(), m.atoms().begin(), m.atoms().end());
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

// One flow run from the union of the fine proxy's atoms and every mu^n's
// atoms; returns the pushforwards of the fine proxy and of each mu^n.
struct ReplicaMeasures {
  DiscreteMeasure fine;
  std::vector<DiscreteMeasure> coarse;
};

class DiscretizationSampler {
 public:
  DiscretizationSampler(const ExperimentConfig& c, std::span<const std::size_t> n_grid) : config_(c) {
    std::vector<DiscreteMeasure> all;
    fine_ = fine_proxy(c.mu, c.n_fine);
    all.push_back(fine_);
    for (std::size_t n : n_grid) {
      if (c.mu.kind == "uniform" && c.n_fine < 4 * n) {
        throw ConfigError(fmt::format("n_fine = {} is too coarse a proxy for n = {} (need n_fine >= 4n)", c.n_fine, n));
      }
      coarse_.push_back(discretize_spec(c.mu, n));
      all.push_back(coarse_.back());
    }
    points_ = sorted_union(all);
  }

  ReplicaMeasures sample(const FlowSetup& flow, std::uint64_t seed) const {
    const FlowPath path = flow.simulate(points_, sim_options(config_, seed, false));
    const auto end = path.final_positions();
    ReplicaMeasures out;
    out.fine = pushforward(fine_, points_, end);
    for (const auto& m : coarse_) out.coarse.push_back(pushforward(m, points_, end));
    return out;
  }

  const DiscreteMeasure& fine() const { return fine_; }
  const std::vector<DiscreteMeasure>& coarse() const { return coarse_; }

 private:
  const ExperimentConfig& config_;
  DiscreteMeasure fine_;
  std::vector<DiscreteMeasure> coarse_;
  std::vector<double> points_;
};

std::string short_number(double v) { return fmt::format("{:g}", v); }

}  // namespace

ExperimentReport run_lemma1(const ExperimentConfig& config, const RunOptions& options) {
  validate(config);
  ExperimentReport report;
  report.config = config;
  const double ct = lemma1_constant(config.horizon);
  report.info["C_t"] = ct;
  for (const auto& name : config.flows) {
    const FlowSetup flow = make_flow_setup(name, config.kernel, config);
    RateFit fit;
    fit.name = name;
    fit.parameter_name = "gap";
    for (double gap : config.gaps) {
      const std::vector<double> points{0.0, gap};
      std::vector<double> values(config.replicas);
      parallel_for(config.replicas, options.threads, [&](std::size_t r) {
        const FlowPath path = flow.simulate(points, sim_options(config, derive_seed(config.seed, streams::replica, r), false));
        const auto end = path.final_positions();
        const double diff = end[1] - end[0];
        values[r] = diff * diff;
      });
      fit.rows.push_back(bound_row(gap, estimate_mean(values), ct * gap + gap * gap));
    }
    report.fits.push_back(std::move(fit));
  }
  return report;
}

ExperimentReport run_theorem2(const ExperimentConfig& config, const RunOptions& options) {
  validate(config);
  ExperimentReport report;
  report.config = config;
  const double K = theorem2_constant();
  report.info["K"] = K;
  const FlowSetup flow = make_flow_setup(config.flow, config.kernel, config);
  const DiscretizationSampler sampler(config, config.n_grid);
  const std::size_t grid = config.n_grid.size();
  std::vector<std::vector<double>> values(grid, std::vector<double>(config.replicas));
  parallel_for(config.replicas, options.threads, [&](std::size_t r) {
    const auto rm = sampler.sample(flow, derive_seed(config.seed, streams::replica, r));
    for (std::size_t i = 0; i < grid; ++i) values[i][r] = w1_real(rm.fine, rm.coarse[i]);
  });
  RateFit fit;
  fit.name = config.flow;
  fit.parameter_name = "n";
  for (std::size_t i = 0; i < grid; ++i) {
    const double n = static_cast<double>(config.n_grid[i]);
    fit.rows.push_back(bound_row(n, estimate_mean(values[i]), K / std::sqrt(n)));
    report.info[fmt::format("proxy_floor_n{}", config.n_grid[i])] = w1_real(sampler.fine(), sampler.coarse()[i]);
  }
  fit_loglog(fit);
  report.fits.push_back(std::move(fit));
  return report;
}

ExperimentReport run_lemma3(const ExperimentConfig& config, const RunOptions& options) {
  validate(config);
  ExperimentReport report;
  report.config = config;
  const std::size_t n = config.n;
  if (n < 2) throw ConfigError("lemma3 needs n >= 2");
  const FlowSetup flow = make_flow_setup(config.flow, config.kernel, config);
  const std::vector<double> points = midpoints(n);
  for (double eps : config.epsilons) {
    if (flow.kind == FlowKind::harris && eps < 0.5 * config.kernel.d_gamma) {
      throw HypothesisError(fmt::format("epsilon = {:g} must be >= d(Gamma)/2 = {:g} when coupling a Harris flow",
                                        eps, 0.5 * config.kernel.d_gamma));
    }
    if (!(1.0 / static_cast<double>(n) > eps)) {
      throw HypothesisError(fmt::format("initial gaps 1/n = {:g} must exceed epsilon = {:g}", 1.0 / static_cast<double>(n), eps));
    }
    std::vector<std::vector<double>> values(n - 1, std::vector<double>(config.replicas));
    parallel_for(config.replicas, options.threads, [&](std::size_t r) {
      const FlowPath path = flow.simulate(points, sim_options(config, derive_seed(config.seed, streams::replica, r), true));
      const CouplingTrace trace = build_coupling(path, eps);
      for (std::size_t s = 0; s + 1 < n; ++s) {
        double sum = 0.0;
        for (double d : trace.stage_sup_discrepancy[s]) sum += d;
        values[s][r] = sum;
      }
    });
    RateFit fit;
    fit.name = "epsilon=" + short_number(eps);
    fit.parameter_name = "stage";
    for (std::size_t s = 0; s + 1 < n; ++s) {
      fit.rows.push_back(bound_row(static_cast<double>(s + 1), estimate_mean(values[s]), lemma3_bound(n, eps, s + 1)));
    }
    report.fits.push_back(std::move(fit));
  }
  return report;
}

namespace {

FlowSetup reference_setup(const ExperimentConfig& config) {
  if (config.reference_d_gamma > 0.0) {
    return make_flow_setup("harris", {config.kernel.family, config.reference_d_gamma}, config);
  }
  return make_flow_setup(config.reference_flow, config.kernel, config);
}

MeasureEnsemble ensemble_of(std::vector<DiscreteMeasure> samples, std::string tag) {
  return {std::move(samples), std::move(tag)};
}

Estimate as_estimate(const EnsembleDistance& d, std::size_t m) { return {d.value, d.se, m}; }

}  // namespace

ExperimentReport run_theorem3_bridge(const ExperimentConfig& config, const RunOptions& options) {
  validate(config);
  ExperimentReport report;
  report.config = config;
  const std::size_t n = config.n;
  const double d = config.kernel.d_gamma;
  if (n < 2) throw ConfigError("theorem3-bridge needs n >= 2");
  if (!(0.5 * d < 1.0 / static_cast<double>(n))) {
    throw HypothesisError(fmt::format("requires d(Gamma)/2 < 1/n: d(Gamma) = {:g}, n = {}", d, n));
  }
  const double eps = 0.5 * d;
  const FlowSetup flow = make_flow_setup(config.flow, config.kernel, config);
  const FlowSetup reference = reference_setup(config);
  const DiscreteMeasure mu_n = discretize_spec(config.mu, n);
  const std::vector<double> points(mu_n.atoms().begin(), mu_n.atoms().end());
  const std::size_t k_count = points.size();
  if (k_count < 2) throw ConfigError("theorem3-bridge needs mu^n with at least two atoms");
  const std::size_t R = config.replicas;
  const std::size_t m = std::min(config.ensemble_size, R);

  auto coupled_end = [&](const FlowPath& path) {
    if (eps == 0.0) {
      const auto e = path.final_positions();
      return std::vector<double>(e.begin(), e.end());
    }
    const CouplingTrace trace = build_coupling(path, eps);
    const auto e = trace.final_endpoints();
    return std::vector<double>(e.begin(), e.end());
  };

  std::vector<std::vector<double>> z_flow(k_count, std::vector<double>(R));
  std::vector<std::vector<double>> z_ref(k_count, std::vector<double>(R));
  std::vector<DiscreteMeasure> lam(m), lam0(m), lam0_indep(m);
  parallel_for(R, options.threads, [&](std::size_t r) {
    const std::uint64_t paired = derive_seed(config.seed, streams::replica, r);
    const std::uint64_t indep = derive_seed(config.seed, streams::independent, r);
    const FlowPath p = flow.simulate(points, sim_options(config, paired, true));
    const auto zf = coupled_end(p);
    const FlowPath q = reference.simulate(points, sim_options(config, indep, true));
    const auto zr = coupled_end(q);
    for (std::size_t k = 0; k < k_count; ++k) {
      z_flow[k][r] = zf[k];
      z_ref[k][r] = zr[k];
    }
    if (r < m) {
      lam[r] = pushforward(mu_n, points, p.final_positions());
      lam0_indep[r] = pushforward(mu_n, points, q.final_positions());
      const FlowPath q_paired = reference.simulate(points, sim_options(config, paired, false));
      lam0[r] = pushforward(mu_n, points, q_paired.final_positions());
    }
  });

  for (std::size_t k = 0; k < k_count; ++k) {
    const KsResult ks = ks_two_sample(z_flow[k], z_ref[k]);
    report.checks.push_back({fmt::format("ks_coordinate_{}", k + 1),
                             fmt::format("D = {:.6f}, p = {:.6f}, samples = {}", ks.statistic, ks.p_value, R),
                             ks.p_value >= 0.01 ? Verdict::pass : Verdict::fail});
  }
  const auto w = w1_ensembles(ensemble_of(lam, config.flow), ensemble_of(lam0, "reference"));
  RateFit fit;
  fit.name = "w1_discrete_laws";
  fit.parameter_name = "n";
  fit.rows.push_back(bound_row(static_cast<double>(n), as_estimate(w, m), theorem3_bound(n, d)));
  report.fits.push_back(std::move(fit));
  report.info["epsilon"] = eps;
  report.info["self_distance_floor"] =
      w1_ensembles(ensemble_of(lam0, "reference"), ensemble_of(lam0_indep, "reference")).value;
  return report;
}

ExperimentReport run_theorem1_chain(const ExperimentConfig& config, const RunOptions& options) {
  validate(config);
  ExperimentReport report;
  report.config = config;
  const double C = theorem1_constant();
  const bool two_harris = config.reference_d_gamma > 0.0;
  report.info["C"] = C;
  const std::size_t R = config.replicas;
  const std::size_t m = std::min(config.ensemble_size, R);

  RateFit chain{"chain", "d_gamma", {}, false, {}, true};
  RateFit first{"flow_discretization", "d_gamma", {}, false, {}, true};
  RateFit middle{"discrete_laws", "d_gamma", {}, false, {}, false};
  RateFit third{"reference_discretization", "d_gamma", {}, false, {}, true};
  RateFit direct{"direct", "d_gamma", {}, false, {}, false};

  for (double d : config.d_gamma_grid) {
    const double d_max = two_harris ? std::max(d, config.reference_d_gamma) : d;
    if (!(d_max < 0.01)) {
      throw HypothesisError(fmt::format("requires d(Gamma) < 1/100, got {:g}", d_max));
    }
    const std::size_t n0 = optimal_n(d);
    if (!(0.5 * d_max < 1.0 / static_cast<double>(n0))) {
      throw HypothesisError(fmt::format("requires d(Gamma)/2 < 1/n0: d(Gamma) = {:g}, n0 = {}", d_max, n0));
    }
    report.info[fmt::format("n0_d{}", short_number(d))] = static_cast<double>(n0);
    ExperimentConfig local = config;
    local.kernel.d_gamma = d;
    const FlowSetup flow = make_flow_setup(config.flow, local.kernel, local);
    const FlowSetup reference = reference_setup(local);
    const std::vector<std::size_t> grid{n0};
    const DiscretizationSampler sampler(local, grid);

    std::vector<double> t1(R), t3(R);
    std::vector<DiscreteMeasure> fine_a(m), fine_b(m), coarse_a(m), coarse_b(m);
    parallel_for(R, options.threads, [&](std::size_t r) {
      const std::uint64_t seed = derive_seed(config.seed, streams::replica, r);
      auto a = sampler.sample(flow, seed);
      auto b = sampler.sample(reference, seed);
      t1[r] = w1_real(a.fine, a.coarse[0]);
      t3[r] = w1_real(b.fine, b.coarse[0]);
      if (r < m) {
        fine_a[r] = std::move(a.fine);
        fine_b[r] = std::move(b.fine);
        coarse_a[r] = std::move(a.coarse[0]);
        coarse_b[r] = std::move(b.coarse[0]);
      }
    });
    const Estimate e1 = estimate_mean(t1);
    const Estimate e3 = estimate_mean(t3);
    const Estimate e2 = as_estimate(w1_ensembles(ensemble_of(coarse_a, config.flow), ensemble_of(coarse_b, "reference")), m);
    const Estimate ed = as_estimate(w1_ensembles(ensemble_of(fine_a, config.flow), ensemble_of(fine_b, "reference")), m);
    // the three terms share replicas; add standard errors (Minkowski bound)
    const Estimate total{e1.mean + e2.mean + e3.mean, e1.se + e2.se + e3.se, R};
    const double bound = (two_harris ? 2.0 : 1.0) * C * std::pow(d_max, 1.0 / 22.0);
    const double k_bound = theorem2_constant() / std::sqrt(static_cast<double>(n0));
    chain.rows.push_back(bound_row(d, total, bound));
    first.rows.push_back(bound_row(d, e1, k_bound));
    middle.rows.push_back(bound_row(d, e2, theorem3_bound(n0, d_max)));
    third.rows.push_back(bound_row(d, e3, k_bound));
    direct.rows.push_back(bound_row(d, ed, bound));
  }
  fit_loglog(direct);
  fit_loglog(chain);
  if (direct.has_fit) report.info["direct_exponent"] = direct.loglog.slope;
  report.info["bound_exponent"] = 1.0 / 22.0;
  report.fits = {chain, first, middle, third, direct};
  return report;
}

ExperimentReport run_wald_hitting(const ExperimentConfig& config, const RunOptions& options) {
  validate(config);
  if (config.replicas < 1000) throw ConfigError("wald-hitting needs replicas >= 1000");
  ExperimentReport report;
  report.config = config;
  RateFit fit;
  fit.name = "stopped_mean";
  fit.parameter_name = "level";
  for (double c : config.levels) {
    const HittingCheck h = hitting_time_bound_check(c, config.hit_horizon, config.replicas, config.seed,
                                                    config.dt, options.threads);
    fit.rows.push_back(bound_row(c, h.estimate, h.bound));
  }
  report.fits.push_back(std::move(fit));
  return report;
}

ExperimentReport run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  const std::string& id = config.experiment;
  if (id == "lemma1") return run_lemma1(config, options);
  if (id == "theorem2") return run_theorem2(config, options);
  if (id == "lemma3") return run_lemma3(config, options);
  if (id == "theorem3-bridge") return run_theorem3_bridge(config, options);
  if (id == "theorem1-chain") return run_theorem1_chain(config, options);
  if (id == "wald-hitting") return run_wald_hitting(config, options);
  throw ConfigError("unknown experiment '" + id + "'");
}

}  // namespace hflow
