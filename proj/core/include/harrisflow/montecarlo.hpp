#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "harrisflow/config.hpp"
#include "harrisflow/flows.hpp"
#include "harrisflow/stats.hpp"
#include "harrisflow/transport.hpp"

namespace hflow {

// One parameter value of a series: estimate, its bound and the verdict.
struct RateRow {
  double parameter = 0.0;
  Estimate estimate;
  double bound = 0.0;
  Verdict verdict = Verdict::pass;
};

// A series of estimates over a parameter grid (n, gap, epsilon, d_gamma, ...)
// with a least-squares fit of log(estimate) against log(parameter) when at
// least two rows have positive estimates.
struct RateFit {
  std::string name;
  std::string parameter_name;
  std::vector<RateRow> rows;
  bool has_fit = false;
  LineFit loglog;
  // When false the rows are informational: no bound is asserted.
  bool asserted = true;
};

// A pass/fail check that is not a bound on an estimate (KS tests, ...).
struct Check {
  std::string name;
  std::string detail;
  Verdict verdict = Verdict::pass;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<RateFit> fits;
  std::vector<Check> checks;
  // Free-form scalar diagnostics (exponents, n0, bias floors).
  std::map<std::string, double> info;

  Verdict overall() const;
};

struct RunOptions {
  unsigned threads = 0;  // 0 = hardware concurrency
};

// Fills has_fit / loglog from the rows.
void fit_loglog(RateFit& fit);

// Constants of the bounds.
double lemma1_constant(double t);  // 128 t^{3/2} / (3 sqrt(2 pi))
double theorem2_constant();        // sqrt(64 / (3 sqrt(2 pi)) + 1/4)
double theorem3_bound(std::size_t n, double d_gamma);  // sqrt2 n^5 / 3 * sqrt(d_gamma)
double theorem1_constant();        // 2K (10^{1/11} + (512/25)^{5/11})
std::size_t optimal_n(double d_gamma);  // floor(1 / (10 sqrt d)^{2/11}) + 1

// Initial measure of the config.
DiscreteMeasure initial_discrete(const MuSpec& mu);
// Proxy for mu used as the "exact" side: the measure itself when discrete,
// otherwise the uniform measure on n_fine quantile midpoints.
DiscreteMeasure fine_proxy(const MuSpec& mu, std::size_t n_fine);
// mu^n.
DiscreteMeasure discretize_spec(const MuSpec& mu, std::size_t n);

// A flow kind together with everything needed to simulate it; the kernel
// is built once and shared by all replicas.
struct FlowSetup {
  FlowKind kind = FlowKind::arratia;
  CovarianceKernel kernel = CovarianceKernel::indicator();
  double glue_epsilon = 0.0;
  HarrisOptions harris;
  bool bridge_correction = true;

  FlowPath simulate(std::span<const double> points, const SimulationOptions& sim) const;
};

// Harris flows use make_kernel({kernel.family, d_gamma}); glued flows glue
// at d_gamma / 2.
FlowSetup make_flow_setup(const std::string& kind, const KernelSpec& kernel,
                          const ExperimentConfig& config);

ExperimentReport run_lemma1(const ExperimentConfig& config, const RunOptions& options = {});
ExperimentReport run_theorem2(const ExperimentConfig& config, const RunOptions& options = {});
ExperimentReport run_lemma3(const ExperimentConfig& config, const RunOptions& options = {});
ExperimentReport run_theorem3_bridge(const ExperimentConfig& config, const RunOptions& options = {});
ExperimentReport run_theorem1_chain(const ExperimentConfig& config, const RunOptions& options = {});
ExperimentReport run_wald_hitting(const ExperimentConfig& config, const RunOptions& options = {});

// Dispatch on config.experiment.
ExperimentReport run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

}  // namespace hflow
