#include <gtest/gtest.h>

#include <cmath>

#include "harrisflow/errors.hpp"
#include "harrisflow/montecarlo.hpp"
#include "harrisflow/oracles/oracles.hpp"
#include "harrisflow/report.hpp"

using namespace hflow;

namespace {

ExperimentConfig quick(const std::string& id) {
  ExperimentConfig c = default_config(id);
  c.dt = 1e-2;
  return c;
}

const RateRow& row_of(const ExperimentReport& r, const std::string& series, double parameter) {
  for (const auto& f : r.fits) {
    if (f.name != series) continue;
    for (const auto& row : f.rows) {
      if (row.parameter == parameter) return row;
    }
  }
  throw std::out_of_range(series);
}

}  // namespace

TEST(Constants, Values) {
  EXPECT_NEAR(theorem2_constant(), 2.95986, 1e-5);
  EXPECT_NEAR(lemma1_constant(1.0), 17.0215, 1e-4);
  EXPECT_NEAR(theorem1_constant(), 30.652, 1e-3);
  EXPECT_NEAR(theorem3_bound(2, 1e-4), 0.15085, 1e-5);
  for (double d : {9e-3, 1e-3, 1e-4, 1e-5}) EXPECT_EQ(optimal_n(d), 2u) << d;
  EXPECT_EQ(optimal_n(1e-12), 9u);
}

TEST(Measures, FineProxyAndDiscretization) {
  MuSpec uniform;
  EXPECT_EQ(fine_proxy(uniform, 8).size(), 8u);
  EXPECT_EQ(discretize_spec(uniform, 4), discretize(lebesgue_unit(), 4));
  MuSpec dirac{"dirac", {1.0}, {}};
  EXPECT_EQ(discretize_spec(dirac, 2).atoms()[0], 0.75);
  EXPECT_EQ(fine_proxy(dirac, 256), DiscreteMeasure::dirac(1.0));
}

TEST(DiscretizationRate, IdentityFlowSeesOnlyTheDiscretization) {
  ExperimentConfig c = quick("theorem2");
  c.flow = "identity";
  c.replicas = 3;
  c.n_fine = 4096;
  const ExperimentReport r = run_theorem2(c);
  for (std::size_t n : c.n_grid) {
    const RateRow& row = row_of(r, "identity", static_cast<double>(n));
    EXPECT_NEAR(row.estimate.mean, 0.25 / n, 0.25 / 4096 + 1e-12);
    EXPECT_EQ(row.estimate.se, 0.0);
    EXPECT_EQ(row.verdict, Verdict::pass);
  }
}

TEST(DiscretizationRate, MatchingPointSetsGiveZero) {
  ExperimentConfig c = quick("theorem2");
  c.mu = {"custom", midpoints(8), {}};
  c.n_grid = {8};
  c.replicas = 20;
  const ExperimentReport r = run_theorem2(c);
  EXPECT_EQ(row_of(r, "arratia", 8).estimate.mean, 0.0);
}

TEST(DiscretizationRate, RejectsTooCoarseProxy) {
  ExperimentConfig c = quick("theorem2");
  c.n_fine = 16;
  EXPECT_THROW(run_theorem2(c), ConfigError);
}

TEST(GapSecondMoment, ZeroGapStaysZero) {
  ExperimentConfig c = quick("lemma1");
  c.gaps = {0.0};
  c.replicas = 50;
  c.kernel.d_gamma = 0.02;
  const ExperimentReport r = run_lemma1(c);
  EXPECT_EQ(row_of(r, "arratia", 0.0).estimate.mean, 0.0);
  EXPECT_EQ(row_of(r, "harris", 0.0).estimate.mean, 0.0);
}

TEST(GapSecondMoment, ArratiaMatchesAbsorbedMoment) {
  ExperimentConfig c = default_config("lemma1");
  c.dt = 1e-3;
  c.flows = {"arratia"};
  c.gaps = {0.5};
  c.replicas = 4000;
  const ExperimentReport r = run_lemma1(c);
  const RateRow& row = row_of(r, "arratia", 0.5);
  EXPECT_NEAR(row.estimate.mean, oracle::absorbed_second_moment(0.5, 1.0, 2.0), 4.0 * row.estimate.se);
  EXPECT_EQ(row.verdict, Verdict::pass);
}

TEST(GapSecondMoment, FarApartHarrisPairIsIndependent) {
  ExperimentConfig c = default_config("lemma1");
  c.dt = 1e-3;
  c.horizon = 0.01;
  c.flows = {"harris"};
  c.gaps = {1.0};
  c.kernel.d_gamma = 0.02;
  c.replicas = 4000;
  const ExperimentReport r = run_lemma1(c);
  const RateRow& row = row_of(r, "harris", 1.0);
  EXPECT_NEAR(row.estimate.mean, 1.0 + 2.0 * 0.01, 4.0 * row.estimate.se);
}

TEST(GluingStages, HypothesesAreChecked) {
  ExperimentConfig c = quick("lemma3");
  c.flow = "harris";
  c.kernel.d_gamma = 0.01;
  c.epsilons = {1e-3};
  EXPECT_THROW(run_lemma3(c), HypothesisError);
  c.flow = "arratia";
  c.epsilons = {0.3};
  EXPECT_THROW(run_lemma3(c), HypothesisError);
}

TEST(GluingStages, SmallRunPasses) {
  ExperimentConfig c = quick("lemma3");
  c.replicas = 100;
  const ExperimentReport r = run_lemma3(c);
  ASSERT_EQ(r.fits.size(), 2u);
  EXPECT_EQ(r.fits[0].rows.size(), 3u);
  EXPECT_EQ(r.overall(), Verdict::pass);
}

TEST(Bridge, HypothesisAndSelfDistance) {
  ExperimentConfig c = quick("theorem3-bridge");
  c.kernel.d_gamma = 1.2;
  EXPECT_THROW(run_theorem3_bridge(c), HypothesisError);
  c = quick("theorem3-bridge");
  c.replicas = 400;
  c.ensemble_size = 64;
  const ExperimentReport r = run_theorem3_bridge(c);
  EXPECT_EQ(r.checks.size(), 2u);
  EXPECT_LE(row_of(r, "w1_discrete_laws", 2).estimate.mean, theorem3_bound(2, 1e-4));
}

TEST(Chain, RejectsWideKernel) {
  ExperimentConfig c = quick("theorem1-chain");
  c.d_gamma_grid = {0.02};
  EXPECT_THROW(run_theorem1_chain(c), HypothesisError);
}

TEST(Chain, FirstTermMatchesTheRateRunAtN0) {
  ExperimentConfig c = quick("theorem1-chain");
  c.d_gamma_grid = {1e-3};
  c.replicas = 12;
  c.ensemble_size = 12;
  const ExperimentReport chain = run_theorem1_chain(c);

  ExperimentConfig t2 = quick("theorem2");
  t2.flow = "harris";
  t2.kernel.d_gamma = 1e-3;
  t2.n_grid = {optimal_n(1e-3)};
  t2.replicas = 12;
  t2.seed = c.seed;
  const ExperimentReport direct = run_theorem2(t2);
  const double n0 = static_cast<double>(optimal_n(1e-3));
  EXPECT_EQ(row_of(chain, "flow_discretization", 1e-3).estimate.mean, row_of(direct, "harris", n0).estimate.mean);
}

TEST(Chain, SelfChainHasNoMiddleTerm) {
  ExperimentConfig c = quick("theorem1-chain");
  c.flow = "arratia";
  c.d_gamma_grid = {1e-3};
  c.replicas = 12;
  const ExperimentReport r = run_theorem1_chain(c);
  EXPECT_EQ(row_of(r, "discrete_laws", 1e-3).estimate.mean, 0.0);
  EXPECT_EQ(row_of(r, "flow_discretization", 1e-3).estimate.mean,
            row_of(r, "reference_discretization", 1e-3).estimate.mean);
}

TEST(StoppedHitting, NeedsEnoughReplicas) {
  ExperimentConfig c = quick("wald-hitting");
  c.replicas = 999;
  EXPECT_THROW(run_wald_hitting(c), ConfigError);
}

TEST(Reports, ReproducibleAcrossRunsAndThreadCounts) {
  ExperimentConfig c = quick("lemma3");
  c.replicas = 40;
  const std::string a = report_json_text(run_experiment(c, {1}));
  const std::string b = report_json_text(run_experiment(c, {1}));
  const std::string d = report_json_text(run_experiment(c, {3}));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, d);
  c.seed += 1;
  EXPECT_NE(a, report_json_text(run_experiment(c, {1})));
}
