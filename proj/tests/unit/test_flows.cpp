#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "harrisflow/errors.hpp"
#include "harrisflow/flows.hpp"
#include "harrisflow/random.hpp"
#include "harrisflow/stats.hpp"

using namespace hflow;

namespace {

FlowPath run(FlowKind kind, std::span<const double> u, const SimulationOptions& o, double eps = 0.01) {
  switch (kind) {
    case FlowKind::harris: return simulate_harris(CovarianceKernel::triangle(0.02), u, o);
    case FlowKind::arratia: return simulate_arratia(u, o);
    case FlowKind::glued: return simulate_glued({eps}, u, o);
    case FlowKind::identity: return simulate_identity(u, o);
  }
  return {};
}

const std::vector<FlowKind> moving{FlowKind::harris, FlowKind::arratia, FlowKind::glued};

}  // namespace

TEST(Flows, GridSteps) {
  EXPECT_EQ(grid_steps(1e-4, 1.0), 10000u);
  EXPECT_EQ(grid_steps(0.1, 0.3), 3u);
  EXPECT_THROW(grid_steps(0.3, 1.0), std::invalid_argument);
}

TEST(Flows, StartAtInitialPointsAndStayOrdered) {
  const std::vector<double> u{0.0, 0.02, 0.05, 0.3, 0.31, 0.9};
  for (FlowKind kind : moving) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const FlowPath p = run(kind, u, {1e-3, 0.5, seed, true});
      ASSERT_EQ(p.rows(), 501u);
      for (std::size_t k = 0; k < u.size(); ++k) EXPECT_EQ(p.at(0, k), u[k]);
      for (std::size_t r = 0; r < p.rows(); ++r) {
        for (std::size_t k = 1; k < u.size(); ++k) {
          ASSERT_LE(p.at(r, k - 1), p.at(r, k)) << to_string(kind) << " seed " << seed << " row " << r;
        }
      }
    }
  }
}

TEST(Flows, DeterministicGivenSeed) {
  const std::vector<double> u{0.1, 0.105, 0.4};
  for (FlowKind kind : moving) {
    const FlowPath a = run(kind, u, {1e-3, 0.2, 99, true}, 0.004);
    const FlowPath b = run(kind, u, {1e-3, 0.2, 99, true}, 0.004);
    const FlowPath c = run(kind, u, {1e-3, 0.2, 100, true}, 0.004);
    EXPECT_EQ(a.positions, b.positions);
    EXPECT_NE(a.positions, c.positions);
  }
}

TEST(Flows, CoincidentStartsMoveTogether) {
  const std::vector<double> u{0.3, 0.3};
  for (FlowKind kind : {FlowKind::harris, FlowKind::arratia}) {
    const FlowPath p = run(kind, u, {1e-3, 1.0, 4, true});
    for (std::size_t r = 0; r < p.rows(); ++r) EXPECT_EQ(p.at(r, 0), p.at(r, 1));
  }
}

TEST(Flows, FirstParticleIsTheDrivingBrownianMotion) {
  const std::vector<double> u{0.0, 0.05, 0.2};
  const SimulationOptions o{1e-3, 0.3, 12, true};
  ReplicaRng rng(o.seed);
  std::vector<double> expected{0.0};
  for (std::size_t s = 0; s < 300; ++s) {
    double first = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
      const double z = rng.drive_normal();
      if (k == 0) first = z;
    }
    expected.push_back(expected.back() + std::sqrt(o.dt) * first);
  }
  for (FlowKind kind : {FlowKind::arratia, FlowKind::glued}) {
    const FlowPath p = run(kind, u, o, 0.01);
    for (std::size_t r = 0; r < p.rows(); ++r) EXPECT_EQ(p.at(r, 0), expected[r]) << to_string(kind);
  }
}

TEST(Flows, OneParticleHasBrownianMarginals) {
  const std::vector<double> u{0.5};
  const std::size_t m = 4000;
  for (FlowKind kind : moving) {
    double ss = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const FlowPath p = run(kind, u, {0.05, 1.0, derive_seed(1, 1, i), false});
      const double d = p.final_positions()[0] - 0.5;
      ss += d * d;
    }
    // chi-square with m degrees of freedom, two-sided 99.9% band
    EXPECT_GT(ss, chi_square_quantile(0.0005, m)) << to_string(kind);
    EXPECT_LT(ss, chi_square_quantile(0.9995, m)) << to_string(kind);
  }
}

TEST(Flows, ArratiaCoalescenceIsAbsorbing) {
  const std::vector<double> u{0.0, 0.05, 0.1};
  int merged = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const FlowPath p = simulate_arratia(u, {1e-3, 1.0, seed, true});
    for (std::size_t k = 1; k < u.size(); ++k) {
      bool together = false;
      for (std::size_t r = 0; r < p.rows(); ++r) {
        if (together) {
          ASSERT_EQ(p.at(r, k), p.at(r, k - 1));
        } else if (p.at(r, k) == p.at(r, k - 1)) {
          together = true;
          ++merged;
        }
      }
    }
  }
  EXPECT_GT(merged, 50);
}

TEST(Flows, ArratiaMeetingProbabilityForAWideGap) {
  const std::vector<double> u{0.0, 1.0};
  const std::size_t m = 4000;
  std::size_t met = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const FlowPath p = simulate_arratia(u, {1e-3, 1.0, derive_seed(2, 1, i), false});
    if (p.final_positions()[0] == p.final_positions()[1]) ++met;
  }
  const double p_hat = static_cast<double>(met) / m;
  const double p = std::erfc(0.5);
  EXPECT_NEAR(p_hat, p, 3.0 * std::sqrt(p * (1 - p) / m) + 0.01);
}

TEST(Flows, GluedGapsNeverDropBelowEpsilon) {
  const std::vector<double> u{0.0, 0.02, 0.04, 0.5};
  const double eps = 0.01;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const FlowPath p = simulate_glued({eps}, u, {1e-3, 1.0, seed, true});
    for (std::size_t r = 1; r < p.rows(); ++r) {
      for (std::size_t k = 1; k < u.size(); ++k) {
        const double gap = p.at(r, k) - p.at(r, k - 1);
        EXPECT_GE(gap, eps * (1 - 1e-9));
      }
    }
  }
  EXPECT_THROW(simulate_glued({0.05}, u, {1e-3, 1.0, 0, true}), HypothesisError);
}

TEST(Flows, GluedOncePinnedStaysPinned) {
  const std::vector<double> u{0.0, 0.03};
  const double eps = 0.02;
  int pinned_runs = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const FlowPath p = simulate_glued({eps}, u, {1e-3, 1.0, seed, true});
    std::size_t first = p.rows();
    for (std::size_t r = 1; r < p.rows(); ++r) {
      if (p.at(r, 1) == p.at(r, 0) + eps) {
        first = r;
        break;
      }
    }
    if (first == p.rows()) continue;
    ++pinned_runs;
    for (std::size_t r = first; r < p.rows(); ++r) EXPECT_EQ(p.at(r, 1), p.at(r, 0) + eps);
  }
  EXPECT_GT(pinned_runs, 30);
}

TEST(Flows, GluedTimesApproachArratiaCoalescenceTimes) {
  const std::vector<double> u{0.0, 0.2};
  const std::size_t m = 10000;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> glue(m, inf), coal(m, inf);
  for (std::size_t i = 0; i < m; ++i) {
    const SimulationOptions o{1e-3, 1.0, derive_seed(3, 1, i), true};
    const FlowPath g = simulate_glued({1e-3}, u, o);
    // both sides detect contact on the grid only
    const FlowPath a = simulate_arratia(u, {1e-3, 1.0, derive_seed(3, 3, i), true}, false);
    for (std::size_t r = 1; r < g.rows(); ++r) {
      if (g.at(r, 1) - g.at(r, 0) <= 1e-3 * (1 + 1e-9)) {
        glue[i] = g.time_of_row(r);
        break;
      }
    }
    for (std::size_t r = 1; r < a.rows(); ++r) {
      if (a.at(r, 1) == a.at(r, 0)) {
        coal[i] = a.time_of_row(r);
        break;
      }
    }
  }
  EXPECT_LT(ks_two_sample(glue, coal).statistic, 0.05);
}

TEST(Flows, HarrisFarApartParticlesAreIndependent) {
  const std::vector<double> u{0.0, 1.0};
  const std::size_t m = 4000;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const FlowPath p = simulate_harris(CovarianceKernel::triangle(0.02), u, {1e-3, 0.01, derive_seed(4, 1, i), false});
    const double a = p.final_positions()[0], b = p.final_positions()[1] - 1.0;
    sxy += a * b;
    sxx += a * a;
    syy += b * b;
  }
  const double rho = sxy / std::sqrt(sxx * syy);
  EXPECT_LT(std::abs(rho), 4.0 / std::sqrt(static_cast<double>(m)));
}

TEST(Flows, HarrisQuadraticCovariationFollowsGamma) {
  const CovarianceKernel k = CovarianceKernel::triangle(0.02);
  const double g = 0.005;
  const std::vector<double> u{0.0, g};
  const std::size_t m = 20000;
  const double h = 1e-6;
  std::vector<double> products(m);
  for (std::size_t i = 0; i < m; ++i) {
    const FlowPath p = simulate_harris(k, u, {h, h, derive_seed(5, 1, i), false});
    products[i] = p.final_positions()[0] * (p.final_positions()[1] - g) / h;
  }
  const Estimate e = estimate_mean(products);
  EXPECT_NEAR(e.mean, k(g), 4.0 * e.se) << "se " << e.se;
}

TEST(Flows, HarrisRejectsIndefiniteCovariance) {
  // Gamma = 1 on the whole interaction range is not positive definite
  const CovarianceKernel flat = CovarianceKernel::sampled(0.02, {1.0, 1.0});
  const std::vector<double> u{0.0, 0.006, 0.012};
  EXPECT_THROW(simulate_harris(flat, u, {1e-4, 1e-4, 1, false}), FactorizationError);
  EXPECT_THROW(simulate_harris(CovarianceKernel::indicator(), u, {1e-4, 1e-4, 1, false}), std::invalid_argument);
}

TEST(Flows, CsvRoundTrip) {
  const std::vector<double> u{0.1, 0.2, 0.7};
  const FlowPath p = simulate_arratia(u, {0.01, 0.2, 8, true});
  std::stringstream full;
  write_csv(full, p, true);
  const FlowPath back = read_csv(full, FlowKind::arratia);
  EXPECT_EQ(back.initial_points, p.initial_points);
  EXPECT_EQ(back.positions, p.positions);
  EXPECT_EQ(back.steps, p.steps);
  EXPECT_DOUBLE_EQ(back.dt, p.dt);
  std::stringstream last;
  write_csv(last, p, false);
  int lines = 0;
  for (std::string line; std::getline(last, line);) ++lines;
  EXPECT_EQ(lines, 2);
}
