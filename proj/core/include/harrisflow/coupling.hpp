#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "harrisflow/flows.hpp"
#include "harrisflow/stats.hpp"

namespace hflow {

// Stagewise record of the epsilon-gluing transform of one path.
//
// Stage 1 is the base path. Stage i+1 equals stage i strictly before the
// gluing time sigma_i; from sigma_i on, every particle k whose left
// neighbours form a run of glued (or newly touching) gaps follows the
// least index j of that run at offset (k - j) * epsilon.
struct CouplingTrace {
  double epsilon = 0.0;
  FlowPath base_path;
  // Distinct stages only: stage_paths[0] is z_1, stage_paths.back() is the
  // final stage. Stages past the last gluing event equal the final stage.
  std::vector<std::vector<double>> stage_paths;
  // Grid row of sigma_1 .. sigma_{n-1}; nullopt = infinite.
  std::vector<std::optional<std::size_t>> sigma;
  // partitions[i][k] = least index of the element of the partition at
  // sigma_{i+1} containing k (only for finite sigmas).
  std::vector<std::vector<std::size_t>> partitions;
  // stage_sup_discrepancy[i][k] = max over grid times of |z_{i+1} - z_{i+2}| at particle k
  // (0-based stage index i = 0 .. n-2).
  std::vector<std::vector<double>> stage_sup_discrepancy;

  std::size_t particles() const { return base_path.particles(); }
  std::size_t stage_count() const { return stage_paths.size(); }
  // 1-based stage accessor, clamped to the final stage.
  std::span<const double> stage(std::size_t i) const;
  double stage_at(std::size_t i, std::size_t row, std::size_t k) const;
  // sigma_i as a time (1-based); +infinity if the event never happens on the grid.
  double sigma_time(std::size_t i) const;
  std::span<const double> base_endpoints() const { return base_path.final_positions(); }
  std::span<const double> final_endpoints() const;
};

// Builds the gluing transform. Requires a full path with >= 2 particles and
// all initial gaps > epsilon (HypothesisError otherwise).
CouplingTrace build_coupling(const FlowPath& path, double epsilon);

// sum_k weights[k] * |base endpoint_k - final-stage endpoint_k|.
double coupling_cost(const CouplingTrace& trace, std::span<const double> weights);

// Monte Carlo mean of sum_k stage_sup_discrepancy[stage-1][k] over the traces.
Estimate lemma3_statistic(std::span<const CouplingTrace> traces, std::size_t stage);

// Right-hand sides of the per-stage coupling cost bounds:
// 2 n^3 / 3 * sqrt(eps) for stage 1 and 2 n^4 / 3 * sqrt(eps) afterwards.
double lemma3_bound(std::size_t n, double epsilon, std::size_t stage);

struct HittingCheck {
  Estimate estimate;  // E(horizon ^ tau_c)
  double bound = 0.0;  // 2 sqrt(2/pi) |c| sqrt(horizon); equals (4 sqrt2/sqrt pi)|c| at horizon 4
};

// Simulates standard Brownian paths on a grid of step dt until they reach
// level c < 0 (or the horizon). A step whose endpoints stay above c still
// counts as a hit with the Brownian-bridge probability exp(-2 a b / dt).
HittingCheck hitting_time_bound_check(double c, double horizon, std::size_t replicas,
                                      std::uint64_t seed, double dt = 1e-4, unsigned threads = 1);

}  // namespace hflow
