#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "harrisflow/kernels.hpp"

namespace hflow {

enum class FlowKind { harris, arratia, glued, identity };

std::string to_string(FlowKind kind);
FlowKind flow_kind_from_string(const std::string& name);

// One realization of an n-point motion on a uniform grid over [0, horizon].
// `positions` is row-major (grid time x particle). With `full == false`
// only the initial and final rows are stored.
struct FlowPath {
  FlowKind kind = FlowKind::identity;
  std::vector<double> initial_points;
  double dt = 0.0;
  std::size_t steps = 0;
  std::uint64_t seed = 0;
  bool full = true;
  std::vector<double> positions;

  std::size_t particles() const { return initial_points.size(); }
  std::size_t rows() const { return particles() == 0 ? 0 : positions.size() / particles(); }
  double horizon() const { return dt * static_cast<double>(steps); }
  // Grid time of a stored row.
  double time_of_row(std::size_t row) const;

  std::span<const double> row(std::size_t r) const {
    return {positions.data() + r * particles(), particles()};
  }
  std::span<double> row(std::size_t r) { return {positions.data() + r * particles(), particles()}; }
  std::span<const double> final_positions() const { return row(rows() - 1); }
  double at(std::size_t r, std::size_t k) const { return positions[r * particles() + k]; }
};

struct SimulationOptions {
  double dt = 1e-4;
  double horizon = 1.0;
  std::uint64_t seed = 0;
  bool record_full_path = true;
};

// Controls the sub-step refinement used by simulate_harris. The recorded
// grid is always `dt`; inside a grid step the integrator bisects (sampling
// Brownian-bridge midpoints of the driving noise) until
//   - every interacting pair's gap moves by at most `step_fraction` of its
//     size per sub-step, and
//   - every non-interacting pair either provably stays out of the
//     interaction range (bridge touch probability <= touch_tolerance) or
//     the sub-step resolves the interaction radius.
// Gaps below merge_fraction * radius are closed (numerical coalescence).
struct HarrisOptions {
  bool adaptive = true;
  double step_fraction = 0.25;
  double touch_tolerance = 1e-6;
  double merge_fraction = 1e-3;
  int max_depth = 48;
};

// Harris flow with covariance Gamma: per step, increments are L * dW where
// L L^T = [Gamma(X_i - X_j)] (banded Cholesky, diagonal jitter escalated
// 1e-12 -> 1e-8 on failure), followed by an order-restoring sort.
// Throws FactorizationError if the covariance stays indefinite.
FlowPath simulate_harris(const CovarianceKernel& kernel, std::span<const double> initial_points,
                         const SimulationOptions& options, const HarrisOptions& harris = {});

// Coalescing independent Brownian particles. A pair that crosses during a
// step merges; with bridge_correction a non-crossing pair also merges with
// probability exp(-a b / dt) (a, b = gaps at step start and end).
FlowPath simulate_arratia(std::span<const double> initial_points, const SimulationOptions& options,
                          bool bridge_correction = true);

struct GluedFlowParams {
  double epsilon = 0.0;
};

// Group leaders carry independent Brownian motions; follower k of leader j
// sits at leader + (k - j) * epsilon. Adjacent groups whose gap is <= epsilon
// at a grid time are merged left to right. Throws HypothesisError if an
// initial gap is <= epsilon.
FlowPath simulate_glued(const GluedFlowParams& params, std::span<const double> initial_points,
                        const SimulationOptions& options);

// Particles never move. Debug flow for checking discretization geometry.
FlowPath simulate_identity(std::span<const double> initial_points,
                           const SimulationOptions& options);

// Header of particle labels (initial points) preceded by "t", then one row
// per stored grid time; only the final row unless `full_path`.
void write_csv(std::ostream& out, const FlowPath& path, bool full_path = false);

// Parses the CSV written by write_csv(..., true) back into a full path.
FlowPath read_csv(std::istream& in, FlowKind kind = FlowKind::identity);

// Number of grid steps for horizon/dt; throws unless horizon is an integer
// multiple of dt (to 1e-9 relative).
std::size_t grid_steps(double dt, double horizon);

}  // namespace hflow
