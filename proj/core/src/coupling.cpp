#include "harrisflow/coupling.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "harrisflow/errors.hpp"
#include "harrisflow/parallel.hpp"
#include "harrisflow/random.hpp"

namespace hflow {

std::span<const double> CouplingTrace::stage(std::size_t i) const {
  if (i == 0) throw std::out_of_range("CouplingTrace::stage is 1-based");
  const std::size_t idx = std::min(i, stage_paths.size()) - 1;
  return stage_paths[idx];
}

double CouplingTrace::stage_at(std::size_t i, std::size_t row, std::size_t k) const {
  return stage(i)[row * particles() + k];
}

double CouplingTrace::sigma_time(std::size_t i) const {
  const auto& s = sigma.at(i - 1);
  return s ? base_path.time_of_row(*s) : std::numeric_limits<double>::infinity();
}

std::span<const double> CouplingTrace::final_endpoints() const {
  const auto& last = stage_paths.back();
  const std::size_t n = particles();
  return {last.data() + last.size() - n, n};
}

namespace {

std::vector<std::size_t> leaders_from(const std::vector<bool>& glued) {
  std::vector<std::size_t> leader(glued.size() + 1);
  for (std::size_t k = 0; k < leader.size(); ++k) {
    leader[k] = (k > 0 && glued[k - 1]) ? leader[k - 1] : k;
  }
  return leader;
}

}  // namespace

CouplingTrace build_coupling(const FlowPath& path, double epsilon) {
  const std::size_t n = path.particles();
  if (n < 2) throw std::invalid_argument("build_coupling: need at least two particles");
  if (!path.full) throw std::invalid_argument("build_coupling: path must carry its full history");
  if (!(epsilon > 0.0)) throw std::invalid_argument("build_coupling: epsilon must be positive");
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double gap = path.at(0, k + 1) - path.at(0, k);
    if (!(gap > epsilon)) {
      throw HypothesisError(fmt::format(
          "coupling requires initial gaps strictly greater than epsilon: u[{}] - u[{}] = {:g} <= {:g}",
          k + 2, k + 1, gap, epsilon));
    }
  }

  CouplingTrace trace;
  trace.epsilon = epsilon;
  trace.base_path = path;
  trace.stage_paths.push_back(path.positions);
  trace.sigma.assign(n - 1, std::nullopt);
  trace.stage_sup_discrepancy.assign(n - 1, std::vector<double>(n, 0.0));

  const std::size_t rows = path.rows();
  std::vector<bool> glued(n - 1, false);
  std::size_t glued_count = 0;
  std::size_t previous = 0;

  for (std::size_t i = 0; i + 1 < n; ++i) {
    const std::vector<double>& z = trace.stage_paths.back();
    auto gap = [&](std::size_t row, std::size_t l) { return z[row * n + l + 1] - z[row * n + l]; };

    std::optional<std::size_t> hit;
    for (std::size_t row = previous + 1; row < rows && !hit; ++row) {
      std::size_t count = 0;
      for (std::size_t l = 0; l + 1 < n; ++l) {
        if (glued[l] || gap(row, l) <= epsilon) ++count;
      }
      if (count >= glued_count + 1) hit = row;
    }
    if (!hit) break;
    const std::size_t t = *hit;
    trace.sigma[i] = t;

    // Glue every gap that touches at sigma, then cascade: snapping followers
    // onto exact epsilon offsets may close further gaps at the same instant.
    std::vector<bool> next_glued = glued;
    for (std::size_t l = 0; l + 1 < n; ++l) {
      if (gap(t, l) <= epsilon) next_glued[l] = true;
    }
    std::vector<std::size_t> leader = leaders_from(next_glued);
    for (bool changed = true; changed;) {
      changed = false;
      auto snapped = [&](std::size_t k) {
        return z[t * n + leader[k]] + static_cast<double>(k - leader[k]) * epsilon;
      };
      for (std::size_t l = 0; l + 1 < n; ++l) {
        if (!next_glued[l] && snapped(l + 1) - snapped(l) <= epsilon) {
          next_glued[l] = true;
          changed = true;
        }
      }
      if (changed) leader = leaders_from(next_glued);
    }

    std::vector<double> next = z;
    auto& disc = trace.stage_sup_discrepancy[i];
    for (std::size_t row = t; row < rows; ++row) {
      for (std::size_t k = 0; k < n; ++k) {
        const double v = z[row * n + leader[k]] + static_cast<double>(k - leader[k]) * epsilon;
        next[row * n + k] = v;
        disc[k] = std::max(disc[k], std::abs(z[row * n + k] - v));
      }
    }
    trace.partitions.push_back(leader);
    trace.stage_paths.push_back(std::move(next));
    glued = std::move(next_glued);
    glued_count = static_cast<std::size_t>(std::count(glued.begin(), glued.end(), true));
    previous = t;
  }
  return trace;
}

double coupling_cost(const CouplingTrace& trace, std::span<const double> weights) {
  const std::size_t n = trace.particles();
  if (weights.size() != n) throw std::invalid_argument("coupling_cost: weight count mismatch");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("coupling_cost: negative weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("coupling_cost: weights must sum to 1");
  const auto base = trace.base_endpoints();
  const auto last = trace.final_endpoints();
  double cost = 0.0;
  for (std::size_t k = 0; k < n; ++k) cost += weights[k] * std::abs(base[k] - last[k]);
  return cost;
}

Estimate lemma3_statistic(std::span<const CouplingTrace> traces, std::size_t stage) {
  if (traces.empty()) throw std::invalid_argument("lemma3_statistic: no traces");
  const std::size_t n = traces.front().particles();
  if (stage < 1 || stage + 1 > n) throw std::invalid_argument("lemma3_statistic: stage out of range");
  std::vector<double> values;
  values.reserve(traces.size());
  for (const auto& tr : traces) {
    if (tr.particles() != n || tr.epsilon != traces.front().epsilon) {
      throw std::invalid_argument("lemma3_statistic: traces must share n and epsilon");
    }
    double s = 0.0;
    for (double d : tr.stage_sup_discrepancy[stage - 1]) s += d;
    values.push_back(s);
  }
  return estimate_mean(values);
}

double lemma3_bound(std::size_t n, double epsilon, std::size_t stage) {
  const double nn = static_cast<double>(n);
  const double power = stage == 1 ? nn * nn * nn : nn * nn * nn * nn;
  return 2.0 * power / 3.0 * std::sqrt(epsilon);
}

HittingCheck hitting_time_bound_check(double c, double horizon, std::size_t replicas,
                                      std::uint64_t seed, double dt, unsigned threads) {
  if (!(c <= 0.0)) throw std::invalid_argument("hitting_time_bound_check: level must be <= 0");
  if (replicas < 1000) throw std::invalid_argument("hitting_time_bound_check: need >= 1000 replicas");
  const std::size_t steps = grid_steps(dt, horizon);
  std::vector<double> stopped(replicas, 0.0);
  const double sdt = std::sqrt(dt);
  parallel_for(replicas, threads, [&](std::size_t r) {
    if (c == 0.0) return;
    ReplicaRng rng(derive_seed(seed, streams::hitting, r));
    double b = 0.0;
    double tau = horizon;
    for (std::size_t s = 1; s <= steps; ++s) {
      const double next = b + sdt * rng.drive_normal();
      bool hit = next <= c;
      if (!hit) hit = rng.aux_uniform() < std::exp(-2.0 * (b - c) * (next - c) / dt);
      b = next;
      if (hit) {
        tau = static_cast<double>(s) * dt;
        break;
      }
    }
    stopped[r] = tau;
  });
  HittingCheck out;
  out.estimate = estimate_mean(stopped);
  out.bound = 2.0 * std::sqrt(2.0 / std::numbers::pi) * std::abs(c) * std::sqrt(horizon);
  return out;
}

}  // namespace hflow
