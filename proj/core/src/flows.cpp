#include "harrisflow/flows.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "harrisflow/errors.hpp"
#include "harrisflow/random.hpp"

namespace hflow {

std::string to_string(FlowKind kind) {
  switch (kind) {
    case FlowKind::harris:
      return "harris";
    case FlowKind::arratia:
      return "arratia";
    case FlowKind::glued:
      return "glued";
    case FlowKind::identity:
      return "identity";
  }
  return "unknown";
}

FlowKind flow_kind_from_string(const std::string& name) {
  if (name == "harris") return FlowKind::harris;
  if (name == "arratia") return FlowKind::arratia;
  if (name == "glued") return FlowKind::glued;
  if (name == "identity") return FlowKind::identity;
  throw std::invalid_argument("unknown flow kind '" + name +
                              "' (valid: harris, arratia, glued, identity)");
}

double FlowPath::time_of_row(std::size_t r) const {
  if (full) return dt * static_cast<double>(r);
  return r == 0 ? 0.0 : horizon();
}

std::size_t grid_steps(double dt, double horizon) {
  if (!(dt > 0.0) || !(horizon > 0.0) || dt > horizon) {
    throw std::invalid_argument("grid requires 0 < dt <= horizon");
  }
  const double ratio = horizon / dt;
  const auto steps = static_cast<std::size_t>(std::llround(ratio));
  if (steps == 0 || std::abs(static_cast<double>(steps) * dt - horizon) > 1e-9 * horizon) {
    throw std::invalid_argument("horizon must be an integer multiple of dt");
  }
  return steps;
}

namespace {

void require_sorted(std::span<const double> points) {
  if (points.empty()) throw std::invalid_argument("at least one initial point is required");
  for (std::size_t k = 0; k < points.size(); ++k) {
    if (!std::isfinite(points[k])) throw std::invalid_argument("initial points must be finite");
    if (k > 0 && points[k] < points[k - 1]) {
      throw std::invalid_argument("initial points must be sorted in non-decreasing order");
    }
  }
}

// Allocates the path and records row 0.
FlowPath start_path(FlowKind kind, std::span<const double> points, const SimulationOptions& o) {
  FlowPath path;
  path.kind = kind;
  path.initial_points.assign(points.begin(), points.end());
  path.dt = o.dt;
  path.steps = grid_steps(o.dt, o.horizon);
  path.seed = o.seed;
  path.full = o.record_full_path;
  const std::size_t rows = path.full ? path.steps + 1 : 2;
  path.positions.resize(rows * points.size());
  std::copy(points.begin(), points.end(), path.positions.begin());
  return path;
}

void record(FlowPath& path, std::size_t step, const std::vector<double>& x) {
  if (path.full) {
    std::copy(x.begin(), x.end(), path.row(step).begin());
  } else if (step == path.steps) {
    std::copy(x.begin(), x.end(), path.row(1).begin());
  }
}

constexpr std::array<double, 4> kJitter = {0.0, 1e-12, 1e-10, 1e-8};

void insertion_sort(std::span<double> x) {
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double v = x[i];
    std::size_t j = i;
    while (j > 0 && x[j - 1] > v) {
      x[j] = x[j - 1];
      --j;
    }
    x[j] = v;
  }
}

// Euler-Maruyama integrator for the n-point motion of a Harris flow, acting
// on distinct positions ("nodes"); equal positions share one increment.
// Nodes closer than the interaction radius form clusters whose covariance
// block is banded; everything else moves independently.
//
// Refinement is local: inside a step the nodes are cut into blocks at gaps
// that cannot reach the interaction range during the step, and only blocks
// that need it are bisected (by sampling Brownian-bridge midpoints of their
// driving increments).
class HarrisIntegrator {
 public:
  HarrisIntegrator(const CovarianceKernel& kernel, std::size_t n, const HarrisOptions& opts,
                   ReplicaRng& rng)
      : gamma_(kernel), opts_(opts), rng_(rng), radius_(kernel.interaction_radius()) {
    merge_gap_ = opts_.merge_fraction * radius_;
    const double entry_std = opts_.step_fraction * radius_;
    entry_step_ = 0.5 * entry_std * entry_std;
    const auto levels = static_cast<std::size_t>(opts_.max_depth) + 2;
    left_.assign(levels, std::vector<double>(n));
    right_.assign(levels, std::vector<double>(n));
    dx_.assign(levels, std::vector<double>(n));
  }

  // x: non-decreasing node positions; dw: their driving increments over h.
  void advance(std::span<double> x, std::span<const double> dw, double h) { step(x, dw, h, 0); }

 private:
  void step(std::span<double> x, std::span<const double> dw, double h, int depth) {
    const std::size_t size = x.size();
    std::span<double> dx(dx_[static_cast<std::size_t>(depth)].data(), size);
    increments(x, dw, dx);
    if (!opts_.adaptive || depth >= opts_.max_depth) {
      apply(x, dx);
      return;
    }
    std::size_t s = 0;
    while (s < size) {
      std::size_t e = s + 1;
      bool split = false;
      for (; e < size; ++e) {
        const double a = x[e] - x[e - 1];
        if (a == 0.0) continue;
        if (a >= radius_) {
          if (h <= entry_step_) break;
          const double b = a + dx[e] - dx[e - 1];
          if (b >= radius_ && std::exp(-(a - radius_) * (b - radius_) / h) <= opts_.touch_tolerance) break;
          split = true;
          continue;
        }
        const double rate = 2.0 * (1.0 - gamma_(a));
        const double target = opts_.step_fraction * std::max(a, merge_gap_);
        if (rate * h > target * target) split = true;
      }
      const std::size_t len = e - s;
      if (split) {
        const auto next = static_cast<std::size_t>(depth) + 1;
        std::span<double> left(left_[next].data() + s, len);
        std::span<double> right(right_[next].data() + s, len);
        const double bridge_sd = 0.5 * std::sqrt(h);
        for (std::size_t k = 0; k < len; ++k) {
          left[k] = 0.5 * dw[s + k] + bridge_sd * rng_.aux_normal();
          right[k] = dw[s + k] - left[k];
        }
        step(x.subspan(s, len), left, 0.5 * h, depth + 1);
        step(x.subspan(s, len), right, 0.5 * h, depth + 1);
      } else {
        apply(x.subspan(s, len), dx.subspan(s, len));
      }
      s = e;
    }
  }

  void apply(std::span<double> x, std::span<const double> dx) {
    for (std::size_t k = 0; k < x.size(); ++k) x[k] += dx[k];
    insertion_sort(x);
    if (opts_.adaptive) {
      for (std::size_t k = 0; k + 1 < x.size(); ++k) {
        const double g = x[k + 1] - x[k];
        if (g > 0.0 && g < merge_gap_) x[k + 1] = x[k];
      }
    }
  }

  // dx[k] for every entry of x; equal positions use the increment of the first.
  void increments(std::span<const double> x, std::span<const double> dw, std::span<double> dx) {
    node_first_.clear();
    for (std::size_t k = 0; k < x.size(); ++k) {
      if (k == 0 || x[k] != x[k - 1]) node_first_.push_back(k);
    }
    const std::size_t m = node_first_.size();
    node_pos_.resize(m);
    node_dx_.resize(m);
    for (std::size_t i = 0; i < m; ++i) node_pos_[i] = x[node_first_[i]];

    std::size_t start = 0;
    while (start < m) {
      std::size_t end = start + 1;
      while (end < m && node_pos_[end] - node_pos_[end - 1] < radius_) ++end;
      if (end - start == 1) {
        node_dx_[start] = dw[node_first_[start]];
      } else {
        cluster_increments(start, end, dw);
      }
      start = end;
    }
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t last = i + 1 < m ? node_first_[i + 1] : x.size();
      for (std::size_t k = node_first_[i]; k < last; ++k) dx[k] = node_dx_[i];
    }
  }

  void cluster_increments(std::size_t s, std::size_t e, std::span<const double> dw) {
    const std::size_t size = e - s;
    std::size_t bw = 0;
    for (std::size_t i = s, j = s; i < e; ++i) {
      j = std::max(j, i);
      while (j + 1 < e && node_pos_[j + 1] - node_pos_[i] < radius_) ++j;
      bw = std::max(bw, j - i);
    }
    const std::size_t stride = bw + 1;
    band_.assign(size * stride, 0.0);
    // band_[i * stride + (i - j)] = L(i, j)
    auto L = [&](std::size_t i, std::size_t j) -> double& { return band_[i * stride + (i - j)]; };

    bool ok = false;
    for (double jitter : kJitter) {
      ok = true;
      for (std::size_t i = 0; i < size && ok; ++i) {
        const std::size_t j0 = i >= bw ? i - bw : 0;
        for (std::size_t j = j0; j <= i; ++j) {
          double sum = gamma_(node_pos_[s + i] - node_pos_[s + j]);
          if (i == j) sum += jitter;
          for (std::size_t k = std::max(j0, j >= bw ? j - bw : 0); k < j; ++k) sum -= L(i, k) * L(j, k);
          if (i == j) {
            if (!(sum > 0.0)) {
              ok = false;
              break;
            }
            L(i, i) = std::sqrt(sum);
          } else {
            L(i, j) = sum / L(j, j);
          }
        }
      }
      if (ok) break;
    }
    if (!ok) {
      throw FactorizationError(fmt::format(
          "covariance block of {} nodes starting at x={:.17g} is not positive definite even with "
          "jitter {:g}; the kernel violates positive semidefiniteness",
          size, node_pos_[s], kJitter.back()));
    }
    for (std::size_t i = 0; i < size; ++i) {
      const std::size_t j0 = i >= bw ? i - bw : 0;
      double v = 0.0;
      for (std::size_t j = j0; j <= i; ++j) v += L(i, j) * dw[node_first_[s + j]];
      node_dx_[s + i] = v;
    }
  }

  const CovarianceKernel& gamma_;
  HarrisOptions opts_;
  ReplicaRng& rng_;
  double radius_;
  double merge_gap_ = 0.0;
  double entry_step_ = 0.0;
  std::vector<std::vector<double>> left_, right_, dx_;
  std::vector<std::size_t> node_first_;
  std::vector<double> node_pos_, node_dx_;
  std::vector<double> band_;
};

}  // namespace

FlowPath simulate_harris(const CovarianceKernel& kernel, std::span<const double> initial_points,
                         const SimulationOptions& options, const HarrisOptions& harris) {
  require_sorted(initial_points);
  if (kernel.form() == CovarianceForm::indicator) {
    throw std::invalid_argument(
        "simulate_harris: the indicator kernel is the Arratia flow; use simulate_arratia");
  }
  if (!(harris.step_fraction > 0.0) || !(harris.merge_fraction >= 0.0) || harris.max_depth < 0) {
    throw std::invalid_argument("simulate_harris: invalid refinement options");
  }
  FlowPath path = start_path(FlowKind::harris, initial_points, options);
  const std::size_t n = initial_points.size();
  ReplicaRng rng(options.seed);
  HarrisIntegrator integrator(kernel, n, harris, rng);
  std::vector<double> x(initial_points.begin(), initial_points.end());
  std::vector<double> dw(n), node_x, node_dw;
  std::vector<std::size_t> first;
  node_x.reserve(n);
  node_dw.reserve(n);
  const double sdt = std::sqrt(options.dt);
  for (std::size_t s = 1; s <= path.steps; ++s) {
    // all n normals are drawn every step so that every flow kind sees the
    // same driving noise for a given seed
    for (auto& v : dw) v = sdt * rng.drive_normal();
    node_x.clear();
    node_dw.clear();
    first.clear();
    for (std::size_t k = 0; k < n; ++k) {
      if (k > 0 && x[k] == x[k - 1]) continue;
      first.push_back(k);
      node_x.push_back(x[k]);
      node_dw.push_back(dw[k]);
    }
    integrator.advance(node_x, node_dw, options.dt);
    std::sort(node_x.begin(), node_x.end());
    for (std::size_t i = 0; i < first.size(); ++i) {
      const std::size_t last = i + 1 < first.size() ? first[i + 1] : n;
      std::fill(x.begin() + static_cast<std::ptrdiff_t>(first[i]), x.begin() + static_cast<std::ptrdiff_t>(last),
                node_x[i]);
    }
    record(path, s, x);
  }
  return path;
}

FlowPath simulate_arratia(std::span<const double> initial_points, const SimulationOptions& options,
                          bool bridge_correction) {
  require_sorted(initial_points);
  FlowPath path = start_path(FlowKind::arratia, initial_points, options);
  const std::size_t n = initial_points.size();
  ReplicaRng rng(options.seed);
  std::vector<double> x(initial_points.begin(), initial_points.end());
  std::vector<double> start(n);
  std::vector<double> xi(n);
  const double sdt = std::sqrt(options.dt);
  for (std::size_t s = 1; s <= path.steps; ++s) {
    for (auto& v : xi) v = rng.drive_normal();
    start = x;
    for (std::size_t k = 0; k < n; ++k) {
      // group members (equal start positions) follow the least index
      x[k] = (k > 0 && start[k] == start[k - 1]) ? x[k - 1] : start[k] + sdt * xi[k];
    }
    for (std::size_t k = 1; k < n; ++k) {
      if (start[k] == start[k - 1]) {
        x[k] = x[k - 1];
        continue;
      }
      const double b = x[k] - x[k - 1];
      if (b <= 0.0) {
        x[k] = x[k - 1];
      } else if (bridge_correction) {
        const double a = start[k] - start[k - 1];
        if (rng.aux_uniform() < std::exp(-a * b / options.dt)) x[k] = x[k - 1];
      }
    }
    record(path, s, x);
  }
  return path;
}

FlowPath simulate_glued(const GluedFlowParams& params, std::span<const double> initial_points,
                        const SimulationOptions& options) {
  require_sorted(initial_points);
  const double eps = params.epsilon;
  if (!(eps > 0.0)) throw std::invalid_argument("simulate_glued: epsilon must be positive");
  for (std::size_t k = 1; k < initial_points.size(); ++k) {
    if (!(initial_points[k] - initial_points[k - 1] > eps)) {
      throw HypothesisError(fmt::format(
          "glued flow requires every initial gap to exceed epsilon: u[{}] - u[{}] = {:g} <= {:g}",
          k + 1, k, initial_points[k] - initial_points[k - 1], eps));
    }
  }
  FlowPath path = start_path(FlowKind::glued, initial_points, options);
  const std::size_t n = initial_points.size();
  ReplicaRng rng(options.seed);
  std::vector<double> x(initial_points.begin(), initial_points.end());
  std::vector<std::size_t> leader(n);
  for (std::size_t k = 0; k < n; ++k) leader[k] = k;
  std::vector<double> xi(n);
  const double sdt = std::sqrt(options.dt);
  for (std::size_t s = 1; s <= path.steps; ++s) {
    for (auto& v : xi) v = rng.drive_normal();
    for (std::size_t k = 0; k < n; ++k) {
      if (leader[k] == k) {
        x[k] += sdt * xi[k];
      } else {
        x[k] = x[leader[k]] + static_cast<double>(k - leader[k]) * eps;
      }
    }
    for (std::size_t k = 1; k < n; ++k) {
      if (leader[k] != k) continue;
      if (x[k] - x[k - 1] <= eps) {
        const std::size_t lead = leader[k - 1];
        for (std::size_t m = k; m < n && leader[m] == k; ++m) {
          leader[m] = lead;
          x[m] = x[lead] + static_cast<double>(m - lead) * eps;
        }
      }
    }
    record(path, s, x);
  }
  return path;
}

FlowPath simulate_identity(std::span<const double> initial_points,
                           const SimulationOptions& options) {
  require_sorted(initial_points);
  FlowPath path = start_path(FlowKind::identity, initial_points, options);
  std::vector<double> x(initial_points.begin(), initial_points.end());
  for (std::size_t s = 1; s <= path.steps; ++s) record(path, s, x);
  return path;
}

void write_csv(std::ostream& out, const FlowPath& path, bool full_path) {
  out << "t";
  for (double u : path.initial_points) out << fmt::format(",{:.17g}", u);
  out << '\n';
  auto emit = [&](std::size_t r) {
    out << fmt::format("{:.17g}", path.time_of_row(r));
    for (double v : path.row(r)) out << fmt::format(",{:.17g}", v);
    out << '\n';
  };
  if (full_path) {
    if (!path.full) throw std::invalid_argument("write_csv: path was recorded without full history");
    for (std::size_t r = 0; r < path.rows(); ++r) emit(r);
  } else {
    emit(path.rows() - 1);
  }
}

FlowPath read_csv(std::istream& in, FlowKind kind) {
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
  };
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("read_csv: empty input");
  const auto header = split(line);
  if (header.size() < 2 || header[0] != "t") throw std::invalid_argument("read_csv: bad header");
  FlowPath path;
  path.kind = kind;
  for (std::size_t i = 1; i < header.size(); ++i) path.initial_points.push_back(std::stod(header[i]));
  std::vector<double> times;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) throw std::invalid_argument("read_csv: ragged row");
    times.push_back(std::stod(cells[0]));
    for (std::size_t i = 1; i < cells.size(); ++i) path.positions.push_back(std::stod(cells[i]));
  }
  if (times.size() < 2 || times.front() != 0.0) {
    throw std::invalid_argument("read_csv: need a full path starting at t = 0");
  }
  path.steps = times.size() - 1;
  path.dt = times.back() / static_cast<double>(path.steps);
  path.full = true;
  return path;
}

}  // namespace hflow
