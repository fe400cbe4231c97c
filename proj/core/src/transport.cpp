#include "harrisflow/transport.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "harrisflow/assignment.hpp"
#include "harrisflow/errors.hpp"

namespace hflow {

DiscreteMeasure::DiscreteMeasure(std::vector<double> atoms, std::vector<double> weights) {
  if (atoms.size() != weights.size()) throw std::invalid_argument("DiscreteMeasure: size mismatch");
  if (atoms.empty()) throw std::invalid_argument("DiscreteMeasure: no atoms");
  std::vector<std::size_t> order(atoms.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return atoms[a] < atoms[b]; });
  double total = 0.0;
  for (std::size_t idx : order) {
    const double x = atoms[idx];
    const double w = weights[idx];
    if (!std::isfinite(x)) throw std::invalid_argument("DiscreteMeasure: non-finite atom");
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("DiscreteMeasure: negative weight");
    total += w;
    if (w == 0.0) continue;
    if (!atoms_.empty() && atoms_.back() == x) {
      weights_.back() += w;
    } else {
      atoms_.push_back(x);
      weights_.push_back(w);
    }
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument(fmt::format("DiscreteMeasure: weights sum to {:.17g}, not 1", total));
  }
}

DiscreteMeasure DiscreteMeasure::uniform_on(std::span<const double> points) {
  if (points.empty()) throw std::invalid_argument("uniform_on: no points");
  const double w = 1.0 / static_cast<double>(points.size());
  return DiscreteMeasure(std::vector<double>(points.begin(), points.end()),
                         std::vector<double>(points.size(), w));
}

CdfMeasure lebesgue_unit() {
  return {[](double x) { return std::clamp(x, 0.0, 1.0); }, {}};
}

std::vector<double> midpoints(std::size_t n) {
  if (n == 0) throw std::invalid_argument("midpoints: n must be positive");
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = static_cast<double>(2 * k + 1) / static_cast<double>(2 * n);
  }
  return out;
}

namespace {

DiscreteMeasure from_masses(const std::vector<double>& mass) {
  const std::size_t n = mass.size();
  const auto mid = midpoints(n);
  std::vector<double> atoms, weights;
  for (std::size_t k = 0; k < n; ++k) {
    if (mass[k] > 0.0) {
      atoms.push_back(mid[k]);
      weights.push_back(mass[k]);
    }
  }
  return DiscreteMeasure(std::move(atoms), std::move(weights));
}

}  // namespace

DiscreteMeasure discretize(const DiscreteMeasure& mu, std::size_t n) {
  if (n == 0) throw std::invalid_argument("discretize: n must be positive");
  std::vector<double> mass(n, 0.0);
  const auto atoms = mu.atoms();
  const auto weights = mu.weights();
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const double x = atoms[i];
    if (x < 0.0 || x > 1.0) {
      throw HypothesisError(fmt::format("discretize: support must lie in [0, 1], found atom {:g}", x));
    }
    const auto k = std::min(static_cast<std::size_t>(std::floor(x * static_cast<double>(n))), n - 1);
    mass[k] += weights[i];
  }
  return from_masses(mass);
}

DiscreteMeasure discretize(const CdfMeasure& mu, std::size_t n) {
  if (n == 0) throw std::invalid_argument("discretize: n must be positive");
  const auto& left = mu.cdf_left ? mu.cdf_left : mu.cdf;
  if (std::abs(left(0.0)) > 1e-12 || std::abs(mu.cdf(1.0) - 1.0) > 1e-12) {
    throw HypothesisError("discretize: support must lie in [0, 1]");
  }
  std::vector<double> mass(n);
  const double dn = static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double lo = left(static_cast<double>(k) / dn);
    const double hi = k + 1 == n ? 1.0 : left(static_cast<double>(k + 1) / dn);
    mass[k] = std::max(0.0, hi - lo);
  }
  // restore exact unit mass lost to rounding
  const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
  for (double& m : mass) m /= total;
  return from_masses(mass);
}

DiscreteMeasure pushforward(const DiscreteMeasure& mu, std::span<const double> labels,
                            std::span<const double> images) {
  if (labels.size() != images.size()) throw std::invalid_argument("pushforward: label/image mismatch");
  std::vector<std::size_t> order(labels.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return labels[a] < labels[b]; });
  std::vector<double> atoms;
  atoms.reserve(mu.size());
  for (double x : mu.atoms()) {
    auto it = std::lower_bound(order.begin(), order.end(), x,
                               [&](std::size_t idx, double v) { return labels[idx] < v; });
    if (it == order.end() || labels[*it] != x) {
      throw std::invalid_argument(fmt::format("pushforward: no endpoint for atom {:.17g}", x));
    }
    atoms.push_back(images[*it]);
  }
  return DiscreteMeasure(std::move(atoms), std::vector<double>(mu.weights().begin(), mu.weights().end()));
}

double w1_real(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  const auto xa = a.atoms(), wa = a.weights();
  const auto xb = b.atoms(), wb = b.weights();
  std::size_t i = 0, j = 0;
  double fa = 0.0, fb = 0.0, total = 0.0;
  double x = std::min(xa[0], xb[0]);
  while (i < xa.size() || j < xb.size()) {
    const double next = std::min(i < xa.size() ? xa[i] : INFINITY, j < xb.size() ? xb[j] : INFINITY);
    total += std::abs(fa - fb) * (next - x);
    x = next;
    while (i < xa.size() && xa[i] == x) fa += wa[i++];
    while (j < xb.size() && xb[j] == x) fb += wb[j++];
  }
  return total;
}

EnsembleDistance w1_ensembles(const MeasureEnsemble& a, const MeasureEnsemble& b) {
  const std::size_t m = a.samples.size();
  const std::size_t mp = b.samples.size();
  if (m == 0 || mp == 0) throw std::invalid_argument("w1_ensembles: empty ensemble");
  CostMatrix cost(m, mp);
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < mp; ++c) cost(r, c) = w1_real(a.samples[r], b.samples[c]);
  }
  // (cost, probability mass) of the optimal plan's cells
  std::vector<std::pair<double, double>> cells;
  if (m == mp) {
    const Assignment match = assignment_solve(cost);
    for (std::size_t r = 0; r < m; ++r) {
      cells.emplace_back(cost(r, match.column_of_row[r]), 1.0 / static_cast<double>(m));
    }
  } else {
    const TransportPlan plan = solve_uniform_transport(cost);
    const double unit = 1.0 / (static_cast<double>(m) * static_cast<double>(mp));
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t c = 0; c < mp; ++c) {
        if (plan.flow[r][c] > 0) cells.emplace_back(cost(r, c), static_cast<double>(plan.flow[r][c]) * unit);
      }
    }
  }
  EnsembleDistance out;
  for (const auto& [c, w] : cells) out.value += w * c;
  const std::size_t eff = std::min(m, mp);
  if (eff > 1) {
    double var = 0.0;
    for (const auto& [c, w] : cells) var += w * (c - out.value) * (c - out.value);
    var *= static_cast<double>(eff) / static_cast<double>(eff - 1);
    out.se = std::sqrt(var / static_cast<double>(eff));
  }
  return out;
}

}  // namespace hflow
