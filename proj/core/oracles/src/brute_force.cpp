#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "harrisflow/oracles/oracles.hpp"

namespace hflow::oracle {

BruteAssignment brute_force_assignment(const std::vector<std::vector<double>>& cost, double tol) {
  const std::size_t n = cost.size();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  BruteAssignment best;
  best.cost = std::numeric_limits<double>::infinity();
  do {
    double c = 0.0;
    for (std::size_t i = 0; i < n; ++i) c += cost[i][perm[i]];
    if (c < best.cost - tol) {
      best.cost = c;
      best.permutation = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

namespace {

double gauss(double x, double var) {
  return std::exp(-x * x / (2.0 * var)) / std::sqrt(2.0 * std::numbers::pi * var);
}

// composite Simpson on [lo, hi] with an even number of panels
template <class F>
double simpson(F f, double lo, double hi, int panels) {
  if (panels % 2 != 0) ++panels;
  const double h = (hi - lo) / panels;
  double s = f(lo) + f(hi);
  for (int i = 1; i < panels; ++i) s += (i % 2 == 1 ? 4.0 : 2.0) * f(lo + i * h);
  return s * h / 3.0;
}

}  // namespace

double absorbed_second_moment(double a, double t, double rate, int panels) {
  if (a <= 0.0) return 0.0;
  const double var = rate * t;
  const double hi = a + 12.0 * std::sqrt(var);
  return simpson([&](double x) { return x * x * (gauss(x - a, var) - gauss(x + a, var)); }, 0.0, hi, panels);
}

double meeting_probability(double gap, double t) {
  // the difference is a Brownian motion of variance rate 2
  return std::erfc(gap / std::sqrt(2.0 * 2.0 * t));
}

double stopped_hitting_mean(double c, double horizon, int panels) {
  if (c == 0.0) return 0.0;
  const double a = std::abs(c);
  return simpson([&](double s) { return s <= 0.0 ? 1.0 : std::erf(a / std::sqrt(2.0 * s)); }, 0.0, horizon,
                 panels);
}

double box_self_convolution(double z, double w) {
  // overlap length of [0, w] and [-z, w - z], times (w^{-1/2})^2
  const double overlap = std::max(0.0, w - std::abs(z));
  return overlap / w;
}

}  // namespace hflow::oracle
