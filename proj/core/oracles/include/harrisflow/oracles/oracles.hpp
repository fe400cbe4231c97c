#pragma once

#include <cstddef>
#include <vector>

// Slow, obviously-correct reference computations used to check the core
// library. Nothing here calls into harrisflow itself.
namespace hflow::oracle {

struct LpResult {
  bool feasible = false;
  double objective = 0.0;
  std::vector<double> x;
};

// min c.x subject to A x = b, x >= 0 (A is rows x cols, row-major), by a
// dense two-phase tableau simplex with Bland's rule.
LpResult solve_lp(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                  const std::vector<double>& c);

// W1 between two finite measures on the line as the transportation LP over
// all couplings with cost |x - y|.
double lp_w1(const std::vector<double>& xa, const std::vector<double>& wa,
             const std::vector<double>& xb, const std::vector<double>& wb);

struct BruteAssignment {
  std::vector<std::size_t> permutation;
  double cost = 0.0;
};

// Enumerates all n! permutations in lexicographic order; keeps the first one
// whose cost beats the best so far by more than tol.
BruteAssignment brute_force_assignment(const std::vector<std::vector<double>>& cost, double tol = 1e-12);

// E[D(t)^2] for D = a + sqrt(rate) * B absorbed at 0, by quadrature of the
// killed transition density x^2 (p(x - a) - p(x + a)) over x > 0.
double absorbed_second_moment(double a, double t, double rate, int panels = 200000);

// P(two independent standard Brownian particles at distance gap meet by t).
double meeting_probability(double gap, double t);

// E[min(H, tau_c)] for standard Brownian motion and level c <= 0, by
// quadrature of P(tau_c > s) = erf(|c| / sqrt(2 s)) over [0, H].
double stopped_hitting_mean(double c, double horizon, int panels = 200000);

// Gamma(z) = integral of phi(z + q) phi(q) dq for phi = w^{-1/2} on an
// interval of length w.
double box_self_convolution(double z, double w);

}  // namespace hflow::oracle
