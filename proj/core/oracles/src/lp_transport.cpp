#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "harrisflow/oracles/oracles.hpp"

namespace hflow::oracle {

namespace {

constexpr double tol = 1e-12;

struct Tableau {
  std::vector<std::vector<double>> t;  // m constraint rows + objective row
  std::vector<std::size_t> basis;
  std::size_t m = 0;
  std::size_t cols = 0;  // excluding rhs

  double& rhs(std::size_t r) { return t[r][cols]; }

  void pivot(std::size_t r, std::size_t c) {
    const double p = t[r][c];
    for (double& v : t[r]) v /= p;
    for (std::size_t i = 0; i <= m; ++i) {
      if (i == r || t[i][c] == 0.0) continue;
      const double f = t[i][c];
      for (std::size_t j = 0; j <= cols; ++j) t[i][j] -= f * t[r][j];
    }
    basis[r] = c;
  }

  // Bland's rule over columns [0, allowed).
  void run(std::size_t allowed) {
    for (int guard = 0; guard < 100000; ++guard) {
      std::size_t enter = allowed;
      for (std::size_t j = 0; j < allowed; ++j) {
        if (t[m][j] < -tol) {
          enter = j;
          break;
        }
      }
      if (enter == allowed) return;
      std::size_t leave = m;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m; ++i) {
        if (t[i][enter] > tol) {
          const double ratio = rhs(i) / t[i][enter];
          if (ratio < best - tol || (std::abs(ratio - best) <= tol && basis[i] < basis[leave])) {
            best = ratio;
            leave = i;
          }
        }
      }
      if (leave == m) throw std::runtime_error("solve_lp: unbounded");
      pivot(leave, enter);
    }
    throw std::runtime_error("solve_lp: iteration limit");
  }
};

}  // namespace

LpResult solve_lp(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                  const std::vector<double>& c) {
  const std::size_t m = A.size();
  const std::size_t n = c.size();
  Tableau tab;
  tab.m = m;
  tab.cols = n + m;
  tab.t.assign(m + 1, std::vector<double>(n + m + 1, 0.0));
  tab.basis.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double sign = b[i] < 0.0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < n; ++j) tab.t[i][j] = sign * A[i][j];
    tab.t[i][n + i] = 1.0;
    tab.t[i][n + m] = sign * b[i];
    tab.basis[i] = n + i;
  }
  // phase 1: minimize the sum of artificials
  for (std::size_t j = n; j < n + m; ++j) tab.t[m][j] = 1.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j <= n + m; ++j) tab.t[m][j] -= tab.t[i][j];
  }
  tab.run(n + m);
  LpResult out;
  if (-tab.t[m][n + m] > 1e-9) return out;
  for (std::size_t i = 0; i < m; ++i) {
    if (tab.basis[i] < n) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (std::abs(tab.t[i][j]) > 1e-9) {
        tab.pivot(i, j);
        break;
      }
    }
  }
  // phase 2
  std::fill(tab.t[m].begin(), tab.t[m].end(), 0.0);
  for (std::size_t j = 0; j < n; ++j) tab.t[m][j] = c[j];
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t bj = tab.basis[i];
    const double cb = bj < n ? c[bj] : 0.0;
    if (cb == 0.0) continue;
    for (std::size_t j = 0; j <= n + m; ++j) tab.t[m][j] -= cb * tab.t[i][j];
  }
  tab.run(n);
  out.feasible = true;
  out.x.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    if (tab.basis[i] < n) out.x[tab.basis[i]] = tab.rhs(i);
  }
  out.objective = 0.0;
  for (std::size_t j = 0; j < n; ++j) out.objective += c[j] * out.x[j];
  return out;
}

double lp_w1(const std::vector<double>& xa, const std::vector<double>& wa,
             const std::vector<double>& xb, const std::vector<double>& wb) {
  const std::size_t p = xa.size(), q = xb.size();
  std::vector<std::vector<double>> A(p + q, std::vector<double>(p * q, 0.0));
  std::vector<double> b(p + q), c(p * q);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < q; ++j) {
      A[i][i * q + j] = 1.0;
      A[p + j][i * q + j] = 1.0;
      c[i * q + j] = std::abs(xa[i] - xb[j]);
    }
    b[i] = wa[i];
  }
  for (std::size_t j = 0; j < q; ++j) b[p + j] = wb[j];
  const LpResult r = solve_lp(A, b, c);
  if (!r.feasible) throw std::runtime_error("lp_w1: marginals do not balance");
  return r.objective;
}

}  // namespace hflow::oracle
