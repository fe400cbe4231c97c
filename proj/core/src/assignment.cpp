#include "harrisflow/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>
#include <utility>

namespace hflow {

CostMatrix::CostMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) throw std::invalid_argument("CostMatrix: size mismatch");
}

namespace {

double max_abs(const CostMatrix& cost) {
  double m = 0.0;
  for (double v : cost.data()) {
    if (!std::isfinite(v)) throw std::invalid_argument("cost matrix has non-finite entries");
    m = std::max(m, std::abs(v));
  }
  return m;
}

// Moves `match` to the lexicographically smallest perfect matching inside
// the equality subgraph {(i, j) : reduced(i, j) <= tol}.
void lexicographic_refine(const CostMatrix& cost, const std::vector<double>& u,
                          const std::vector<double>& v, double tol,
                          std::vector<std::size_t>& col_of_row) {
  const std::size_t n = cost.rows();
  constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
  auto tight = [&](std::size_t i, std::size_t j) { return cost(i, j) - u[i] - v[j] <= tol; };
  std::vector<std::size_t> row_of_col(n);
  for (std::size_t i = 0; i < n; ++i) row_of_col[col_of_row[i]] = i;
  std::vector<bool> col_fixed(n, false);
  std::vector<std::size_t> parent_row(n);
  std::vector<bool> seen(n);

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (col_fixed[j] || !tight(i, j)) continue;
      if (col_of_row[i] == j) break;
      // Try to re-match: i takes j, the row holding j must reach i's old column
      // through an alternating path over unfixed rows and columns.
      const std::size_t target = col_of_row[i];
      const std::size_t start = row_of_col[j];
      std::fill(seen.begin(), seen.end(), false);
      seen[j] = true;
      std::deque<std::size_t> queue{start};
      std::size_t found = none;
      // parent_row[c] = row from which column c was reached
      while (!queue.empty() && found == none) {
        const std::size_t r = queue.front();
        queue.pop_front();
        for (std::size_t c = 0; c < n; ++c) {
          if (seen[c] || col_fixed[c] || !tight(r, c)) continue;
          seen[c] = true;
          parent_row[c] = r;
          if (c == target) {
            found = c;
            break;
          }
          queue.push_back(row_of_col[c]);
        }
      }
      if (found == none) continue;
      // unwind: each row on the path takes the column it reached
      std::size_t c = found;
      for (;;) {
        const std::size_t r = parent_row[c];
        const std::size_t prev = col_of_row[r];
        col_of_row[r] = c;
        row_of_col[c] = r;
        if (r == start) break;
        c = prev;
      }
      col_of_row[i] = j;
      row_of_col[j] = i;
      break;
    }
    col_fixed[col_of_row[i]] = true;
  }
}

}  // namespace

Assignment assignment_solve(const CostMatrix& cost) {
  if (cost.rows() != cost.cols()) {
    throw std::invalid_argument("assignment_solve: cost matrix must be square");
  }
  const std::size_t n = cost.rows();
  Assignment out;
  if (n == 0) return out;
  const double scale = max_abs(cost);
  constexpr double inf = std::numeric_limits<double>::infinity();

  // 1-based potentials; p[j] = row matched to column j, 0 = free.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<bool> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  out.column_of_row.assign(n, 0);
  for (std::size_t j = 1; j <= n; ++j) out.column_of_row[p[j] - 1] = j - 1;
  std::vector<double> row_pot(u.begin() + 1, u.end());
  std::vector<double> col_pot(v.begin() + 1, v.end());
  lexicographic_refine(cost, row_pot, col_pot, 1e-11 * (1.0 + scale), out.column_of_row);
  for (std::size_t i = 0; i < n; ++i) out.total_cost += cost(i, out.column_of_row[i]);
  return out;
}

TransportPlan solve_uniform_transport(const CostMatrix& cost) {
  const std::size_t R = cost.rows();
  const std::size_t C = cost.cols();
  if (R == 0 || C == 0) throw std::invalid_argument("solve_uniform_transport: empty matrix");
  const double tol = 1e-12 * (1.0 + max_abs(cost));

  TransportPlan plan;
  plan.flow.assign(R, std::vector<long long>(C, 0));
  std::vector<std::vector<bool>> basic(R, std::vector<bool>(C, false));
  std::vector<std::pair<std::size_t, std::size_t>> basis;

  // northwest corner: rows ship C units, columns take R units
  {
    std::vector<long long> supply(R, static_cast<long long>(C));
    std::vector<long long> demand(C, static_cast<long long>(R));
    std::size_t i = 0, j = 0;
    while (i < R && j < C) {
      const long long q = std::min(supply[i], demand[j]);
      plan.flow[i][j] = q;
      basic[i][j] = true;
      basis.emplace_back(i, j);
      supply[i] -= q;
      demand[j] -= q;
      if (supply[i] == 0 && i + 1 < R) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  // Nodes 0..R-1 are rows, R..R+C-1 columns; basic cells are tree edges.
  const std::size_t nodes = R + C;
  std::vector<double> pot(nodes);
  std::vector<bool> known(nodes);
  std::vector<std::vector<std::size_t>> adj(nodes);
  std::vector<std::size_t> parent(nodes);
  std::size_t degenerate_streak = 0;

  for (std::size_t iter = 0;; ++iter) {
    for (auto& a : adj) a.clear();
    for (const auto& [r, c] : basis) {
      adj[r].push_back(R + c);
      adj[R + c].push_back(r);
    }
    // potentials: pot[row] + pot[col] = cost on basic cells
    std::fill(known.begin(), known.end(), false);
    known[0] = true;
    pot[0] = 0.0;
    std::deque<std::size_t> queue{0};
    while (!queue.empty()) {
      const std::size_t x = queue.front();
      queue.pop_front();
      for (std::size_t y : adj[x]) {
        if (known[y]) continue;
        const std::size_t r = x < R ? x : y;
        const std::size_t c = (x < R ? y : x) - R;
        pot[y] = cost(r, c) - pot[x];
        known[y] = true;
        queue.push_back(y);
      }
    }

    // Dantzig pricing; Bland's smallest-index rule while pivots stay degenerate
    const bool bland = degenerate_streak > 32;
    std::size_t er = R, ec = C;
    double best = -tol;
    for (std::size_t r = 0; r < R && !(bland && er < R); ++r) {
      for (std::size_t c = 0; c < C; ++c) {
        if (basic[r][c]) continue;
        const double red = cost(r, c) - pot[r] - pot[R + c];
        if (red < best) {
          best = red;
          er = r;
          ec = c;
          if (bland) break;
        }
      }
    }
    if (er == R) break;

    // tree path from row er to column ec
    std::fill(known.begin(), known.end(), false);
    known[er] = true;
    queue.assign(1, er);
    while (!queue.empty()) {
      const std::size_t x = queue.front();
      queue.pop_front();
      if (x == R + ec) break;
      for (std::size_t y : adj[x]) {
        if (known[y]) continue;
        known[y] = true;
        parent[y] = x;
        queue.push_back(y);
      }
    }
    // cells along the path from the column end: '-', '+', '-', ...
    std::vector<std::pair<std::size_t, std::size_t>> cycle;
    for (std::size_t y = R + ec; y != er; y = parent[y]) {
      const std::size_t x = parent[y];
      const std::size_t r = x < R ? x : y;
      const std::size_t c = (x < R ? y : x) - R;
      cycle.emplace_back(r, c);
    }
    long long theta = std::numeric_limits<long long>::max();
    std::size_t leave = cycle.size();
    for (std::size_t t = 0; t < cycle.size(); t += 2) {
      const auto [r, c] = cycle[t];
      const long long f = plan.flow[r][c];
      if (f < theta || (f == theta && cycle[t] < cycle[leave])) {
        theta = f;
        leave = t;
      }
    }
    for (std::size_t t = 0; t < cycle.size(); ++t) {
      const auto [r, c] = cycle[t];
      plan.flow[r][c] += (t % 2 == 0) ? -theta : theta;
    }
    plan.flow[er][ec] += theta;
    degenerate_streak = theta == 0 ? degenerate_streak + 1 : 0;

    const auto out_cell = cycle[leave];
    basic[out_cell.first][out_cell.second] = false;
    basic[er][ec] = true;
    *std::find(basis.begin(), basis.end(), out_cell) = {er, ec};
    if (iter > 100 * R * C + 1000) throw std::runtime_error("solve_uniform_transport: no convergence");
  }

  double total = 0.0;
  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t c = 0; c < C; ++c) {
      if (plan.flow[r][c] != 0) total += static_cast<double>(plan.flow[r][c]) * cost(r, c);
    }
  }
  plan.mean_cost = total / (static_cast<double>(R) * static_cast<double>(C));
  return plan;
}

}  // namespace hflow
