#pragma once

#include <cstddef>
#include <vector>

namespace hflow {

// Dense row-major real matrix.
class CostMatrix {
 public:
  CostMatrix() = default;
  CostMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  CostMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const std::vector<double>& data() const { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct Assignment {
  std::vector<std::size_t> column_of_row;
  double total_cost = 0.0;
};

// Minimum-cost perfect matching of a square matrix (Hungarian method with
// potentials, O(n^3)). Among optimal matchings the lexicographically
// smallest column_of_row is returned; ties are judged on reduced costs
// within 1e-11 * (1 + max |cost|). Throws std::invalid_argument for
// non-square or non-finite input.
Assignment assignment_solve(const CostMatrix& cost);

struct TransportPlan {
  // flow[r][c] in units where row r ships `cols` units and column c
  // receives `rows` units (uniform marginals scaled to integers).
  std::vector<std::vector<long long>> flow;
  // sum of flow * cost / (rows * cols)
  double mean_cost = 0.0;
};

// Uniform-marginal transportation problem (rows weight 1/rows, columns
// weight 1/cols) by the northwest-corner rule refined with the stepping-stone
// (MODI) method. Exact; works for any shape.
TransportPlan solve_uniform_transport(const CostMatrix& cost);

}  // namespace hflow
