#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace hflow {

// Finite probability measure on the real line: strictly increasing atoms
// with positive weights summing to one (within 1e-12).
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;
  // Atoms in any order; duplicates are merged and zero weights dropped.
  DiscreteMeasure(std::vector<double> atoms, std::vector<double> weights);

  static DiscreteMeasure dirac(double x) { return DiscreteMeasure({x}, {1.0}); }
  // Equal weights 1/m on the given points (duplicates merged).
  static DiscreteMeasure uniform_on(std::span<const double> points);

  std::span<const double> atoms() const { return atoms_; }
  std::span<const double> weights() const { return weights_; }
  std::size_t size() const { return atoms_.size(); }
  bool operator==(const DiscreteMeasure&) const = default;

 private:
  std::vector<double> atoms_;
  std::vector<double> weights_;
};

// A probability measure on [0, 1] given by its distribution function F
// (right-continuous, F(1) = 1). Used where the initial measure has a density.
struct CdfMeasure {
  std::function<double(double)> cdf;
  // Left limit F(x-); defaults to F when empty (continuous F).
  std::function<double(double)> cdf_left;
};

CdfMeasure lebesgue_unit();

// Interval midpoints (2k - 1) / (2n), k = 1..n.
std::vector<double> midpoints(std::size_t n);

// mu^n: mass of [(k-1)/n, k/n) (last interval closed at 1) placed at the
// midpoint (2k-1)/(2n); zero-mass atoms dropped. Throws HypothesisError if
// the support of mu leaves [0, 1].
DiscreteMeasure discretize(const DiscreteMeasure& mu, std::size_t n);
DiscreteMeasure discretize(const CdfMeasure& mu, std::size_t n);

// Image of mu under the map labels[i] -> images[i]: each atom of mu must
// appear exactly among `labels`. Atoms with equal images merge.
DiscreteMeasure pushforward(const DiscreteMeasure& mu, std::span<const double> labels,
                            std::span<const double> images);

// Exact W1 on the line: integral of |F_a - F_b| over the merged support.
double w1_real(const DiscreteMeasure& a, const DiscreteMeasure& b);

// i.i.d. draws of a random measure.
struct MeasureEnsemble {
  std::vector<DiscreteMeasure> samples;
  std::string provenance;
};

struct EnsembleDistance {
  double value = 0.0;
  // Standard error of the transported per-unit costs, sd / sqrt(min(m, m')).
  double se = 0.0;
};

// W1 between the empirical laws of two ensembles, with the inner metric
// w1_real. Equal sizes solve an assignment problem exactly; unequal sizes
// solve the uniform-marginal transportation problem.
EnsembleDistance w1_ensembles(const MeasureEnsemble& a, const MeasureEnsemble& b);

}  // namespace hflow
