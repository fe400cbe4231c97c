#pragma once

#include <string>
#include <vector>

namespace hflow {

enum class SmoothingFamily { box, bump, sampled };

// A square-integrable smoothing function phi with compact support, centred on
// [-width/2, width/2] and scaled so that the integral of phi^2 is one.
// Immutable after construction.
class SmoothingKernel {
 public:
  // phi = width^{-1/2} on the support interval.
  static SmoothingKernel box(double width);
  // phi proportional to exp(-1 / (1 - (2q/width)^2)); smooth with compact support.
  static SmoothingKernel bump(double width);
  // Uniform samples over the support (endpoints included), linearly
  // interpolated. Samples are rescaled so that the L2 norm is one.
  static SmoothingKernel sampled(double width, std::vector<double> samples);
  // As sampled(), but the samples are used verbatim (no rescaling).
  static SmoothingKernel sampled_raw(double width, std::vector<double> samples);

  double operator()(double q) const;

  SmoothingFamily family() const { return family_; }
  double width() const { return width_; }
  double normalization() const { return normalization_; }

  // Integral of phi^2, composite trapezoid with `intervals` panels.
  double squared_norm(int intervals = 1 << 14) const;

 private:
  SmoothingKernel(SmoothingFamily family, double width, double normalization,
                  std::vector<double> samples);

  double shape(double q) const;

  SmoothingFamily family_;
  double width_;
  double normalization_;
  std::vector<double> samples_;
};

enum class CovarianceForm { triangle, sampled_grid, indicator };

// Covariance function Gamma of a Harris flow: symmetric, Gamma(0) = 1,
// Gamma(z) = 0 for |z| > support_diameter()/2.
class CovarianceKernel {
 public:
  // Gamma(z) = max(0, 1 - |z| / (d/2)); the self-convolution of a box of width d/2.
  static CovarianceKernel triangle(double support_diameter);
  // Gamma = 1{0}; the Arratia flow.
  static CovarianceKernel indicator();
  // Samples of Gamma at z = i * h, i = 0..m, with h = (d/2)/m. Evaluation
  // mirrors through zero, so symmetry is exact.
  static CovarianceKernel sampled(double support_diameter, std::vector<double> half_grid);

  double operator()(double z) const;

  CovarianceForm form() const { return form_; }
  double support_diameter() const { return diameter_; }
  // Gamma vanishes for |z| >= interaction_radius().
  double interaction_radius() const { return 0.5 * diameter_; }
  const std::vector<double>& half_grid() const { return half_grid_; }

 private:
  CovarianceKernel(CovarianceForm form, double diameter, std::vector<double> half_grid);

  CovarianceForm form_;
  double diameter_;
  std::vector<double> half_grid_;
  double inv_step_ = 0.0;
};

inline double eval_gamma(const CovarianceKernel& kernel, double z) { return kernel(z); }

// Gamma(z) = integral of phi(z + q) phi(q) dq, tabulated on `grid_points`
// intervals across the support (half of them on z >= 0) and mirrored.
// Each value uses a composite trapezoid with `quad_points` panels over the
// overlap of the two shifted supports.
CovarianceKernel gamma_from_phi(const SmoothingKernel& phi, int quad_points = 256,
                                int grid_points = 1024);

// Kernel section of the experiment config: {"family": box|bump|triangle|indicator,
// "d_gamma": d}. d_gamma is the support diameter of Gamma.
struct KernelSpec {
  std::string family = "box";
  double d_gamma = 1e-2;
};

CovarianceKernel make_kernel(const KernelSpec& spec);

}  // namespace hflow
