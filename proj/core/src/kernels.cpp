#include "harrisflow/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace hflow {

namespace {

constexpr double kNormTolerance = 1e-8;

double bump_shape(double x) {
  // x in units of the half-width
  if (std::abs(x) >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - x * x));
}

double trapezoid(double lo, double hi, int panels, auto&& f) {
  if (hi <= lo) return 0.0;
  const double h = (hi - lo) / panels;
  double sum = 0.5 * (f(lo) + f(hi));
  for (int j = 1; j < panels; ++j) sum += f(lo + j * h);
  return sum * h;
}

}  // namespace

SmoothingKernel::SmoothingKernel(SmoothingFamily family, double width, double normalization,
                                 std::vector<double> samples)
    : family_(family), width_(width), normalization_(normalization), samples_(std::move(samples)) {}

SmoothingKernel SmoothingKernel::box(double width) {
  if (!(width > 0.0)) throw std::invalid_argument("box kernel width must be positive");
  return SmoothingKernel(SmoothingFamily::box, width, 1.0 / std::sqrt(width), {});
}

SmoothingKernel SmoothingKernel::bump(double width) {
  if (!(width > 0.0)) throw std::invalid_argument("bump kernel width must be positive");
  SmoothingKernel k(SmoothingFamily::bump, width, 1.0, {});
  const double half = 0.5 * width;
  const double raw = trapezoid(-half, half, 1 << 16, [&](double q) {
    const double s = bump_shape(q / half);
    return s * s;
  });
  k.normalization_ = 1.0 / std::sqrt(raw);
  return k;
}

SmoothingKernel SmoothingKernel::sampled(double width, std::vector<double> samples) {
  if (!(width > 0.0)) throw std::invalid_argument("sampled kernel width must be positive");
  if (samples.size() < 2) throw std::invalid_argument("sampled kernel needs at least two samples");
  SmoothingKernel k(SmoothingFamily::sampled, width, 1.0, std::move(samples));
  const double raw = k.squared_norm();
  if (!(raw > 0.0)) throw std::invalid_argument("sampled kernel is identically zero");
  k.normalization_ = 1.0 / std::sqrt(raw);
  return k;
}

SmoothingKernel SmoothingKernel::sampled_raw(double width, std::vector<double> samples) {
  if (!(width > 0.0)) throw std::invalid_argument("sampled kernel width must be positive");
  if (samples.size() < 2) throw std::invalid_argument("sampled kernel needs at least two samples");
  return SmoothingKernel(SmoothingFamily::sampled, width, 1.0, std::move(samples));
}

double SmoothingKernel::shape(double q) const {
  const double half = 0.5 * width_;
  if (std::abs(q) > half) return 0.0;
  switch (family_) {
    case SmoothingFamily::box:
      return 1.0;
    case SmoothingFamily::bump:
      return bump_shape(q / half);
    case SmoothingFamily::sampled: {
      const double m = static_cast<double>(samples_.size() - 1);
      const double t = (q + half) / width_ * m;
      auto i = static_cast<std::size_t>(t);
      if (i >= samples_.size() - 1) return samples_.back();
      const double frac = t - static_cast<double>(i);
      return samples_[i] + frac * (samples_[i + 1] - samples_[i]);
    }
  }
  return 0.0;
}

double SmoothingKernel::operator()(double q) const { return normalization_ * shape(q); }

double SmoothingKernel::squared_norm(int intervals) const {
  if (family_ == SmoothingFamily::sampled) {
    // exact for the piecewise-linear interpolant
    const double h = width_ / static_cast<double>(samples_.size() - 1);
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < samples_.size(); ++i) {
      const double a = samples_[i];
      const double b = samples_[i + 1];
      sum += (a * a + a * b + b * b) / 3.0;
    }
    return normalization_ * normalization_ * sum * h;
  }
  const double half = 0.5 * width_;
  return trapezoid(-half, half, intervals, [&](double q) {
    const double v = (*this)(q);
    return v * v;
  });
}

CovarianceKernel::CovarianceKernel(CovarianceForm form, double diameter,
                                   std::vector<double> half_grid)
    : form_(form), diameter_(diameter), half_grid_(std::move(half_grid)) {
  if (form_ == CovarianceForm::sampled_grid) {
    inv_step_ = static_cast<double>(half_grid_.size() - 1) / interaction_radius();
  }
}

CovarianceKernel CovarianceKernel::triangle(double support_diameter) {
  if (!(support_diameter > 0.0)) {
    throw std::invalid_argument("triangle kernel needs a positive support diameter");
  }
  return CovarianceKernel(CovarianceForm::triangle, support_diameter, {});
}

CovarianceKernel CovarianceKernel::indicator() {
  return CovarianceKernel(CovarianceForm::indicator, 0.0, {});
}

CovarianceKernel CovarianceKernel::sampled(double support_diameter, std::vector<double> half_grid) {
  if (!(support_diameter > 0.0)) {
    throw std::invalid_argument("sampled kernel needs a positive support diameter");
  }
  if (half_grid.size() < 2) throw std::invalid_argument("sampled kernel needs at least two nodes");
  return CovarianceKernel(CovarianceForm::sampled_grid, support_diameter, std::move(half_grid));
}

double CovarianceKernel::operator()(double z) const {
  const double a = std::abs(z);
  switch (form_) {
    case CovarianceForm::indicator:
      return a == 0.0 ? 1.0 : 0.0;
    case CovarianceForm::triangle: {
      const double r = interaction_radius();
      return a >= r ? 0.0 : 1.0 - a / r;
    }
    case CovarianceForm::sampled_grid: {
      if (a >= interaction_radius()) return 0.0;
      const double t = a * inv_step_;
      auto i = static_cast<std::size_t>(t);
      if (i + 1 >= half_grid_.size()) return half_grid_.back();
      const double frac = t - static_cast<double>(i);
      return half_grid_[i] + frac * (half_grid_[i + 1] - half_grid_[i]);
    }
  }
  return 0.0;
}

CovarianceKernel gamma_from_phi(const SmoothingKernel& phi, int quad_points, int grid_points) {
  if (quad_points < 64) throw std::invalid_argument("gamma_from_phi: quad_points must be >= 64");
  if (grid_points < 2 || grid_points % 2 != 0) {
    throw std::invalid_argument("gamma_from_phi: grid_points must be a positive even number");
  }
  if (std::abs(phi.squared_norm() - 1.0) > kNormTolerance) {
    throw std::invalid_argument("gamma_from_phi: phi is not normalized (integral of phi^2 != 1)");
  }
  const double w = phi.width();
  const double half = 0.5 * w;
  const int m = grid_points / 2;
  const double h = w / m;
  std::vector<double> grid(static_cast<std::size_t>(m) + 1, 0.0);
  for (int i = 0; i < m; ++i) {
    const double z = i * h;
    // overlap of supp phi(. + z) and supp phi is [-w/2, w/2 - z] for z >= 0
    grid[static_cast<std::size_t>(i)] =
        trapezoid(-half, half - z, quad_points, [&](double q) {
          // z + q can round past the support edge at the upper limit
          return phi(std::min(z + q, half)) * phi(q);
        });
  }
  return CovarianceKernel::sampled(2.0 * w, std::move(grid));
}

CovarianceKernel make_kernel(const KernelSpec& spec) {
  if (spec.family == "indicator" || spec.family == "arratia") return CovarianceKernel::indicator();
  if (!(spec.d_gamma > 0.0)) {
    throw std::invalid_argument("kernel d_gamma must be positive for family '" + spec.family + "'");
  }
  if (spec.family == "triangle") return CovarianceKernel::triangle(spec.d_gamma);
  if (spec.family == "box") return gamma_from_phi(SmoothingKernel::box(0.5 * spec.d_gamma));
  if (spec.family == "bump") return gamma_from_phi(SmoothingKernel::bump(0.5 * spec.d_gamma));
  throw std::invalid_argument("unknown kernel family '" + spec.family +
                              "' (valid: box, bump, triangle, indicator)");
}

}  // namespace hflow
