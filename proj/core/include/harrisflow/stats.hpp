#pragma once

#include <cstddef>
#include <span>
#include <string>

namespace hflow {

// Sample mean with its standard error; the 95% interval is mean +- 1.96 se.
struct Estimate {
  double mean = 0.0;
  double se = 0.0;
  std::size_t count = 0;

  double ci_low() const { return mean - 1.96 * se; }
  double ci_high() const { return mean + 1.96 * se; }
};

// Two-pass mean and standard error, summed in index order.
Estimate estimate_mean(std::span<const double> values);
double sample_variance(std::span<const double> values);

// pass: upper CI limit at or below the bound; fail: lower CI limit above it;
// warn: the interval straddles the bound.
enum class Verdict { pass, warn, fail };

std::string to_string(Verdict v);
Verdict check_upper_bound(const Estimate& e, double bound);
Verdict worst(Verdict a, Verdict b);

double normal_cdf(double x);
double normal_quantile(double p);
double chi_square_quantile(double p, double dof);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Two-sample Kolmogorov-Smirnov test. +infinity is a valid sample value.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);
// Asymptotic Kolmogorov survival function Q(lambda).
double kolmogorov_survival(double lambda);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

// Ordinary least squares y = intercept + slope * x. Needs >= 2 distinct x.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace hflow
