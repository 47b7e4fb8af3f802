#pragma once

// Sample statistics used by the verification harness.

#include <algorithm>
#include <cmath>
#include <vector>

namespace saddle {

/// Two-sample Kolmogorov-Smirnov statistic: sup distance between the
/// empirical CDFs. Throws on empty input.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

/// One-sample KS statistic against an analytic CDF.
template <typename Cdf>
double ks_one_sample(std::vector<double> sample, const Cdf& cdf);

struct RegressionFit {
  double slope = 0;
  double intercept = 0;
  double stderr_slope = 0;
};

/// Least squares of ln(spread) on ln(eps); the slope estimates the scaling
/// exponent beta. Requires >= 3 grid points and positive spreads.
RegressionFit scaling_regression(const std::vector<double>& eps_grid,
                                 const std::vector<double>& spread_per_eps);

/// Interquartile range (linear-interpolation quantiles).
double interquartile_range(std::vector<double> sample);

double sample_mean(const std::vector<double>& v);
double sample_variance(const std::vector<double>& v);

// ---------------------------------------------------------------------------

template <typename Cdf>
double ks_one_sample(std::vector<double> sample, const Cdf& cdf) {
  std::sort(sample.begin(), sample.end());
  double n = static_cast<double>(sample.size());
  double d = 0;
  for (size_t i = 0; i < sample.size(); ++i) {
    double F = cdf(sample[i]);
    d = std::max(d, std::max((i + 1) / n - F, F - i / n));
  }
  return d;
}

}  // namespace saddle
