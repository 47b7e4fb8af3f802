#include "saddle/stats.hpp"

#include <stdexcept>

namespace saddle {

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  size_t i = 0, j = 0;
  double d = 0;
  while (i < a.size() && j < b.size()) {
    double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  return d;
}

RegressionFit scaling_regression(const std::vector<double>& eps_grid,
                                 const std::vector<double>& spread_per_eps) {
  if (eps_grid.size() < 3 || eps_grid.size() != spread_per_eps.size())
    throw std::invalid_argument("scaling_regression: need >= 3 matched grid points");
  std::vector<double> lx, ly;
  for (size_t i = 0; i < eps_grid.size(); ++i) {
    if (eps_grid[i] <= 0 || spread_per_eps[i] <= 0)
      throw std::invalid_argument("scaling_regression: grid and spreads must be positive");
    lx.push_back(std::log(eps_grid[i]));
    ly.push_back(std::log(spread_per_eps[i]));
  }
  double n = static_cast<double>(lx.size());
  double mx = sample_mean(lx), my = sample_mean(ly);
  double sxx = 0, sxy = 0;
  for (size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  RegressionFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0;
  for (size_t i = 0; i < lx.size(); ++i) {
    double r = ly[i] - fit.intercept - fit.slope * lx[i];
    rss += r * r;
  }
  fit.stderr_slope = n > 2 ? std::sqrt(rss / (n - 2) / sxx) : 0.0;
  return fit;
}

double interquartile_range(std::vector<double> v) {
  if (v.size() < 4) throw std::invalid_argument("interquartile_range: sample too small");
  std::sort(v.begin(), v.end());
  auto quantile = [&](double q) {
    double pos = q * (v.size() - 1);
    size_t lo = static_cast<size_t>(pos);
    double frac = pos - lo;
    return lo + 1 < v.size() ? v[lo] * (1 - frac) + v[lo + 1] * frac : v[lo];
  };
  return quantile(0.75) - quantile(0.25);
}

double sample_mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_variance(const std::vector<double>& v) {
  double m = sample_mean(v), s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return s / (static_cast<double>(v.size()) - 1);
}

}  // namespace saddle
