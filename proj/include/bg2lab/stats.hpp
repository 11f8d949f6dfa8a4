#ifndef BG2LAB_STATS_HPP
#define BG2LAB_STATS_HPP

#include <cmath>
#include <span>
#include <vector>

#include "bg2lab/errors.hpp"

namespace bg2lab {

struct MeanSE {
  double mean = 0;
  double se = 0;  // standard error of the mean
};

inline MeanSE mean_se(std::span<const double> xs) {
  const std::size_t m = xs.size();
  if (m == 0) return {};
  double mean = 0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(m);
  if (m == 1) return {mean, 0};
  double ss = 0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double var = ss / static_cast<double>(m - 1);
  return {mean, std::sqrt(var / static_cast<double>(m))};
}

struct LineFit {
  double slope = 0;
  double intercept = 0;
  double residual_rms = 0;
};

/// Ordinary least squares of y on x.
inline LineFit ols(std::span<const double> x, std::span<const double> y) {
  const std::size_t m = x.size();
  if (m < 2 || y.size() != m) throw ValidationError("ols needs >= 2 matched points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < m; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0) throw ValidationError("ols: degenerate abscissae");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double rr = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    rr += r * r;
  }
  f.residual_rms = std::sqrt(rr / static_cast<double>(m));
  return f;
}

}  // namespace bg2lab

#endif
