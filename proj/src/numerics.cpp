// numerics.cpp - RMS norm and log-log least-squares power-law fitting.

#include "widthlab/numerics.hpp"

#include <cmath>
#include <stdexcept>

namespace widthlab {

double rms_norm(const double* data, std::size_t count) {
  if (count == 0) throw std::invalid_argument("rms_norm: empty input");
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < count; ++i) sum_sq += data[i] * data[i];
  return std::sqrt(sum_sq / static_cast<double>(count));
}

double rms_norm(const std::vector<double>& x) { return rms_norm(x.data(), x.size()); }

PowerLawFit fit_power_law(const std::vector<std::pair<double, double>>& points) {
  const std::size_t n = points.size();
  if (n < 2) throw std::invalid_argument("fit_power_law: need at least 2 points");
  for (const auto& [x, y] : points) {
    if (!(x > 0.0) || !(y > 0.0))
      throw std::invalid_argument("fit_power_law: x and y must be strictly positive");
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (points[i].first == points[j].first)
        throw std::invalid_argument("fit_power_law: duplicate x value");

  // OLS slope/intercept on (log x, log y), centered for numerical stability.
  double mean_lx = 0.0, mean_ly = 0.0;
  for (const auto& [x, y] : points) {
    mean_lx += std::log(x);
    mean_ly += std::log(y);
  }
  mean_lx /= static_cast<double>(n);
  mean_ly /= static_cast<double>(n);

  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : points) {
    const double dx = std::log(x) - mean_lx;
    sxx += dx * dx;
    sxy += dx * (std::log(y) - mean_ly);
  }

  PowerLawFit fit;
  fit.n_points = n;
  fit.exponent = sxy / sxx;
  fit.log_coefficient = mean_ly - fit.exponent * mean_lx;

  double ss_res = 0.0;
  for (const auto& [x, y] : points) {
    const double r = std::log(y) - (fit.log_coefficient + fit.exponent * std::log(x));
    ss_res += r * r;
  }
  fit.residual_rms = std::sqrt(ss_res / static_cast<double>(n));
  return fit;
}

}  // namespace widthlab
