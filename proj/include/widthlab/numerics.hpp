// numerics.hpp - shared numeric utilities: RMS norms and log-log power-law fits.

#ifndef WIDTHLAB_NUMERICS_HPP
#define WIDTHLAB_NUMERICS_HPP

#include <cstddef>
#include <utility>
#include <vector>

namespace widthlab {

// Result of an ordinary least-squares fit of log y against log x:
// y ~ exp(log_coefficient) * x^exponent.
struct PowerLawFit {
  double exponent = 0.0;
  double log_coefficient = 0.0;  // natural log of the coefficient
  double residual_rms = 0.0;     // RMS of log-space residuals, >= 0
  std::size_t n_points = 0;      // >= 2
};

// sqrt(mean of squared entries). For matrices callers pass the flattened
// entries; the mean always runs over every entry. Throws
// std::invalid_argument when the input is empty.
double rms_norm(const double* data, std::size_t count);
double rms_norm(const std::vector<double>& x);

// Unweighted OLS in log-log space. Requires >= 2 points, strictly positive
// x and y, and distinct x values; violations throw std::invalid_argument.
PowerLawFit fit_power_law(const std::vector<std::pair<double, double>>& points);

}  // namespace widthlab

#endif  // WIDTHLAB_NUMERICS_HPP
