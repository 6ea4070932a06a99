#pragma once

#include <functional>
#include <span>

namespace twophase::stats {

struct Summary {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double std_error = 0.0;
  std::size_t n = 0;
};

Summary summarize(std::span<const double> x);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Ordinary least squares y ~ intercept + slope x.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

/// sup |F_n - F| for a continuous CDF F. Sorts a copy of the sample.
double ks_statistic(std::span<const double> sample, const std::function<double(double)>& cdf);

/// Asymptotic p-value of the KS statistic with Stephens' small-n correction.
double ks_pvalue(double d, std::size_t n);

/// Lag-1 sample autocorrelation.
double lag1_autocorrelation(std::span<const double> x);

struct RatioEstimate {
  double ratio = 0.0;
  double std_error = 0.0;  // delta method
};

/// mean(num) / mean(den) over paired observations.
RatioEstimate ratio_estimate(std::span<const double> num, std::span<const double> den);

}  // namespace twophase::stats
