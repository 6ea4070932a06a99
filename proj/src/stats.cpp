#include "twophase/stats.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "twophase/error.hpp"

namespace twophase::stats {

Summary summarize(std::span<const double> x) {
  Summary s;
  s.n = x.size();
  if (x.empty()) return s;
  // Welford keeps the variance accurate for large means.
  double mean = 0.0, m2 = 0.0;
  std::size_t k = 0;
  for (double v : x) {
    ++k;
    const double d = v - mean;
    mean += d / static_cast<double>(k);
    m2 += d * (v - mean);
  }
  s.mean = mean;
  if (s.n > 1) {
    s.variance = m2 / static_cast<double>(s.n - 1);
    s.std_error = std::sqrt(s.variance / static_cast<double>(s.n));
  }
  return s;
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "linear_fit needs >= 2 paired points");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  LinearFit f;
  f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  f.r_squared = (sxx > 0.0 && syy > 0.0) ? (sxy * sxy) / (sxx * syy) : 0.0;
  return f;
}

double ks_statistic(std::span<const double> sample, const std::function<double(double)>& cdf) {
  std::vector<double> s(sample.begin(), sample.end());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = cdf(s[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_pvalue(double d, std::size_t n) {
  const double rn = std::sqrt(static_cast<double>(n));
  const double lambda = (rn + 0.12 + 0.11 / rn) * d;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

double lag1_autocorrelation(std::span<const double> x) {
  if (x.size() < 3) return 0.0;
  const double m = summarize(x).mean;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - m;
    den += d * d;
    if (i + 1 < x.size()) num += d * (x[i + 1] - m);
  }
  return den > 0.0 ? num / den : 0.0;
}

RatioEstimate ratio_estimate(std::span<const double> num, std::span<const double> den) {
  if (num.size() != den.size() || num.empty()) {
    throw Error(ErrorCode::InvalidArgument, "ratio_estimate needs paired, non-empty samples");
  }
  const double my = summarize(num).mean;
  const double mx = summarize(den).mean;
  RatioEstimate r;
  r.ratio = my / mx;
  if (num.size() > 1) {
    std::vector<double> resid(num.size());
    for (std::size_t i = 0; i < num.size(); ++i) resid[i] = num[i] - r.ratio * den[i];
    const auto s = summarize(resid);
    r.std_error = s.std_error / std::abs(mx);
  }
  return r;
}

}  // namespace twophase::stats
