#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "twophase/stats.hpp"

using namespace twophase;

TEST(Summary, MatchesTwoPassFormulas) {
  const std::vector<double> x{1e9 + 1, 1e9 + 2, 1e9 + 4, 1e9 + 8};
  const auto s = stats::summarize(x);
  EXPECT_DOUBLE_EQ(s.mean, 1e9 + 3.75);
  const double var = (2.75 * 2.75 + 1.75 * 1.75 + 0.25 * 0.25 + 4.25 * 4.25) / 3.0;
  EXPECT_NEAR(s.variance, var, 1e-6);
  EXPECT_NEAR(s.std_error, std::sqrt(var / 4.0), 1e-6);
  EXPECT_EQ(s.n, 4u);
}

TEST(LinearFit, ExactLine) {
  const std::vector<double> x{0, 1, 2, 3, 4}, y{1, 3, 5, 7, 9};
  const auto f = stats::linear_fit(x, y);
  EXPECT_NEAR(f.slope, 2.0, 1e-14);
  EXPECT_NEAR(f.intercept, 1.0, 1e-14);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-14);
}

TEST(LinearFit, RSquaredOfNoisyData) {
  const std::vector<double> x{0, 1, 2, 3}, y{0, 1, 1, 2};
  const auto f = stats::linear_fit(x, y);
  // Hand computation: slope 0.6, intercept 0.1, SSR 0.2, SST 2.
  EXPECT_NEAR(f.slope, 0.6, 1e-14);
  EXPECT_NEAR(f.intercept, 0.1, 1e-14);
  EXPECT_NEAR(f.r_squared, 0.9, 1e-14);
}

TEST(KolmogorovSmirnov, StatisticByHand) {
  // Uniform CDF; sorted sample 0.1, 0.4, 0.7. D = max(1/3 - 0.1, 0.4 - 1/3, ...).
  const std::vector<double> x{0.7, 0.1, 0.4};
  const double d = stats::ks_statistic(x, [](double t) { return std::clamp(t, 0.0, 1.0); });
  EXPECT_NEAR(d, std::max({1.0 / 3 - 0.1, 0.1, 2.0 / 3 - 0.4, 0.4 - 1.0 / 3, 1.0 - 0.7, 0.7 - 2.0 / 3}),
              1e-15);
}

TEST(KolmogorovSmirnov, PValueMatchesSeries) {
  for (std::size_t n : {50u, 1000u, 100000u}) {
    for (double d : {0.5, 1.0, 1.36, 1.63}) {
      const double stat = d / std::sqrt(static_cast<double>(n));
      const double sq = std::sqrt(static_cast<double>(n));
      const double want =
          static_cast<double>(oracle::kolmogorov_tail((sq + 0.12 + 0.11 / sq) * stat));
      EXPECT_NEAR(stats::ks_pvalue(stat, n), want, 1e-12);
    }
  }
  // Classic 1% critical value.
  EXPECT_NEAR(stats::ks_pvalue(1.6276 / std::sqrt(1e6), 1000000), 0.01, 2e-4);
}

TEST(Autocorrelation, KnownSequences) {
  EXPECT_NEAR(stats::lag1_autocorrelation(std::vector<double>{1, -1, 1, -1, 1, -1}), -5.0 / 6.0, 1e-14);
  const std::vector<double> ramp{1, 2, 3, 4, 5};
  // sum (x_i - 3)(x_{i+1} - 3) / sum (x_i - 3)^2 = (2 + 0 + 0 + 2) / 10.
  EXPECT_NEAR(stats::lag1_autocorrelation(ramp), 0.4, 1e-14);
}

TEST(RatioEstimate, DeltaMethod) {
  const std::vector<double> num{2, 4, 6, 8}, den{1, 2, 3, 4};
  const auto r = stats::ratio_estimate(num, den);
  EXPECT_DOUBLE_EQ(r.ratio, 2.0);
  EXPECT_NEAR(r.std_error, 0.0, 1e-14);  // exactly proportional
  const std::vector<double> num2{1, 3, 2, 5}, den2{1, 1, 2, 2};
  const auto q = stats::ratio_estimate(num2, den2);
  EXPECT_DOUBLE_EQ(q.ratio, 11.0 / 6.0);
  // Residuals e_i = num - R den; se = sqrt(sum e^2 / (n (n-1))) / mean(den).
  double ss = 0;
  for (int i = 0; i < 4; ++i) ss += std::pow(num2[i] - q.ratio * den2[i], 2);
  EXPECT_NEAR(q.std_error, std::sqrt(ss / 12.0) / 1.5, 1e-12);
}
