#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "twophase/analytic.hpp"
#include "twophase/error.hpp"

using namespace twophase;

namespace {

TwoPhaseModel constant_model(double b, double c, double gamma, double x0 = 0.0,
                             std::optional<double> z0 = std::nullopt, double a = 1.0) {
  return TwoPhaseModel::make(DriftFunction::constant(b), DriftFunction::constant(c),
                             DownCrossing::constant(gamma), x0, z0, a);
}

double d_bg(double b, double g, double a = 1.0) { return a * std::expm1(2.0 * b * g / a) / (2.0 * b); }

}  // namespace

// ---------------------------------------------------------------------------
// Onset hazard and tail

TEST(OnsetHazard, ConstantCaseIsReciprocalOfD) {
  for (double b : {0.5, 1.0, 2.0}) {
    for (double g : {0.5, 1.0, 3.0}) {
      const ModelAnalytics an(constant_model(b, 0.0, g));
      ASSERT_TRUE(an.hazard_is_constant());
      for (double z : {0.0, 10.0, 1e4}) EXPECT_NEAR(an.onset_hazard(z), 1.0 / d_bg(b, g), 1e-15);
    }
  }
}

TEST(OnsetHazard, QuadraturePathAgreesWithClosedForm) {
  // A flat table forces the numerical scale curve.
  const auto m = TwoPhaseModel::make(DriftFunction::tabulated({-1e3, 1e3}, {1.0, 1.0}),
                                     DriftFunction::constant(0.0), DownCrossing::constant(1.0), 0.0);
  const ModelAnalytics an(m);
  EXPECT_FALSE(an.hazard_is_constant());
  for (double z : {0.0, 3.7, 250.0}) EXPECT_NEAR(an.onset_hazard(z), 1.0 / d_bg(1.0, 1.0), 1e-9 / d_bg(1.0, 1.0));
}

TEST(OnsetHazard, UnitParametersValue) {
  // 2 / (e^2 - 1), evaluated to 30 digits.
  EXPECT_NEAR(onset_hazard(constant_model(1.0, 0.0, 1.0), 0.0), 0.313035285499331303636, 1e-15);
}

TEST(OnsetHazard, GrowingGammaFamily) {
  // gamma = (log^(2) z + k log^(3) z) / 2b gives e^{2b gamma} = log z (log^(2) z)^k.
  for (double b : {0.5, 1.0}) {
    for (double k : {1.0, 2.0}) {
      const auto m = TwoPhaseModel::make(
          DriftFunction::constant(b), DriftFunction::constant(0.0),
          DownCrossing::iterated_log(16.0, {{2, 1.0 / (2.0 * b)}, {3, k / (2.0 * b)}}), 16.0);
      for (double z : {20.0, 150.0, 1e5}) {
        const double want = 2.0 * b / (std::log(z) * std::pow(std::log(std::log(z)), k) - 1.0);
        // z - gamma(z) is formed explicitly, costing about eps * z / gamma.
        EXPECT_NEAR(onset_hazard(m, z), want, 1e-10 * want) << "b=" << b << " k=" << k << " z=" << z;
      }
    }
  }
}

TEST(OnsetHazard, DegenerateGammaThrows) {
  const auto m = TwoPhaseModel::make(DriftFunction::constant(1.0), DriftFunction::constant(0.0),
                                     DownCrossing::tabulated({0.0, 10.0}, {1.0, -1.0}), 0.0, -5.0);
  try {
    onset_hazard(m, 10.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateGamma);
  }
}

TEST(OnsetTail, EmptyIntervalIsOne) {
  EXPECT_DOUBLE_EQ(onset_tail(constant_model(1.0, 0.0, 1.0), 3.0, 0.0), 1.0);
}

TEST(OnsetTail, ConstantCaseIsExponential) {
  const auto m = constant_model(1.0, 0.0, 1.0);
  const double d = d_bg(1.0, 1.0);
  for (double y : {0.1, 1.0, d, 20.0}) EXPECT_NEAR(onset_tail(m, 0.0, y), std::exp(-y / d), 1e-15);
}

TEST(OnsetTail, IteratedLogDriftMatchesTrapezoidOracle) {
  // b^T = log^(2)/2 + log^(3), gamma = 1. lambda(z) = u'(z) / (u(z) - u(z - 1))
  // on one fine grid, then the outer integral by the trapezoid rule.
  const auto m = TwoPhaseModel::make(DriftFunction::iterated_log(16.0, {{2, 0.5}, {3, 1.0}}),
                                     DriftFunction::constant(0.0), DownCrossing::constant(1.0), 16.0);
  const double x = std::exp(std::exp(1.0)) + 10.0, y = 5.0;
  auto b = [](oracle::Real t) {
    return 0.5L * oracle::iterated_log(t, 2) + oracle::iterated_log(t, 3);
  };
  constexpr std::size_t kPerUnit = 200000;  // 1.2e6 panels over [x - 1, x + y]
  const std::size_t panels = kPerUnit * 6;
  const oracle::Real lo = x - 1.0L;
  const auto u = oracle::nested_scale_table(b, 1.0L, lo, lo + 6.0L, panels);
  const oracle::Real h = 6.0L / panels;
  // log u' on the grid, accumulated alongside.
  std::vector<oracle::Real> logup(panels + 1, 0.0L);
  for (std::size_t i = 1; i <= panels; ++i) {
    logup[i] = logup[i - 1] - h * (b(lo + h * (i - 1)) + b(lo + h * i));
  }
  oracle::Real integral = 0.0L, prev = 0.0L;
  for (std::size_t i = kPerUnit; i <= panels; ++i) {
    const oracle::Real lam = std::exp(logup[i]) / (u[i] - u[i - kPerUnit]);
    if (i > kPerUnit) integral += 0.5L * h * (prev + lam);
    prev = lam;
  }
  const double want = static_cast<double>(std::exp(-integral));
  EXPECT_NEAR(onset_tail(m, x, y), want, 1e-6 * want);
}

TEST(OnsetTail, NegativeLogIsAdditiveAndMonotone) {
  const auto m = TwoPhaseModel::make(DriftFunction::iterated_log(16.0, {{2, 0.5}, {3, 1.0}}),
                                     DriftFunction::constant(0.0), DownCrossing::constant(1.0), 16.0);
  const ModelAnalytics an(m);
  const double a = an.cumulative_hazard(20.0, 3.0);
  const double b = an.cumulative_hazard(23.0, 4.5);
  EXPECT_NEAR(an.cumulative_hazard(20.0, 7.5), a + b, 1e-10 * (a + b));
  double prev = 1.0;
  for (double y = 0.0; y < 30.0; y += 0.7) {
    const double t = an.onset_tail(20.0, y);
    EXPECT_LE(t, prev);
    EXPECT_GT(t, 0.0);
    prev = t;
  }
}

// ---------------------------------------------------------------------------
// Hitting probability and the criterion function

TEST(HittingProb, ZeroDistanceTarget) {
  EXPECT_DOUBLE_EQ(hitting_prob(constant_model(1.0, 0.0, 1.0, 5.0), 2.0, 0.0), 0.0);
}

TEST(HittingProb, DriftlessGamblersRuin) {
  const auto m = constant_model(0.0, 0.0, 1.0, 10.0, 0.0);
  for (double z : {0.25, 2.0, 8.0}) {
    for (double c : {0.01, 1.0, 30.0}) EXPECT_NEAR(hitting_prob(m, z, c), c / (z + c), 1e-14);
  }
}

TEST(HittingProb, RequiresZAboveAnchor) {
  try {
    hitting_prob(constant_model(1.0, 0.0, 1.0, 5.0, 0.0), -1.0, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AnchorViolation);
  }
}

TEST(HittingProb, MonotoneInTargetAndAnchor) {
  const auto tab = DriftFunction::tabulated({-20.0, 0.0, 20.0}, {0.05, 0.5, 0.05});
  double prev = -1.0;
  for (double c = 0.1; c < 8.0; c += 0.3) {
    const double p = hitting_prob(TwoPhaseModel::make(DriftFunction::constant(1.0), tab,
                                                      DownCrossing::constant(1.0), 5.0, 0.0),
                                  3.0, c);
    EXPECT_GT(p, prev);
    EXPECT_LE(p, 1.0);
    prev = p;
  }
  prev = 2.0;
  for (double z0 = 2.5; z0 > -10.0; z0 -= 1.0) {
    const double p = hitting_prob(TwoPhaseModel::make(DriftFunction::constant(1.0), tab,
                                                      DownCrossing::constant(1.0), 5.0, z0),
                                  3.0, 1.0);
    EXPECT_LT(p, prev);
    EXPECT_GE(p, 0.0);
    prev = p;
  }
}

TEST(CriterionH, ConstantGammaWithNonnegativeRecurrentDrift) {
  // H = c u'_R / (u_R + c u'_R) at s - gamma, u_R anchored at z0.
  const double b = 1.3, g = 0.8, z0 = -1.0;
  const double c = -std::expm1(-2.0 * b * g) / (2.0 * b);
  for (double r : {0.0, 0.2, 0.6}) {
    const auto m = constant_model(b, r, g, 2.0, z0);
    for (double s : {1.0, 4.0, 30.0}) {
      const double y = s - g - z0;
      const double uR = r == 0.0 ? y : -std::expm1(-2.0 * r * y) / (2.0 * r);
      const double upR = std::exp(-2.0 * r * y);
      const double want = c * upR / (uR + c * upR);
      EXPECT_NEAR(criterion_H(m, s), want, 1e-12 * want) << "r=" << r << " s=" << s;
    }
  }
}

TEST(CriterionH, VariableGammaWithZeroRecurrentDrift) {
  const double b = 1.0, z0 = 10.0;
  const auto gamma = DownCrossing::iterated_log(16.0, {{2, 0.5}, {3, 0.75}});
  const auto m = TwoPhaseModel::make(DriftFunction::constant(b), DriftFunction::constant(0.0),
                                     gamma, 20.0, z0);
  for (double s : {20.0, 100.0, 1e4}) {
    const double g = gamma(s);
    const double e = -std::expm1(-2.0 * b * g);
    const double want = e / (2.0 * b * (s - z0 - g) + e);
    EXPECT_NEAR(criterion_H(m, s), want, 1e-12 * want) << s;
  }
}

TEST(CriterionH, UnitParametersAtTen) {
  // (1 - e^-2) / (18 + 1 - e^-2) to 30 digits.
  EXPECT_NEAR(criterion_H(constant_model(1.0, 0.0, 1.0, 2.0, 0.0), 10.0),
              0.0458351489276687199379, 1e-15);
}

TEST(CriterionH, NonIncreasingForConstantParameters) {
  const auto m = constant_model(1.0, 0.1, 1.0, 2.0, 0.0);
  double prev = 1.0;
  for (double s = 1.5; s < 200.0; s *= 1.3) {
    const double h = criterion_H(m, s);
    EXPECT_GT(h, 0.0);
    EXPECT_LT(h, 1.0);
    EXPECT_LE(h, prev);
    prev = h;
  }
}

TEST(CriterionH, AnchorViolationBelowZ0) {
  try {
    criterion_H(constant_model(1.0, 0.0, 1.0, 2.0, 0.0), 0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AnchorViolation);
  }
}

// ---------------------------------------------------------------------------
// Closed forms

TEST(ClosedForms, EqualPhasesGiveNoDamping) {
  for (double b : {0.3, 1.0, 5.0}) {
    EXPECT_NEAR(damping(b, b, 1.7, 0.8), 1.0, 1e-15);
    EXPECT_NEAR(closed_forms(b, b, 1.7, 0.8).expected_return, 1.7 / b, 1e-14);
  }
}

TEST(ClosedForms, UnitExampleValues) {
  const auto cf = closed_forms(1.0, 0.5, 1.0, 1.0);
  EXPECT_NEAR(cf.damping, 0.880797077977882444060, 1e-15);
  EXPECT_NEAR(cf.expected_sigma, 2.19452804946532511362, 1e-14);
  EXPECT_NEAR(cf.expected_return, 1.43233235838169365405, 1e-14);
  EXPECT_NEAR(cf.expected_L_increment, 3.19452804946532511362, 1e-14);
  EXPECT_NEAR(cf.speed, cf.damping, 1e-16);
}

TEST(ClosedForms, MatchOracleOnAGrid) {
  for (double b : {0.25, 1.0, 4.0}) {
    for (double c : {0.25, 0.9, 4.0}) {
      for (double g : {0.25, 2.0}) {
        for (double a : {0.5, 2.0}) {
          const auto cf = closed_forms(b, c, g, a);
          const auto o = oracle::ballistic(b, c, g, a);
          EXPECT_NEAR(cf.d_b_gamma, static_cast<double>(o.d), 1e-13 * cf.d_b_gamma);
          EXPECT_NEAR(cf.c_b_gamma, static_cast<double>(o.c_bg), 1e-13 * cf.c_b_gamma);
          EXPECT_NEAR(cf.expected_sigma, static_cast<double>(o.sigma), 1e-12 * cf.d_b_gamma);
          EXPECT_NEAR(cf.expected_return, static_cast<double>(o.tau_hat),
                      1e-12 * std::abs(cf.expected_return) + 1e-15);
          EXPECT_NEAR(cf.damping, static_cast<double>(o.damping), 1e-13);
          // Speed identity.
          EXPECT_NEAR(cf.damping * b * (cf.expected_sigma + cf.expected_return),
                      cf.expected_L_increment, 1e-12 * cf.expected_L_increment);
        }
      }
    }
  }
}

TEST(ClosedForms, DampingBetweenRatioAndOne) {
  for (double c : {0.01, 0.3, 0.7, 0.99}) {
    const double d = damping(1.0, c, 0.6, 1.3);
    EXPECT_GT(d, c);
    EXPECT_LT(d, 1.0);
  }
}

TEST(ClosedForms, LimitingBehaviour) {
  // Large b or gamma: exponentially close to 1.
  EXPECT_LT(1.0 - damping(10.0, 0.5, 1.0), 1e-7);
  EXPECT_LT(1.0 - damping(1.0, 0.5, 10.0), 1e-7);
  EXPECT_LT(1.0 - damping(20.0, 0.5, 1.0), 1.0 - damping(10.0, 0.5, 1.0));
  // c -> 0: linear in c.
  const double r1 = damping(1.0, 1e-6, 1.0) / 1e-6;
  const double r2 = damping(1.0, 1e-8, 1.0) / 1e-8;
  EXPECT_NEAR(r1, r2, 1e-5 * r2);
  // c -> 0 and gamma -> inf: the product c e^{2 b gamma / a} decides.
  auto d_along = [](double gamma, double target) {
    const double c = target * std::exp(-2.0 * gamma);
    return damping(1.0, c, gamma);
  };
  EXPECT_GT(d_along(30.0, 1e6), 0.999);       // product -> infinity
  EXPECT_LT(d_along(30.0, 1e-6), 1e-5);       // product -> 0
  const double mid = d_along(30.0, 1.0);      // product bounded
  EXPECT_GT(mid, 0.1);
  EXPECT_LT(mid, 0.9);
  EXPECT_NEAR(d_along(30.0, 1.0), d_along(40.0, 1.0), 1e-9);
  // c -> 0 and b -> inf with c e^{2b gamma} bounded: to 0, like 1/b.
  EXPECT_LT(damping(300.0, std::exp(-600.0), 1.0), damping(30.0, std::exp(-60.0), 1.0));
  EXPECT_LT(damping(300.0, std::exp(-600.0), 1.0), 1.0 / 300.0);
  // ... and with c e^{2b gamma} / b fixed: bounded away from 0 and 1.
  const double b = 30.0;
  const double d5 = damping(b, b * std::exp(-2.0 * b), 1.0);
  EXPECT_GT(d5, 0.1);
  EXPECT_LT(d5, 0.9);
}

TEST(ClosedForms, ReflectingSentinel) {
  const double x = 2.0;
  const double want = std::expm1(x) / (std::exp(x) + std::exp(-x) - 2.0);
  EXPECT_NEAR(damping(1.0, kReflecting, 1.0), want, 1e-15);
  EXPECT_NEAR(want, 1.15651764274966565182, 1e-15);
  EXPECT_NEAR(damping(1.0, 1e6, 1.0), want, 1e-4 * want);
  const auto cf = closed_forms(1.0, kReflecting, 1.0);
  EXPECT_NEAR(cf.damping * (cf.expected_sigma + cf.expected_return), cf.expected_L_increment,
              1e-13);
}

TEST(ClosedForms, ReflectingSmallExponentExpansion) {
  // d b = a / 2 gamma + b / 2 + o(1) as 2 b gamma / a -> 0.
  for (double b : {1e-3, 1e-4}) {
    EXPECT_NEAR(damping(b, kReflecting, 1.0, 1.0) * b, 0.5 + b / 2.0, 1e-4);
  }
  // The displayed formula tends to 1 as gamma grows, so the speed tends to b.
  EXPECT_NEAR(damping(1.0, kReflecting, 30.0), 1.0, 1e-12);
}

// ---------------------------------------------------------------------------
// Exit time

TEST(ExitTime, BoundaryValuesAreZero) {
  EXPECT_NEAR(exit_time_vN(1.0, 1.0, 0.5, 1.0, 10.0, 1.0), 0.0, 1e-12);
  EXPECT_NEAR(exit_time_vN(1.0, 1.0, 0.5, 1.0, 10.0, -10.0), 0.0, 1e-9);
}

TEST(ExitTime, ContinuousAndSmoothAtZero) {
  const double h = 1e-6;
  for (double N : {3.0, 8.0}) {
    const double left = exit_time_vN(1.3, 0.7, 0.4, 1.1, N, -h);
    const double mid = exit_time_vN(1.3, 0.7, 0.4, 1.1, N, 0.0);
    const double right = exit_time_vN(1.3, 0.7, 0.4, 1.1, N, h);
    EXPECT_NEAR(left, mid, 1e-5);
    EXPECT_NEAR(mid - left, right - mid, 1e-9);
  }
}

TEST(ExitTime, SolvesTheGeneratorEquation) {
  // (a/2) v'' + drift v' = -1 on both sides of 0.
  const double a = 1.3, b = 0.7, c = 0.4, g = 1.1, N = 6.0, h = 1e-3;
  for (double y : {-4.0, -0.5, 0.3, 0.9}) {
    auto v = [&](double t) { return exit_time_vN(a, b, c, g, N, t); };
    const double d2 = (v(y + h) - 2 * v(y) + v(y - h)) / (h * h);
    const double d1 = (v(y + h) - v(y - h)) / (2 * h);
    EXPECT_NEAR(0.5 * a * d2 + (y < 0 ? c : b) * d1, -1.0, 1e-5) << y;
  }
}

TEST(ExitTime, ConvergesToTheLimit) {
  const double limit = exit_time_limit(1.0, 1.0, 0.5, 1.0);
  EXPECT_NEAR(limit, 1.43233235838169365405, 1e-14);
  double prev = INFINITY;
  for (double N : {5.0, 10.0, 15.0, 20.0, 25.0, 30.0}) {
    const double gap = std::abs(exit_time_vN(1.0, 1.0, 0.5, 1.0, N, 0.0) - limit);
    EXPECT_LT(gap, prev);
    prev = gap;
  }
  // The gap decays like N e^{-2cN/a}: 3.69e-8 at N = 20 (50-digit reference).
  EXPECT_NEAR(std::abs(exit_time_vN(1.0, 1.0, 0.5, 1.0, 20.0, 0.0) - limit), 3.69205e-8, 1e-12);
  EXPECT_LT(prev, 1e-11);
}

TEST(ExitTime, OverflowGuard) {
  try {
    exit_time_vN(1.0, 1.0, 0.5, 1.0, 1000.0, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OverflowGuard);
  }
}
