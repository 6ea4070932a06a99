#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "twophase/model.hpp"
#include "twophase/scale.hpp"

using namespace twophase;

namespace {

bool has_issue(const ValidationReport& r, ErrorCode code) {
  for (const auto& i : r.issues) {
    if (i.code == code) return true;
  }
  return false;
}

// Scale curve whose drift blows up to NaN past a point.
class BrokenCurve final : public ClosedFormScale {
 public:
  double u(double x) const override { return x; }
  double log_u_prime(double) const override { return 0.0; }
  double drift(double x) const override {
    return x > 50.0 ? std::numeric_limits<double>::quiet_NaN() : 0.0;
  }
};

}  // namespace

TEST(DriftConditions, ConstantOneIsTransient) {
  EXPECT_EQ(transient_condition(DriftFunction::constant(1.0)).verdict, Verdict3::Pass);
}

TEST(DriftConditions, ZeroIsRecurrent) {
  EXPECT_EQ(recurrent_condition(DriftFunction::constant(0.0)).verdict, Verdict3::Pass);
}

TEST(DriftConditions, SmallPositiveConstantIsNotRecurrent) {
  EXPECT_EQ(recurrent_condition(DriftFunction::constant(0.1)).verdict, Verdict3::Fail);
  EXPECT_EQ(transient_condition(DriftFunction::constant(0.0)).verdict, Verdict3::Fail);
  EXPECT_EQ(transient_condition(DriftFunction::constant(-1.0)).verdict, Verdict3::Fail);
}

TEST(DriftConditions, IteratedLogFollowsLeadingCoefficient) {
  const auto up = DriftFunction::iterated_log(16.0, {{2, 0.5}, {3, 1.0}});
  EXPECT_EQ(transient_condition(up).verdict, Verdict3::Pass);
  EXPECT_EQ(recurrent_condition(up).verdict, Verdict3::Fail);
  const auto down = DriftFunction::iterated_log(16.0, {{1, -0.5}}, 0.0);
  EXPECT_EQ(recurrent_condition(down).verdict, Verdict3::Pass);
}

TEST(DriftConditions, TabulatedIsUndeterminedWithEstimates) {
  const auto t = DriftFunction::tabulated({-5.0, 0.0, 5.0}, {0.0, 0.2, 0.0});
  const auto v = recurrent_condition(t);
  EXPECT_EQ(v.verdict, Verdict3::Undetermined);
  EXPECT_TRUE(v.tails.upper_estimate.has_value());
  EXPECT_TRUE(v.tails.lower_estimate.has_value());
  EXPECT_GT(*v.tails.upper_estimate, 0.0);
}

TEST(DownCrossing, ConstantAndIteratedLogAreAdmissible) {
  EXPECT_TRUE(check_down_crossing(DownCrossing::constant(1.0)).empty());
  EXPECT_TRUE(check_down_crossing(DownCrossing::iterated_log(16.0, {{2, 0.5}, {3, 0.5}})).empty());
}

TEST(DownCrossing, SteepGammaIsRejected) {
  // gamma' = 1.5 between the nodes.
  bool heuristic = false;
  const auto issues =
      check_down_crossing(DownCrossing::tabulated({0.0, 1.0, 2.0}, {1.0, 2.5, 2.6}), &heuristic);
  ASSERT_FALSE(issues.empty());
  EXPECT_EQ(issues.front().code, ErrorCode::GammaInadmissible);
  EXPECT_TRUE(heuristic);
  // gamma = 2 log x has gamma' >= 1 near the threshold.
  EXPECT_FALSE(check_down_crossing(DownCrossing::iterated_log(1.5, {{1, 2.0}})).empty());
}

TEST(DownCrossing, NonPositiveGammaIsRejected) {
  EXPECT_FALSE(check_down_crossing(DownCrossing::tabulated({0.0, 1.0}, {0.5, -0.1})).empty());
  EXPECT_THROW(DownCrossing::constant(std::nan("")), Error);
  EXPECT_FALSE(check_down_crossing(DownCrossing::constant(0.0)).empty());
}

TEST(DownCrossing, AdmissibleGammaGivesIncreasingShift) {
  const auto g = DownCrossing::iterated_log(16.0, {{2, 0.5}, {3, 1.0}});
  double prev = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 5000; ++i) {
    const double x = 16.0 + 0.37 * i * i;
    const double shifted = x - g(x);
    EXPECT_GT(shifted, prev);
    prev = shifted;
  }
}

TEST(TwoPhaseModel, DefaultAnchorSitsBelowTheFirstDownCrossing) {
  const auto m = TwoPhaseModel::make(DriftFunction::constant(1.0), DriftFunction::constant(0.0),
                                     DownCrossing::constant(2.0), 3.0);
  EXPECT_DOUBLE_EQ(m.z0, 3.0 - 2.0 - 1.0);
  EXPECT_THROW(TwoPhaseModel::make(DriftFunction::constant(1.0), DriftFunction::constant(0.0),
                                   DownCrossing::constant(1.0), 0.0, std::nullopt, 0.0),
               Error);
}

TEST(TwoPhaseModel, ModeRule) {
  const auto g = DownCrossing::constant(1.0);
  EXPECT_EQ(mode_at(0.0, 0.0, g), Mode::TransientPhase);
  EXPECT_EQ(mode_at(-0.999, 0.0, g), Mode::TransientPhase);
  EXPECT_EQ(mode_at(-1.0, 0.0, g), Mode::RecurrentPhase);
  const auto m = TwoPhaseModel::make(DriftFunction::constant(1.0), DriftFunction::constant(0.25),
                                     g, 0.0);
  EXPECT_DOUBLE_EQ(m.drift(-0.5, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(m.drift(-1.5, 0.0), 0.25);
}

TEST(ValidateModel, ReportsAnchorViolation) {
  const auto m = TwoPhaseModel::make(DriftFunction::constant(1.0), DriftFunction::constant(0.0),
                                     DownCrossing::constant(1.0), 0.0, -0.5);
  const auto r = validate_model(m);
  EXPECT_FALSE(r.ok());
  EXPECT_TRUE(has_issue(r, ErrorCode::AnchorViolation));
}

TEST(ValidateModel, ReportsMalformedDrift) {
  auto curve = std::make_shared<BrokenCurve>();
  const auto broken = DriftFunction::from_scale(ScaleData(curve, 0.0, {-1e9, 1e9}, 1.0));
  const auto m = TwoPhaseModel::make(DriftFunction::constant(1.0), broken,
                                     DownCrossing::constant(1.0), 0.0);
  const auto r = validate_model(m);
  EXPECT_TRUE(has_issue(r, ErrorCode::MalformedDrift));
}

TEST(ValidateModel, ReportsGammaInadmissible) {
  const auto m = TwoPhaseModel::make(DriftFunction::constant(1.0), DriftFunction::constant(0.0),
                                     DownCrossing::tabulated({0.0, 1.0, 2.0}, {1.0, 2.5, 2.6}),
                                     0.0, -5.0);
  EXPECT_TRUE(has_issue(validate_model(m), ErrorCode::GammaInadmissible));
}

TEST(ValidateModel, ConditionsAreSeparateFromInvariants) {
  const auto m = TwoPhaseModel::make(DriftFunction::constant(1.0), DriftFunction::constant(0.5),
                                     DownCrossing::constant(1.0), 0.0);
  const auto r = validate_model(m);
  EXPECT_TRUE(r.ok());
  EXPECT_FALSE(r.conditions_hold());
  EXPECT_EQ(r.recurrent_condition.verdict, Verdict3::Fail);
}

TEST(ValidateModel, IsPure) {
  const auto m = TwoPhaseModel::make(DriftFunction::iterated_log(16.0, {{2, 0.5}, {3, 1.0}}),
                                     DriftFunction::tabulated({-3.0, 0.0, 3.0}, {0.1, 0.0, 0.1}),
                                     DownCrossing::tabulated({0.0, 50.0}, {1.0, 3.0}), 16.0);
  const auto a = validate_model(m);
  const auto b = validate_model(m);
  EXPECT_EQ(a.transient_condition.verdict, b.transient_condition.verdict);
  EXPECT_EQ(a.recurrent_condition.detail, b.recurrent_condition.detail);
  EXPECT_EQ(a.recurrent_condition.tails.upper_estimate, b.recurrent_condition.tails.upper_estimate);
  ASSERT_EQ(a.issues.size(), b.issues.size());
  EXPECT_EQ(a.gamma_checks_heuristic, b.gamma_checks_heuristic);
  EXPECT_TRUE(a.gamma_checks_heuristic);
}
