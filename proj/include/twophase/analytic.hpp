#pragma once

#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "twophase/model.hpp"
#include "twophase/quadrature.hpp"

namespace twophase {

/// Sentinel for the reflecting limit c = +inf of the ballistic model.
inline constexpr double kReflecting = std::numeric_limits<double>::infinity();

/// Hazards, hitting probabilities and the criterion function for one model.
///
/// Scale curves for both phases are built once; everything else is cheap.
/// When `recurrent_table` is given and the recurrent drift needs quadrature,
/// a cumulative table over it makes u_R/u_R' lookups O(1) there.
class ModelAnalytics {
 public:
  explicit ModelAnalytics(TwoPhaseModel model,
                          std::optional<Interval> recurrent_table = std::nullopt);

  const TwoPhaseModel& model() const noexcept { return m_; }
  const ScaleCurve& transient_curve() const noexcept { return *t_; }
  const ScaleCurve& recurrent_curve() const noexcept { return *r_; }

  /// Onset hazard u_T'(z) / (u_T(z) - u_T(z - gamma(z))).
  double onset_hazard(double z) const;

  /// True when b^T and gamma are both constant, so the hazard is too.
  bool hazard_is_constant() const noexcept { return constant_hazard_.has_value(); }
  std::optional<double> constant_hazard() const noexcept { return constant_hazard_; }

  /// int_x^{x+y} of the onset hazard.
  double cumulative_hazard(double x, double y, quad::Tolerance tol = {}) const;

  /// P_x(L > x + y) = exp(-cumulative_hazard(x, y)).
  double onset_tail(double x, double y, quad::Tolerance tol = {}) const;

  /// Points in (lo, hi) where the hazard has a kink.
  std::vector<double> hazard_breakpoints(double lo, double hi) const;

  /// Probability that the composite diffusion started at z hits z0 before z + c.
  double hitting_prob(double z, double c) const;

  /// Criterion summand H(s): hitting_prob at z = s - gamma(s) with c = gamma(s).
  double criterion_H(double s) const;

 private:
  TwoPhaseModel m_;
  std::shared_ptr<const ScaleCurve> t_;
  std::shared_ptr<const ScaleCurve> r_;
  std::optional<double> constant_hazard_;
};

double onset_hazard(const TwoPhaseModel& m, double z);
double onset_tail(const TwoPhaseModel& m, double x, double y);
double hitting_prob(const TwoPhaseModel& m, double z, double c);
double criterion_H(const TwoPhaseModel& m, double s);

struct ClosedFormBundle {
  double c_b_gamma = 0.0;
  double d_b_gamma = 0.0;
  double damping = 0.0;
  double expected_sigma = 0.0;
  double expected_return = 0.0;
  double expected_L_increment = 0.0;
  double speed = 0.0;
};

/// Closed forms of the ballistic two-constant model. c may be kReflecting.
ClosedFormBundle closed_forms(double b, double c, double gamma, double a = 1.0, double x0 = 0.0);

/// Damping coefficient d(b, c, gamma, a); c may be kReflecting.
double damping(double b, double c, double gamma, double a = 1.0);

/// Expected exit time of (-N, gamma) from y for drift c below 0 and b above.
double exit_time_vN(double a, double b, double c, double gamma, double N, double y);

/// N -> infinity limit of exit_time_vN at y = 0.
double exit_time_limit(double a, double b, double c, double gamma);

}  // namespace twophase
