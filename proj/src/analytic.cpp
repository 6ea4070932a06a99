#include "twophase/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "twophase/scale.hpp"

namespace twophase {

namespace {

std::shared_ptr<const ScaleCurve> recurrent_curve_for(const TwoPhaseModel& m,
                                                      std::optional<Interval> table) {
  if (table) {
    try {
      return make_scale_curve(m.recurrent, m.diffusion, table);
    } catch (const Error& e) {
      // Too wide for a plain table; the shifted march still works.
      if (e.code() != ErrorCode::DomainTooLarge) throw;
    }
  }
  return make_scale_curve(m.recurrent, m.diffusion);
}

std::vector<double> gamma_breakpoints(const DownCrossing& g, double lo, double hi) {
  if (const auto* s = g.get_if<IteratedLogSeries>()) {
    if (lo < s->threshold() && s->threshold() < hi) return {s->threshold()};
  } else if (const auto* t = g.get_if<PiecewiseLinear>()) {
    return t->breakpoints(lo, hi);
  }
  return {};
}

}  // namespace

ModelAnalytics::ModelAnalytics(TwoPhaseModel model, std::optional<Interval> recurrent_table)
    : m_(std::move(model)),
      t_(make_scale_curve(m_.transient, m_.diffusion)),
      r_(recurrent_curve_for(m_, recurrent_table)) {
  if (m_.transient.is_constant() && m_.gamma.is_constant()) {
    constant_hazard_ = onset_hazard(m_.x0);
  }
}

double ModelAnalytics::onset_hazard(double z) const {
  const double g = m_.gamma(z);
  if (!(g > 0.0)) {
    std::ostringstream msg;
    msg << "gamma(" << z << ") = " << g << " is not positive";
    throw Error(ErrorCode::DegenerateGamma, msg.str());
  }
  return 1.0 / t_->increment(z - g, z, z);
}

std::vector<double> ModelAnalytics::hazard_breakpoints(double lo, double hi) const {
  std::vector<double> out = m_.transient.breakpoints(lo, hi);
  const auto gb = gamma_breakpoints(m_.gamma, lo, hi);
  out.insert(out.end(), gb.begin(), gb.end());
  // Kinks of b^T seen through the left end z - gamma(z), which is increasing.
  auto k = [this](double z) { return z - m_.gamma(z); };
  for (double t : m_.transient.breakpoints(k(lo), k(hi))) {
    double a = lo, b = hi;
    for (int it = 0; it < 200 && b - a > 1e-13 * std::max(1.0, std::abs(b)); ++it) {
      const double mid = 0.5 * (a + b);
      (k(mid) < t ? a : b) = mid;
    }
    out.push_back(0.5 * (a + b));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double ModelAnalytics::cumulative_hazard(double x, double y, quad::Tolerance tol) const {
  if (!(y > 0.0)) return 0.0;
  if (constant_hazard_) return *constant_hazard_ * y;
  auto f = [this](double z) { return onset_hazard(z); };
  double total = 0.0;
  double lo = x;
  for (double bp : hazard_breakpoints(x, x + y)) {
    total += quad::adaptive_simpson(f, lo, bp, tol);
    lo = bp;
  }
  return total + quad::adaptive_simpson(f, lo, x + y, tol);
}

double ModelAnalytics::onset_tail(double x, double y, quad::Tolerance tol) const {
  if (y < 0.0) throw Error(ErrorCode::InvalidArgument, "onset_tail needs y >= 0");
  return std::exp(-cumulative_hazard(x, y, tol));
}

double ModelAnalytics::hitting_prob(double z, double c) const {
  if (!(c > 0.0)) return 0.0;
  if (!(z > m_.z0)) {
    std::ostringstream msg;
    msg << "hitting_prob needs z > z0 (z=" << z << ", z0=" << m_.z0 << ")";
    throw Error(ErrorCode::AnchorViolation, msg.str());
  }
  const double up = t_->increment(z, z + c, z);
  const double down = r_->increment(m_.z0, z, z);
  const double p = up / (down + up);
  return std::clamp(p, 0.0, 1.0);
}

double ModelAnalytics::criterion_H(double s) const {
  const double g = m_.gamma(s);
  const double z = s - g;
  if (!(z > m_.z0)) {
    std::ostringstream msg;
    msg << "s - gamma(s) = " << z << " is not above z0 = " << m_.z0;
    throw Error(ErrorCode::AnchorViolation, msg.str());
  }
  return hitting_prob(z, g);
}

double onset_hazard(const TwoPhaseModel& m, double z) { return ModelAnalytics(m).onset_hazard(z); }

double onset_tail(const TwoPhaseModel& m, double x, double y) {
  return ModelAnalytics(m).onset_tail(x, y);
}

double hitting_prob(const TwoPhaseModel& m, double z, double c) {
  return ModelAnalytics(m).hitting_prob(z, c);
}

double criterion_H(const TwoPhaseModel& m, double s) { return ModelAnalytics(m).criterion_H(s); }

// ---------------------------------------------------------------------------

namespace {

void check_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw Error(ErrorCode::InvalidArgument, std::string(name) + " must be a positive real");
  }
}

}  // namespace

double damping(double b, double c, double gamma, double a) {
  check_positive(b, "b");
  check_positive(gamma, "gamma");
  check_positive(a, "a");
  const double x = 2.0 * b * gamma / a;
  const double up = std::expm1(x);     // e^x - 1
  const double down = -std::expm1(-x);  // 1 - e^-x
  if (c == kReflecting) {
    const double s = 2.0 * std::sinh(0.5 * x);
    return up / (s * s);
  }
  check_positive(c, "c");
  return c * up / (c * up + (b - c) * down);
}

ClosedFormBundle closed_forms(double b, double c, double gamma, double a, double x0) {
  ClosedFormBundle out;
  out.damping = damping(b, c, gamma, a);
  (void)x0;  // every field is an increment from x0
  const double x = 2.0 * b * gamma / a;
  const double down = -std::expm1(-x);
  out.c_b_gamma = a * down / (2.0 * b);
  out.d_b_gamma = a * std::expm1(x) / (2.0 * b);
  out.expected_L_increment = out.d_b_gamma;
  out.expected_sigma = (out.d_b_gamma - gamma) / b;
  if (c == kReflecting) {
    out.expected_return = gamma / b - a * down / (2.0 * b * b);
  } else {
    out.expected_return = gamma / b + a * (b - c) / (2.0 * b * b * c) * down;
  }
  out.speed = out.damping * b;
  return out;
}

double exit_time_limit(double a, double b, double c, double gamma) {
  check_positive(a, "a");
  check_positive(b, "b");
  check_positive(c, "c");
  check_positive(gamma, "gamma");
  return gamma / b + a * (b - c) / (2.0 * b * b * c) * -std::expm1(-2.0 * b * gamma / a);
}

double exit_time_vN(double a, double b, double c, double gamma, double N, double y) {
  check_positive(a, "a");
  check_positive(b, "b");
  check_positive(c, "c");
  check_positive(gamma, "gamma");
  check_positive(N, "N");
  if (y < -N || y > gamma) {
    throw Error(ErrorCode::InvalidArgument, "exit_time_vN needs -N <= y <= gamma");
  }
  const double en = 2.0 * c * N / a;
  if (en > 700.0) {
    throw Error(ErrorCode::OverflowGuard,
                "2cN/a exceeds the exponent guard; use exit_time_limit instead");
  }
  const double eg = -std::expm1(-2.0 * b * gamma / a);
  const double A = (gamma / b + N / c + a * (b - c) / (2.0 * b * b * c) * eg) /
                   (a / (2.0 * c) * std::expm1(en) + a / (2.0 * b) * eg);
  if (y <= 0.0) {
    return a * A / (2.0 * c) * (std::exp(en) - std::exp(-2.0 * c * y / a)) - (y + N) / c;
  }
  const double D = A + 1.0 / b - 1.0 / c;
  return a * D / (2.0 * b) * (std::exp(-2.0 * b * gamma / a) - std::exp(-2.0 * b * y / a)) +
         (gamma - y) / b;
}

}  // namespace twophase
