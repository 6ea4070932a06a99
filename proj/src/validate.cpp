#include <algorithm>
#include <cmath>
#include <sstream>

#include "twophase/model.hpp"
#include "twophase/scale.hpp"

namespace twophase {

std::string to_string(Verdict3 v) {
  switch (v) {
    case Verdict3::Pass: return "Pass";
    case Verdict3::Fail: return "Fail";
    case Verdict3::Undetermined: return "Undetermined";
  }
  return "Undetermined";
}

std::string to_string(Tail t) {
  switch (t) {
    case Tail::Converges: return "Converges";
    case Tail::Diverges: return "Diverges";
    case Tail::Undetermined: return "Undetermined";
  }
  return "Undetermined";
}

bool ValidationReport::ok() const noexcept { return issues.empty(); }

bool ValidationReport::conditions_hold() const noexcept {
  return transient_condition.verdict != Verdict3::Fail &&
         recurrent_condition.verdict != Verdict3::Fail;
}

namespace {

Tail from_flag(std::optional<bool> unbounded) {
  if (!unbounded) return Tail::Undetermined;
  return *unbounded ? Tail::Diverges : Tail::Converges;
}

// Upper tail of exp(-int 2b) for b = sum c_j log^(j): the lowest depth with a
// nonzero coefficient dominates every deeper one.
Tail series_upper_tail(const IteratedLogSeries& s) {
  for (const auto& t : s.terms()) {
    if (t.coefficient > 0.0) return Tail::Converges;
    if (t.coefficient < 0.0) return Tail::Diverges;
  }
  return Tail::Diverges;
}

}  // namespace

TailBehaviour tail_behaviour(const DriftFunction& drift) {
  TailBehaviour out;
  switch (drift.kind()) {
    case DriftKind::Constant: {
      const double v = drift.constant_value();
      out.upper = v > 0.0 ? Tail::Converges : Tail::Diverges;
      out.lower = v >= 0.0 ? Tail::Diverges : Tail::Converges;
      break;
    }
    case DriftKind::IteratedLog: {
      const auto& s = *drift.get_if<IteratedLogSeries>();
      out.upper = series_upper_tail(s);
      out.lower = s.below() >= 0.0 ? Tail::Diverges : Tail::Converges;
      break;
    }
    case DriftKind::Tabulated: {
      // Divergence cannot be read off finite data; report the integrals over
      // the grid measured from the point nearest 0.
      const auto& t = *drift.get_if<PiecewiseLinear>();
      const Interval sup = t.support();
      const double ref = std::clamp(0.0, sup.lo, sup.hi);
      out.upper_estimate = scale_increment(drift, ref, ref, sup.hi);
      out.lower_estimate = scale_increment(drift, ref, sup.lo, ref);
      break;
    }
    case DriftKind::FromScale: {
      const auto& curve = drift.get_if<ScaleData>()->curve();
      out.upper = from_flag(curve.unbounded_above());
      out.lower = from_flag(curve.unbounded_below());
      break;
    }
  }
  return out;
}

namespace {

ConditionVerdict judge(const DriftFunction& drift, Tail want_upper, const char* what) {
  ConditionVerdict c;
  c.tails = tail_behaviour(drift);
  std::ostringstream msg;
  msg << what << ": upper " << to_string(c.tails.upper) << ", lower " << to_string(c.tails.lower);
  if (c.tails.upper == Tail::Undetermined || c.tails.lower == Tail::Undetermined) {
    c.verdict = Verdict3::Undetermined;
    if (c.tails.upper_estimate) {
      msg << "; truncated integrals upper " << *c.tails.upper_estimate << ", lower "
          << *c.tails.lower_estimate;
    }
  } else if (c.tails.upper == want_upper && c.tails.lower == Tail::Diverges) {
    c.verdict = Verdict3::Pass;
  } else {
    c.verdict = Verdict3::Fail;
  }
  c.detail = msg.str();
  return c;
}

}  // namespace

ConditionVerdict transient_condition(const DriftFunction& drift) {
  return judge(drift, Tail::Converges, "transient to +inf");
}

ConditionVerdict recurrent_condition(const DriftFunction& drift) {
  return judge(drift, Tail::Diverges, "recurrent");
}

std::vector<ValidationIssue> check_down_crossing(const DownCrossing& gamma, bool* heuristic) {
  std::vector<ValidationIssue> issues;
  bool flagged = false;
  auto fail = [&](ErrorCode code, std::string msg) { issues.push_back({code, std::move(msg)}); };

  switch (gamma.kind()) {
    case DownCrossingKind::Constant:
      if (!(gamma.constant_value() > 0.0)) fail(ErrorCode::GammaInadmissible, "gamma must be > 0");
      break;
    case DownCrossingKind::IteratedLog: {
      const auto& s = *gamma.get_if<IteratedLogSeries>();
      if (!(s.below() > 0.0)) {
        fail(ErrorCode::GammaInadmissible, "gamma below its threshold must be > 0");
      }
      if (!s.below_is_continuous()) {
        fail(ErrorCode::GammaInadmissible, "gamma must be continuous at its threshold");
      }
      // Every log^(j) is positive and increasing past the threshold, so the
      // leading term fixes the eventual sign.
      bool leading_positive = false;
      bool any_negative = false;
      for (const auto& t : s.terms()) {
        if (t.coefficient != 0.0 && !leading_positive && !any_negative) {
          leading_positive = t.coefficient > 0.0;
        }
        any_negative = any_negative || t.coefficient < 0.0;
      }
      if (!leading_positive) {
        fail(ErrorCode::GammaInadmissible, "gamma is eventually non-positive");
      } else if (!(s.series(s.threshold()) > 0.0)) {
        fail(ErrorCode::GammaInadmissible, "gamma is non-positive at its threshold");
      } else if (any_negative) {
        // Positivity between the threshold and infinity is only sampled.
        flagged = true;
        for (double e = std::log(s.threshold()); e < 690.0; e += 0.25) {
          if (!(s(std::exp(e)) > 0.0)) {
            fail(ErrorCode::GammaInadmissible, "gamma is non-positive on the sampled range");
            break;
          }
        }
      }
      // (log^(j))' is decreasing past the threshold, so the bound there holds
      // everywhere after it.
      double slope_bound = 0.0;
      for (const auto& t : s.terms()) {
        slope_bound += std::abs(t.coefficient) * iterated_log_derivative(s.threshold(), t.depth);
      }
      if (!(slope_bound < 1.0)) {
        std::ostringstream msg;
        msg << "gamma' may reach " << slope_bound << " >= 1 at the threshold";
        fail(ErrorCode::GammaInadmissible, msg.str());
      }
      break;
    }
    case DownCrossingKind::Tabulated: {
      flagged = true;
      const auto& t = *gamma.get_if<PiecewiseLinear>();
      for (double v : t.values()) {
        if (!(v > 0.0)) {
          fail(ErrorCode::GammaInadmissible, "tabulated gamma has a non-positive value");
          break;
        }
      }
      const Interval sup = t.support();
      constexpr int kPoints = 10000;
      const double h = sup.length() / (kPoints - 1);
      for (int i = 0; i < kPoints; ++i) {
        const double x = sup.lo + h * i;
        const double d = (t(x + 0.5 * h) - t(x - 0.5 * h)) / h;
        if (!(d < 1.0 - 1e-6)) {
          std::ostringstream msg;
          msg << "gamma' ~ " << d << " >= 1 near x=" << x;
          fail(ErrorCode::GammaInadmissible, msg.str());
          break;
        }
      }
      const auto grid = t.grid();
      const auto vals = t.values();
      for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] - vals[i] > grid[i - 1] - vals[i - 1])) {
          fail(ErrorCode::GammaInadmissible, "x - gamma(x) is not increasing on the grid");
          break;
        }
      }
      break;
    }
  }
  if (heuristic) *heuristic = flagged;
  return issues;
}

ValidationReport validate_model(const TwoPhaseModel& m) {
  ValidationReport r;
  if (!(m.diffusion > 0.0) || !std::isfinite(m.diffusion)) {
    r.issues.push_back({ErrorCode::InvalidArgument, "diffusion coefficient a must be positive"});
  }

  // Probe both drifts over a spread of points for non-finite values.
  auto probe = [&](const DriftFunction& f, const char* name) {
    for (int k = -6; k <= 12; ++k) {
      for (double sign : {-1.0, 1.0}) {
        const double x = m.x0 + sign * std::ldexp(1.0, k);
        if (!std::isfinite(f(x))) {
          std::ostringstream msg;
          msg << name << " is not finite at x=" << x;
          r.issues.push_back({ErrorCode::MalformedDrift, msg.str()});
          return;
        }
      }
    }
  };
  probe(m.transient, "b^T");
  probe(m.recurrent, "b^R");

  r.transient_condition = transient_condition(m.transient);
  r.recurrent_condition = recurrent_condition(m.recurrent);

  auto gamma_issues = check_down_crossing(m.gamma, &r.gamma_checks_heuristic);
  r.issues.insert(r.issues.end(), gamma_issues.begin(), gamma_issues.end());

  const double k0 = m.x0 - m.gamma(m.x0);
  if (!(m.z0 < k0)) {
    std::ostringstream msg;
    msg << "z0=" << m.z0 << " must be below x0 - gamma(x0) = " << k0;
    r.issues.push_back({ErrorCode::AnchorViolation, msg.str()});
  }
  return r;
}

}  // namespace twophase
