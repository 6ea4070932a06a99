#include "twophase/model.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace twophase {

// ---------------------------------------------------------------------------
// ScaleData

ScaleData::ScaleData(std::shared_ptr<const ScaleCurve> curve, double z0, Interval domain,
                     double diffusion)
    : curve_(std::move(curve)), z0_(z0), domain_(domain), diffusion_(diffusion) {
  if (!curve_) throw Error(ErrorCode::InvalidArgument, "scale data needs a curve");
}

double ScaleData::u(double x) const { return curve_->increment(z0_, x, z0_); }

double ScaleData::log_u_prime(double x) const { return curve_->log_slope_change(z0_, x); }

double ScaleData::u_prime(double x) const {
  const double e = log_u_prime(x);
  if (!(std::abs(e) <= 700.0)) {
    std::ostringstream msg;
    msg << "u'(" << x << ") has exponent " << e << " beyond the overflow guard";
    throw Error(ErrorCode::DomainTooLarge, msg.str());
  }
  return std::exp(e);
}

ScaleData ScaleData::reanchored(double z0) const {
  return ScaleData(curve_, z0, domain_, diffusion_);
}

// ---------------------------------------------------------------------------
// DriftFunction

DriftFunction DriftFunction::constant(double value) {
  if (!std::isfinite(value)) throw Error(ErrorCode::MalformedDrift, "constant drift is not finite");
  return DriftFunction(ConstantFunction{value});
}

DriftFunction DriftFunction::iterated_log(double threshold, std::vector<LogTerm> terms,
                                          std::optional<double> below) {
  return DriftFunction(IteratedLogSeries(threshold, std::move(terms), below));
}

DriftFunction DriftFunction::tabulated(std::vector<double> grid, std::vector<double> values) {
  return DriftFunction(PiecewiseLinear(std::move(grid), std::move(values)));
}

DriftFunction DriftFunction::from_scale(ScaleData scale) { return DriftFunction(std::move(scale)); }

double DriftFunction::operator()(double x) const {
  return std::visit(
      [x](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, ConstantFunction>) {
          return f.value;
        } else if constexpr (std::is_same_v<T, ScaleData>) {
          return f.curve().drift(x);
        } else {
          return f(x);
        }
      },
      v_);
}

DriftKind DriftFunction::kind() const noexcept {
  switch (v_.index()) {
    case 0: return DriftKind::Constant;
    case 1: return DriftKind::IteratedLog;
    case 2: return DriftKind::Tabulated;
    default: return DriftKind::FromScale;
  }
}

double DriftFunction::constant_value() const noexcept {
  if (const auto* c = get_if<ConstantFunction>()) return c->value;
  return std::numeric_limits<double>::quiet_NaN();
}

bool DriftFunction::is_zero() const noexcept {
  const auto* c = get_if<ConstantFunction>();
  return c != nullptr && c->value == 0.0;
}

std::vector<double> DriftFunction::breakpoints(double lo, double hi) const {
  if (const auto* s = get_if<IteratedLogSeries>()) {
    if (lo < s->threshold() && s->threshold() < hi) return {s->threshold()};
    return {};
  }
  if (const auto* t = get_if<PiecewiseLinear>()) return t->breakpoints(lo, hi);
  return {};
}

// ---------------------------------------------------------------------------
// DownCrossing

DownCrossing DownCrossing::constant(double gamma) {
  if (!std::isfinite(gamma)) throw Error(ErrorCode::GammaInadmissible, "gamma is not finite");
  return DownCrossing(ConstantFunction{gamma});
}

DownCrossing DownCrossing::iterated_log(double threshold, std::vector<LogTerm> terms,
                                        std::optional<double> below) {
  return DownCrossing(IteratedLogSeries(threshold, std::move(terms), below));
}

DownCrossing DownCrossing::tabulated(std::vector<double> grid, std::vector<double> values) {
  return DownCrossing(PiecewiseLinear(std::move(grid), std::move(values)));
}

double DownCrossing::operator()(double x) const noexcept {
  return std::visit(
      [x](const auto& f) -> double {
        if constexpr (std::is_same_v<std::decay_t<decltype(f)>, ConstantFunction>) {
          return f.value;
        } else {
          return f(x);
        }
      },
      v_);
}

double DownCrossing::derivative(double x) const noexcept {
  return std::visit(
      [x](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, ConstantFunction>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, IteratedLogSeries>) {
          return f.derivative(x);
        } else {
          return f.slope(x);
        }
      },
      v_);
}

DownCrossingKind DownCrossing::kind() const noexcept {
  switch (v_.index()) {
    case 0: return DownCrossingKind::Constant;
    case 1: return DownCrossingKind::IteratedLog;
    default: return DownCrossingKind::Tabulated;
  }
}

double DownCrossing::constant_value() const noexcept {
  if (const auto* c = get_if<ConstantFunction>()) return c->value;
  return std::numeric_limits<double>::quiet_NaN();
}

// ---------------------------------------------------------------------------

TwoPhaseModel TwoPhaseModel::make(DriftFunction transient, DriftFunction recurrent,
                                  DownCrossing gamma, double x0, std::optional<double> z0,
                                  double diffusion) {
  if (!(diffusion > 0.0) || !std::isfinite(diffusion)) {
    throw Error(ErrorCode::InvalidArgument, "diffusion coefficient a must be positive");
  }
  if (!std::isfinite(x0)) throw Error(ErrorCode::InvalidArgument, "x0 must be finite");
  const double anchor = z0.value_or(x0 - gamma(x0) - 1.0);
  return TwoPhaseModel{std::move(transient), std::move(recurrent), std::move(gamma),
                       diffusion,            x0,                   anchor};
}

}  // namespace twophase
