#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "twophase/error.hpp"
#include "twophase/functions.hpp"

namespace twophase {

enum class ScaleProvenance { ClosedForm, Quadrature };

/// A scale function u with u' > 0, known only up to an additive constant.
///
/// Implementations answer everything in "shifted-base" form so that callers
/// never need the raw exponent exp(-int 2b/a), which overflows quickly for
/// transient drifts.
class ScaleCurve {
 public:
  virtual ~ScaleCurve() = default;

  /// log u'(to) - log u'(from), i.e. -int_from^to 2b/a.
  virtual double log_slope_change(double from, double to) const = 0;

  /// int_from^to u'(y)/u'(base) dy.
  virtual double increment(double from, double to, double base) const = 0;

  /// Drift recovered from the curve: -(a/2) (log u')'.
  virtual double drift(double x) const = 0;

  /// Whether u(+inf) = +inf / u(-inf) = -inf, when known analytically.
  virtual std::optional<bool> unbounded_above() const { return std::nullopt; }
  virtual std::optional<bool> unbounded_below() const { return std::nullopt; }

  virtual ScaleProvenance provenance() const = 0;
};

/// Scale function pair (u, u') anchored so that u(z0) = 0.
class ScaleData {
 public:
  ScaleData(std::shared_ptr<const ScaleCurve> curve, double z0, Interval domain,
            double diffusion);

  double z0() const noexcept { return z0_; }
  Interval domain() const noexcept { return domain_; }
  double diffusion() const noexcept { return diffusion_; }
  ScaleProvenance provenance() const noexcept { return curve_->provenance(); }
  const ScaleCurve& curve() const noexcept { return *curve_; }
  std::shared_ptr<const ScaleCurve> shared_curve() const noexcept { return curve_; }

  /// u(x) with u(z0) = 0, in units where u'(z0) = 1.
  double u(double x) const;
  /// u'(x) / u'(z0). Throws DomainTooLarge when the exponent exceeds 700.
  double u_prime(double x) const;
  /// log u'(x) - log u'(z0).
  double log_u_prime(double x) const;

  /// Same curve, new anchor.
  ScaleData reanchored(double z0) const;

 private:
  std::shared_ptr<const ScaleCurve> curve_;
  double z0_;
  Interval domain_;
  double diffusion_;
};

enum class DriftKind { Constant, IteratedLog, Tabulated, FromScale };

struct ConstantFunction {
  double value = 0.0;
};

/// One drift phase b(x).
class DriftFunction {
 public:
  using Variant =
      std::variant<ConstantFunction, IteratedLogSeries, PiecewiseLinear, ScaleData>;

  static DriftFunction constant(double value);
  static DriftFunction iterated_log(double threshold, std::vector<LogTerm> terms,
                                    std::optional<double> below = std::nullopt);
  static DriftFunction tabulated(std::vector<double> grid, std::vector<double> values);
  static DriftFunction from_scale(ScaleData scale);

  double operator()(double x) const;
  DriftKind kind() const noexcept;
  const Variant& variant() const noexcept { return v_; }

  template <class T>
  const T* get_if() const noexcept {
    return std::get_if<T>(&v_);
  }

  bool is_constant() const noexcept { return kind() == DriftKind::Constant; }
  /// Value of a Constant drift; NaN for other kinds.
  double constant_value() const noexcept;
  /// True for a Constant drift equal to zero.
  bool is_zero() const noexcept;

  /// Points in (lo, hi) where the drift is not smooth.
  std::vector<double> breakpoints(double lo, double hi) const;

 private:
  explicit DriftFunction(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

enum class DownCrossingKind { Constant, IteratedLog, Tabulated };

/// The down-crossing function gamma(x).
class DownCrossing {
 public:
  using Variant = std::variant<ConstantFunction, IteratedLogSeries, PiecewiseLinear>;

  static DownCrossing constant(double gamma);
  static DownCrossing iterated_log(double threshold, std::vector<LogTerm> terms,
                                   std::optional<double> below = std::nullopt);
  static DownCrossing tabulated(std::vector<double> grid, std::vector<double> values);

  double operator()(double x) const noexcept;
  double derivative(double x) const noexcept;
  DownCrossingKind kind() const noexcept;
  const Variant& variant() const noexcept { return v_; }

  template <class T>
  const T* get_if() const noexcept {
    return std::get_if<T>(&v_);
  }

  bool is_constant() const noexcept { return kind() == DownCrossingKind::Constant; }
  double constant_value() const noexcept;

 private:
  explicit DownCrossing(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

enum class Mode : std::uint8_t { RecurrentPhase = 0, TransientPhase = 1 };

/// Two-phase mode rule: transient iff x > xmax - gamma(xmax).
inline Mode mode_at(double x, double xmax, const DownCrossing& gamma) {
  return x > xmax - gamma(xmax) ? Mode::TransientPhase : Mode::RecurrentPhase;
}

/// Full problem instance.
struct TwoPhaseModel {
  DriftFunction transient;
  DriftFunction recurrent;
  DownCrossing gamma;
  double diffusion = 1.0;
  double x0 = 0.0;
  double z0 = 0.0;

  /// Builds a model with z0 defaulting to x0 - gamma(x0) - 1.
  static TwoPhaseModel make(DriftFunction transient, DriftFunction recurrent,
                            DownCrossing gamma, double x0,
                            std::optional<double> z0 = std::nullopt,
                            double diffusion = 1.0);

  /// Drift in force at position x with running maximum xmax.
  double drift(double x, double xmax) const {
    return mode_at(x, xmax, gamma) == Mode::TransientPhase ? transient(x) : recurrent(x);
  }
};

// ---------------------------------------------------------------------------
// Validation

enum class Verdict3 { Pass, Fail, Undetermined };
enum class Tail { Converges, Diverges, Undetermined };

std::string to_string(Verdict3 v);
std::string to_string(Tail t);

/// Behaviour of the improper integrals of exp(-int_0^x 2b) at +-infinity.
struct TailBehaviour {
  Tail upper = Tail::Undetermined;  // int^{+inf}
  Tail lower = Tail::Undetermined;  // int_{-inf}
  /// Truncated estimates over the data range when undetermined.
  std::optional<double> upper_estimate;
  std::optional<double> lower_estimate;
};

TailBehaviour tail_behaviour(const DriftFunction& drift);

struct ConditionVerdict {
  Verdict3 verdict = Verdict3::Undetermined;
  TailBehaviour tails;
  std::string detail;
};

struct ValidationIssue {
  ErrorCode code;
  std::string message;
};

struct ValidationReport {
  ConditionVerdict transient_condition;
  ConditionVerdict recurrent_condition;
  std::vector<ValidationIssue> issues;
  /// Set when the gamma checks rest on finite data (tabulated gamma).
  bool gamma_checks_heuristic = false;

  /// No invariant is violated. The drift conditions are reported separately:
  /// the ballistic model deliberately uses a transient "recurrent" drift.
  bool ok() const noexcept;
  /// Neither drift fails its integral condition.
  bool conditions_hold() const noexcept;
};

ConditionVerdict transient_condition(const DriftFunction& drift);
ConditionVerdict recurrent_condition(const DriftFunction& drift);

/// Checks gamma > 0, gamma' < 1 and x - gamma(x) -> inf. Returns issues found;
/// sets `heuristic` when a check could only be done on finite data.
std::vector<ValidationIssue> check_down_crossing(const DownCrossing& gamma,
                                                 bool* heuristic = nullptr);

ValidationReport validate_model(const TwoPhaseModel& model);

}  // namespace twophase
