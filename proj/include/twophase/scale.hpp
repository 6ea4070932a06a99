#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "twophase/model.hpp"

namespace twophase {

/// Scale curve of a drift under diffusion coefficient a.
///
/// Constant drifts get a closed form; FromScale drifts return their own
/// curve; iterated-log and tabulated drifts are integrated numerically. When
/// `table` is given, a cumulative table over it makes long-range increments
/// O(1); building it throws DomainTooLarge if |int 2b/a| exceeds 700 there.
std::shared_ptr<const ScaleCurve> make_scale_curve(const DriftFunction& drift,
                                                   double diffusion,
                                                   std::optional<Interval> table = std::nullopt);

/// Scale function u(x) = int_{z0}^x exp(-int_{z0}^y 2b/a) dy on a domain.
ScaleData build_scale(const DriftFunction& drift, double z0, Interval domain,
                      double diffusion = 1.0);

/// int_from^to exp(-int_base^y 2b/a) dy without forming the raw exponents.
double scale_increment(const DriftFunction& drift, double base, double from, double to,
                       double diffusion = 1.0);

/// int_from^to 2b/a.
double potential_difference(const DriftFunction& drift, double from, double to,
                            double diffusion = 1.0);

/// Scale curve read from a table of (x, u, u') rows. u is cubic Hermite
/// between rows; log u' is linear, so the drift is piecewise constant.
std::shared_ptr<const ScaleCurve> make_tabulated_scale(std::vector<double> x,
                                                       std::vector<double> u,
                                                       std::vector<double> u_prime,
                                                       double diffusion = 1.0);

/// Scale curve given directly by closed-form callables (u up to a constant,
/// log u', and the drift -(a/2)(log u')').
class ClosedFormScale : public ScaleCurve {
 public:
  virtual double u(double x) const = 0;
  virtual double log_u_prime(double x) const = 0;

  double log_slope_change(double from, double to) const override {
    return log_u_prime(to) - log_u_prime(from);
  }
  double increment(double from, double to, double base) const override;
  ScaleProvenance provenance() const override { return ScaleProvenance::ClosedForm; }
};

}  // namespace twophase
