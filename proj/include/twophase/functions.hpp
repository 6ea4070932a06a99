#pragma once

#include <optional>
#include <span>
#include <vector>

namespace twophase {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double x) const noexcept { return lo <= x && x <= hi; }
  double length() const noexcept { return hi - lo; }
};

/// log^{(depth)}(x): the logarithm applied `depth` times. NaN where undefined.
double iterated_log(double x, int depth) noexcept;

/// d/dx log^{(depth)}(x) = 1 / (x * log x * ... * log^{(depth-1)} x).
double iterated_log_derivative(double x, int depth) noexcept;

struct LogTerm {
  int depth = 1;
  double coefficient = 0.0;
};

/// Sum of coefficient * log^{(depth)}(x) for x >= threshold, constant below it.
///
/// The value below the threshold defaults to the series value at the
/// threshold, which keeps the function continuous. Terms with equal depth
/// are merged on construction. Throws MalformedDrift when the threshold does
/// not make every iterated logarithm defined and positive.
class IteratedLogSeries {
 public:
  IteratedLogSeries(double threshold, std::vector<LogTerm> terms,
                    std::optional<double> below = std::nullopt);

  double operator()(double x) const noexcept;
  double derivative(double x) const noexcept;

  double threshold() const noexcept { return threshold_; }
  double below() const noexcept { return below_; }
  bool below_is_continuous() const noexcept { return below_continuous_; }
  std::span<const LogTerm> terms() const noexcept { return terms_; }

  /// Coefficient on log^{(depth)}; zero when the depth is absent.
  double coefficient(int depth) const noexcept;
  int max_depth() const noexcept;

  /// Value of the series part alone, ignoring the threshold.
  double series(double x) const noexcept;

 private:
  double threshold_;
  std::vector<LogTerm> terms_;
  double below_;
  bool below_continuous_;
};

/// Piecewise-linear interpolant with constant extrapolation outside the grid.
class PiecewiseLinear {
 public:
  PiecewiseLinear(std::vector<double> grid, std::vector<double> values);

  double operator()(double x) const noexcept;
  /// Slope of the segment containing x (zero outside the grid).
  double slope(double x) const noexcept;

  std::span<const double> grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  Interval support() const noexcept { return {grid_.front(), grid_.back()}; }

  /// Grid nodes strictly inside (lo, hi).
  std::vector<double> breakpoints(double lo, double hi) const;

 private:
  std::size_t segment(double x) const noexcept;

  std::vector<double> grid_;
  std::vector<double> values_;
  double uniform_step_ = 0.0;  // > 0 when the grid is evenly spaced
};

}  // namespace twophase
