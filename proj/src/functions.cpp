#include "twophase/functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "twophase/error.hpp"

namespace twophase {

double iterated_log(double x, int depth) noexcept {
  double v = x;
  for (int j = 0; j < depth; ++j) {
    if (!(v > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    v = std::log(v);
  }
  return v;
}

double iterated_log_derivative(double x, int depth) noexcept {
  double denom = x;
  double v = x;
  for (int j = 1; j < depth; ++j) {
    v = std::log(v);
    denom *= v;
  }
  return 1.0 / denom;
}

namespace {

std::vector<LogTerm> merge_terms(std::vector<LogTerm> terms) {
  std::map<int, double> merged;
  for (const auto& t : terms) {
    if (t.depth < 1) {
      throw Error(ErrorCode::MalformedDrift, "iterated-log depth must be >= 1");
    }
    if (!std::isfinite(t.coefficient)) {
      throw Error(ErrorCode::MalformedDrift, "iterated-log coefficient is not finite");
    }
    merged[t.depth] += t.coefficient;
  }
  std::vector<LogTerm> out;
  out.reserve(merged.size());
  for (const auto& [depth, c] : merged) out.push_back({depth, c});
  return out;
}

}  // namespace

IteratedLogSeries::IteratedLogSeries(double threshold, std::vector<LogTerm> terms,
                                     std::optional<double> below)
    : threshold_(threshold), terms_(merge_terms(std::move(terms))) {
  const int depth = max_depth();
  if (!std::isfinite(threshold_) || !(iterated_log(threshold_, depth) > 0.0)) {
    std::ostringstream msg;
    msg << "threshold " << threshold_ << " leaves log^(" << depth
        << ") undefined or non-positive";
    throw Error(ErrorCode::MalformedDrift, msg.str());
  }
  const double at_threshold = series(threshold_);
  below_ = below.value_or(at_threshold);
  below_continuous_ = !below.has_value() || *below == at_threshold;
  if (!std::isfinite(below_)) {
    throw Error(ErrorCode::MalformedDrift, "value below threshold is not finite");
  }
}

double IteratedLogSeries::series(double x) const noexcept {
  // Shares the chain of logarithms across terms.
  double sum = 0.0;
  double v = x;
  int depth = 0;
  for (const auto& t : terms_) {
    while (depth < t.depth) {
      v = std::log(v);
      ++depth;
    }
    sum += t.coefficient * v;
  }
  return sum;
}

double IteratedLogSeries::operator()(double x) const noexcept {
  return x < threshold_ ? below_ : series(x);
}

double IteratedLogSeries::derivative(double x) const noexcept {
  if (x < threshold_) return 0.0;
  double sum = 0.0;
  for (const auto& t : terms_) sum += t.coefficient * iterated_log_derivative(x, t.depth);
  return sum;
}

double IteratedLogSeries::coefficient(int depth) const noexcept {
  for (const auto& t : terms_) {
    if (t.depth == depth) return t.coefficient;
  }
  return 0.0;
}

int IteratedLogSeries::max_depth() const noexcept {
  return terms_.empty() ? 1 : terms_.back().depth;
}

PiecewiseLinear::PiecewiseLinear(std::vector<double> grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (grid_.size() < 2 || grid_.size() != values_.size()) {
    throw Error(ErrorCode::MalformedDrift,
                "tabulated function needs >= 2 grid points and matching values");
  }
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    if (!std::isfinite(grid_[i]) || !std::isfinite(values_[i])) {
      throw Error(ErrorCode::MalformedDrift, "tabulated function has non-finite entries");
    }
    if (i > 0 && !(grid_[i] > grid_[i - 1])) {
      throw Error(ErrorCode::MalformedDrift, "tabulated grid must be strictly increasing");
    }
  }
  const double h = (grid_.back() - grid_.front()) / static_cast<double>(grid_.size() - 1);
  bool even = true;
  for (std::size_t i = 0; i < grid_.size() && even; ++i) {
    even = std::abs(grid_[i] - (grid_.front() + h * static_cast<double>(i))) <= 1e-9 * h;
  }
  if (even) uniform_step_ = h;
}

std::size_t PiecewiseLinear::segment(double x) const noexcept {
  if (uniform_step_ > 0.0) {
    // Guess from the spacing, then correct for rounding at the nodes.
    auto i = static_cast<std::size_t>((x - grid_.front()) / uniform_step_);
    i = std::min(i, grid_.size() - 2);
    while (i > 0 && x < grid_[i]) --i;
    while (i + 2 < grid_.size() && x >= grid_[i + 1]) ++i;
    return i;
  }
  const auto it = std::upper_bound(grid_.begin(), grid_.end(), x);
  return static_cast<std::size_t>(it - grid_.begin()) - 1;
}

double PiecewiseLinear::operator()(double x) const noexcept {
  if (x <= grid_.front()) return values_.front();
  if (x >= grid_.back()) return values_.back();
  const std::size_t i = segment(x);
  const double t = (x - grid_[i]) / (grid_[i + 1] - grid_[i]);
  return values_[i] + t * (values_[i + 1] - values_[i]);
}

double PiecewiseLinear::slope(double x) const noexcept {
  if (x < grid_.front() || x >= grid_.back()) return 0.0;
  const std::size_t i = segment(x);
  return (values_[i + 1] - values_[i]) / (grid_[i + 1] - grid_[i]);
}

std::vector<double> PiecewiseLinear::breakpoints(double lo, double hi) const {
  auto first = std::upper_bound(grid_.begin(), grid_.end(), lo);
  auto last = std::lower_bound(grid_.begin(), grid_.end(), hi);
  if (first >= last) return {};
  return {first, last};
}

}  // namespace twophase
