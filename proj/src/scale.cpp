#include "twophase/scale.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "twophase/quadrature.hpp"
#include "twophase/scale_detail.hpp"

namespace twophase {

namespace {

constexpr double kExponentGuard = 700.0;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

namespace detail {

double log_exp_integral(double k, double h) {
  if (h <= 0.0) return kNegInf;
  const double kh = k * h;
  if (std::abs(kh) < 1e-8) return std::log(h) + std::log1p(-0.5 * kh + kh * kh / 6.0);
  if (kh > 0.0) return std::log(-std::expm1(-kh)) - std::log(k);
  return -kh + std::log(-std::expm1(kh)) - std::log(-k);
}

double log_add_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

}  // namespace detail

using detail::log_add_exp;
using detail::log_exp_integral;

double ClosedFormScale::increment(double from, double to, double base) const {
  return (u(to) - u(from)) * std::exp(-log_u_prime(base));
}

namespace {

// ---------------------------------------------------------------------------

class ConstantScale final : public ScaleCurve {
 public:
  ConstantScale(double drift, double diffusion) : b_(drift), k_(2.0 * drift / diffusion) {}

  double log_slope_change(double from, double to) const override { return -k_ * (to - from); }

  double increment(double from, double to, double base) const override {
    if (to < from) return -increment(to, from, base);
    if (to == from) return 0.0;
    return std::exp(-k_ * (from - base) + log_exp_integral(k_, to - from));
  }

  double drift(double) const override { return b_; }
  std::optional<bool> unbounded_above() const override { return k_ <= 0.0; }
  std::optional<bool> unbounded_below() const override { return k_ >= 0.0; }
  ScaleProvenance provenance() const override { return ScaleProvenance::ClosedForm; }

 private:
  double b_;
  double k_;
};

// ---------------------------------------------------------------------------

struct March {
  double potential = 0.0;      // int_from^to 2b/a
  double log_integral = kNegInf;  // log int_from^to exp(-int_from^y 2b/a) dy
};

class QuadratureScale final : public ScaleCurve {
 public:
  QuadratureScale(DriftFunction drift, double diffusion, std::optional<Interval> table)
      : drift_(std::move(drift)), a_(diffusion) {
    if (table) build_table(*table);
  }

  double log_slope_change(double from, double to) const override {
    if (to < from) return -log_slope_change(to, from);
    if (in_table(from) && in_table(to) && to - from > kTableSpan) {
      return -(table_potential(to) - table_potential(from));
    }
    return -march_potential(from, to);
  }

  double increment(double from, double to, double base) const override {
    if (to < from) return -increment(to, from, base);
    if (to == from) return 0.0;
    if (in_table(from) && in_table(to) && in_table(base) && to - from > kTableSpan) {
      const double u_to = table_u(to);
      const double diff = u_to - table_u(from);
      // A converging u loses all digits in the difference; march instead.
      if (diff > 1e-6 * std::abs(u_to)) return std::exp(table_potential(base)) * diff;
    }
    const March m = march(from, to);
    double shift;
    if (base == from) {
      shift = 0.0;
    } else if (base == to) {
      shift = -m.potential;
    } else {
      shift = base < from ? march_potential(base, from) : -march_potential(from, base);
    }
    return std::exp(m.log_integral - shift);
  }

  double drift(double x) const override { return drift_(x); }
  ScaleProvenance provenance() const override { return ScaleProvenance::Quadrature; }

 private:
  static constexpr double kTableSpan = 4.0;

  double rate(double x) const { return 2.0 * drift_(x) / a_; }

  std::optional<double> constant_rate_on(double lo, double hi) const {
    if (const auto* s = drift_.get_if<IteratedLogSeries>()) {
      if (hi <= s->threshold()) return 2.0 * s->below() / a_;
      if (s->terms().empty() && lo >= s->threshold()) return 0.0;
    } else if (const auto* t = drift_.get_if<PiecewiseLinear>()) {
      if (hi <= t->grid().front()) return 2.0 * t->values().front() / a_;
      if (lo >= t->grid().back()) return 2.0 * t->values().back() / a_;
      const double vlo = (*t)(lo);
      if (vlo == (*t)(hi) && t->breakpoints(lo, hi).empty()) return 2.0 * vlo / a_;
    }
    return std::nullopt;
  }

  double panel_width(double x) const {
    const double cap = std::max(1.0, 0.02 * std::abs(x));
    const double r = std::abs(rate(x));
    return r > 0.0 ? std::min(cap, 4.0 / r) : cap;
  }

  template <class PieceFn>
  void for_each_piece(double from, double to, PieceFn&& fn) const {
    double lo = from;
    for (double bp : drift_.breakpoints(from, to)) {
      fn(lo, bp);
      lo = bp;
    }
    fn(lo, to);
  }

  template <class PanelFn>
  void for_each_panel(double lo, double hi, PanelFn&& fn) const {
    double x = lo;
    while (x < hi) {
      const double w = panel_width(x);
      double y = x + w;
      if (y >= hi || hi - y < 1e-3 * w) y = hi;
      fn(x, y);
      x = y;
    }
  }

  March march(double from, double to) const {
    March m;
    auto rate_fn = [this](double x) { return rate(x); };
    for_each_piece(from, to, [&](double lo, double hi) {
      if (hi <= lo) return;
      if (auto k = constant_rate_on(lo, hi)) {
        m.log_integral =
            log_add_exp(m.log_integral, -m.potential + log_exp_integral(*k, hi - lo));
        m.potential += *k * (hi - lo);
        return;
      }
      for_each_panel(lo, hi, [&](double p, double q) {
        const auto panel = quad::exp_panel(rate_fn, p, q);
        m.log_integral = log_add_exp(m.log_integral, -m.potential + std::log(panel.integral));
        m.potential += panel.potential;
      });
    });
    return m;
  }

  double march_potential(double from, double to) const {
    double total = 0.0;
    auto rate_fn = [this](double x) { return rate(x); };
    for_each_piece(from, to, [&](double lo, double hi) {
      if (hi <= lo) return;
      if (auto k = constant_rate_on(lo, hi)) {
        total += *k * (hi - lo);
        return;
      }
      for_each_panel(lo, hi, [&](double p, double q) { total += quad::gauss_panel(rate_fn, p, q); });
    });
    return total;
  }

  // Cumulative table: potential and u measured from the first node.
  void build_table(Interval domain) {
    if (!(domain.hi > domain.lo)) return;
    nodes_.push_back(domain.lo);
    potential_.push_back(0.0);
    u_.push_back(0.0);
    auto rate_fn = [this](double x) { return rate(x); };
    auto push = [&](double q, double dpot, double log_int) {
      const double phi0 = potential_.back();
      if (std::abs(phi0) > kExponentGuard) {
        std::ostringstream msg;
        msg << "scale exponent " << phi0 << " exceeds guard at x=" << nodes_.back();
        throw Error(ErrorCode::DomainTooLarge, msg.str());
      }
      u_.push_back(u_.back() + std::exp(-phi0 + log_int));
      potential_.push_back(phi0 + dpot);
      nodes_.push_back(q);
    };
    for_each_piece(domain.lo, domain.hi, [&](double lo, double hi) {
      if (hi <= lo) return;
      if (auto k = constant_rate_on(lo, hi)) {
        // Constant stretches are split so that the exponent guard is checked.
        const double step = *k != 0.0 ? std::min(hi - lo, 50.0 / std::abs(*k)) : hi - lo;
        for (double p = lo; p < hi;) {
          const double q = (hi - p <= step * 1.000001) ? hi : p + step;
          push(q, *k * (q - p), log_exp_integral(*k, q - p));
          p = q;
        }
        return;
      }
      for_each_panel(lo, hi, [&](double p, double q) {
        const auto panel = quad::exp_panel(rate_fn, p, q);
        push(q, panel.potential, std::log(panel.integral));
      });
    });
    if (std::abs(potential_.back()) > kExponentGuard) {
      throw Error(ErrorCode::DomainTooLarge, "scale exponent exceeds guard at domain end");
    }
  }

  bool in_table(double x) const {
    return !nodes_.empty() && nodes_.front() <= x && x <= nodes_.back();
  }

  std::size_t node_index(double x) const {
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - nodes_.begin());
    return i == 0 ? 0 : std::min(i - 1, nodes_.size() - 1);
  }

  double table_potential(double x) const {
    const std::size_t i = node_index(x);
    return potential_[i] + (x > nodes_[i] ? march_potential(nodes_[i], x) : 0.0);
  }

  double table_u(double x) const {
    const std::size_t i = node_index(x);
    if (!(x > nodes_[i])) return u_[i];
    const March m = march(nodes_[i], x);
    return u_[i] + std::exp(-potential_[i] + m.log_integral);
  }

  DriftFunction drift_;
  double a_;
  std::vector<double> nodes_;
  std::vector<double> potential_;
  std::vector<double> u_;
};

// ---------------------------------------------------------------------------

class TabulatedScale final : public ClosedFormScale {
 public:
  TabulatedScale(std::vector<double> x, std::vector<double> u, std::vector<double> u_prime,
                 double diffusion)
      : x_(std::move(x)), u_(std::move(u)), a_(diffusion) {
    log_up_.reserve(u_prime.size());
    for (double v : u_prime) log_up_.push_back(std::log(v));
  }

  double u(double x) const override {
    if (x <= x_.front()) return u_.front() + std::exp(log_up_.front()) * (x - x_.front());
    if (x >= x_.back()) return u_.back() + std::exp(log_up_.back()) * (x - x_.back());
    const std::size_t i = index(x);
    const double h = x_[i + 1] - x_[i];
    const double t = (x - x_[i]) / h;
    const double h00 = (1 + 2 * t) * (1 - t) * (1 - t);
    const double h10 = t * (1 - t) * (1 - t);
    const double h01 = t * t * (3 - 2 * t);
    const double h11 = t * t * (t - 1);
    return h00 * u_[i] + h10 * h * std::exp(log_up_[i]) + h01 * u_[i + 1] +
           h11 * h * std::exp(log_up_[i + 1]);
  }

  double log_u_prime(double x) const override {
    if (x <= x_.front()) return log_up_.front();
    if (x >= x_.back()) return log_up_.back();
    const std::size_t i = index(x);
    const double t = (x - x_[i]) / (x_[i + 1] - x_[i]);
    return log_up_[i] + t * (log_up_[i + 1] - log_up_[i]);
  }

  // Cell slopes of log u' sit at cell midpoints; interpolating between them
  // keeps the drift continuous and second order at the nodes.
  double drift(double x) const override {
    if (x <= x_.front() || x >= x_.back()) return 0.0;
    std::size_t i = index(x);
    const double mid = 0.5 * (x_[i] + x_[i + 1]);
    if (x < mid && i > 0) --i;
    if (i + 2 >= x_.size()) return cell_drift(x_.size() - 2);
    const double m0 = 0.5 * (x_[i] + x_[i + 1]), m1 = 0.5 * (x_[i + 1] + x_[i + 2]);
    const double t = std::clamp((x - m0) / (m1 - m0), 0.0, 1.0);
    return (1 - t) * cell_drift(i) + t * cell_drift(i + 1);
  }

  ScaleProvenance provenance() const override { return ScaleProvenance::Quadrature; }

 private:
  std::size_t index(double x) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    return static_cast<std::size_t>(it - x_.begin()) - 1;
  }

  double cell_drift(std::size_t i) const {
    return -0.5 * a_ * (log_up_[i + 1] - log_up_[i]) / (x_[i + 1] - x_[i]);
  }

  std::vector<double> x_;
  std::vector<double> u_;
  std::vector<double> log_up_;
  double a_;
};

}  // namespace

std::shared_ptr<const ScaleCurve> make_tabulated_scale(std::vector<double> x,
                                                       std::vector<double> u,
                                                       std::vector<double> u_prime,
                                                       double diffusion) {
  if (x.size() < 2 || u.size() != x.size() || u_prime.size() != x.size()) {
    throw Error(ErrorCode::MalformedDrift, "scale table needs >= 2 rows of (x, u, u')");
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(u_prime[i] > 0.0) || !std::isfinite(u[i]) || !std::isfinite(x[i])) {
      throw Error(ErrorCode::MalformedDrift, "scale table needs finite u and u' > 0");
    }
    if (i > 0 && !(x[i] > x[i - 1] && u[i] > u[i - 1])) {
      throw Error(ErrorCode::MalformedDrift, "scale table must be strictly increasing");
    }
  }
  return std::make_shared<TabulatedScale>(std::move(x), std::move(u), std::move(u_prime),
                                          diffusion);
}

std::shared_ptr<const ScaleCurve> make_scale_curve(const DriftFunction& drift, double diffusion,
                                                   std::optional<Interval> table) {
  if (!(diffusion > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "diffusion coefficient must be positive");
  }
  switch (drift.kind()) {
    case DriftKind::Constant:
      return std::make_shared<ConstantScale>(drift.constant_value(), diffusion);
    case DriftKind::FromScale:
      return drift.get_if<ScaleData>()->shared_curve();
    case DriftKind::IteratedLog:
    case DriftKind::Tabulated:
      break;
  }
  return std::make_shared<QuadratureScale>(drift, diffusion, table);
}

ScaleData build_scale(const DriftFunction& drift, double z0, Interval domain, double diffusion) {
  if (!domain.contains(z0)) {
    throw Error(ErrorCode::InvalidArgument, "scale anchor z0 must lie in the domain");
  }
  auto curve = make_scale_curve(drift, diffusion, domain);
  for (double end : {domain.lo, domain.hi}) {
    const double e = curve->log_slope_change(z0, end);
    if (!(std::abs(e) <= kExponentGuard)) {
      std::ostringstream msg;
      msg << "scale exponent " << e << " at x=" << end
          << " exceeds the overflow guard; use shifted-base increments";
      throw Error(ErrorCode::DomainTooLarge, msg.str());
    }
  }
  return ScaleData(std::move(curve), z0, domain, diffusion);
}

double scale_increment(const DriftFunction& drift, double base, double from, double to,
                       double diffusion) {
  if (!std::isfinite(base) || !std::isfinite(from) || !std::isfinite(to)) {
    throw Error(ErrorCode::InvalidArgument, "scale_increment needs finite arguments");
  }
  return make_scale_curve(drift, diffusion)->increment(from, to, base);
}

double potential_difference(const DriftFunction& drift, double from, double to,
                            double diffusion) {
  return -make_scale_curve(drift, diffusion)->log_slope_change(from, to);
}

}  // namespace twophase
