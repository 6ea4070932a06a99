#include "twophase/regeneration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace twophase {

// ---------------------------------------------------------------------------
// Onset sampling

double onset_quantile(const ModelAnalytics& an, double x, double e, const OnsetOptions& opt) {
  if (!(e > 0.0)) return 0.0;
  if (auto lam = an.constant_hazard()) return e / *lam;

  // Signed integral of the hazard over [x + p, x + q].
  auto hazard_between = [&](double p, double q) {
    return q >= p ? an.cumulative_hazard(x + p, q - p, opt.quadrature)
                  : -an.cumulative_hazard(x + q, p - q, opt.quadrature);
  };

  const double lam0 = an.onset_hazard(x);
  double lo = 0.0, h_lo = 0.0;
  double hi = (lam0 > 0.0 && std::isfinite(lam0)) ? e / lam0 : 1.0;
  hi = std::min(hi, opt.bracket_ceiling);
  double h_hi = hazard_between(0.0, hi);
  while (h_hi < e) {
    if (hi >= opt.bracket_ceiling) {
      std::ostringstream msg;
      msg << "onset hazard from x=" << x << " integrates to only " << h_hi << " < " << e
          << " over " << hi;
      throw Error(ErrorCode::HazardUnderflow, msg.str());
    }
    const double next = std::min(2.0 * hi, opt.bracket_ceiling);
    lo = hi;
    h_lo = h_hi;
    h_hi = h_lo + hazard_between(hi, next);
    hi = next;
  }

  // Newton on the cumulative hazard, falling back to bisection when a step
  // leaves the bracket. Each step integrates only the new piece.
  double y = lo, h_y = h_lo;
  if (h_hi - e < e - h_lo) {
    y = hi;
    h_y = h_hi;
  }
  for (int it = 0; it < 200; ++it) {
    const double tol =
        std::max(opt.tolerance, 4.0 * std::numeric_limits<double>::epsilon() * (std::abs(x) + hi));
    if (hi - lo <= tol) break;
    double cand = y + (e - h_y) / an.onset_hazard(x + y);
    if (!(cand > lo && cand < hi)) cand = 0.5 * (lo + hi);
    const double h_c = h_y + hazard_between(y, cand);
    if (h_c < e) {
      lo = cand;
      h_lo = h_c;
    } else {
      hi = cand;
      h_hi = h_c;
    }
    const double step = cand - y;
    y = cand;
    h_y = h_c;
    if (std::abs(step) <= tol) break;
  }
  return y;
}

double sample_onset(const ModelAnalytics& an, double x, CounterStream& rng,
                    const OnsetOptions& opt) {
  const double y = onset_quantile(an, x, rng.exponential(), opt);
  return std::max(x + y, std::nextafter(x, std::numeric_limits<double>::infinity()));
}

ChainTrajectory simulate_chain(const ModelAnalytics& an, std::size_t n, std::uint64_t seed,
                               std::uint64_t stream, const OnsetOptions& opt) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "chain length must be >= 1");
  ChainTrajectory c;
  c.x0 = an.model().x0;
  c.seed = seed;
  c.stream = stream;
  c.points.reserve(n + 1);
  c.points.push_back(c.x0);
  CounterStream rng(seed, stream, StreamPurpose::Onset);
  for (std::size_t k = 0; k < n; ++k) {
    try {
      c.points.push_back(sample_onset(an, c.points.back(), rng, opt));
    } catch (const Error& e) {
      std::ostringstream msg;
      msg << "chain step " << k + 1 << ": " << e.what();
      throw Error(e.code(), msg.str());
    }
  }
  return c;
}

std::vector<ChainTrajectory> simulate_chains(const ModelAnalytics& an, std::size_t n,
                                             std::size_t count, std::uint64_t seed,
                                             Execution ex, const OnsetOptions& opt) {
  return map_indices<ChainTrajectory>(
      count, ex, [&](std::size_t i) { return simulate_chain(an, n, seed, i, opt); });
}

// ---------------------------------------------------------------------------
// Classification

std::string to_string(Classification c) {
  switch (c) {
    case Classification::Recurrent: return "Recurrent";
    case Classification::Transient: return "Transient";
    case Classification::Unknown: return "Unknown";
  }
  return "Unknown";
}

std::string to_string(VerdictSource s) {
  switch (s) {
    case VerdictSource::Theorem1_1: return "Theorem1_1";
    case VerdictSource::Theorem1_3i: return "Theorem1_3i";
    case VerdictSource::Theorem1_3ii: return "Theorem1_3ii";
    case VerdictSource::Theorem1_4i: return "Theorem1_4i";
    case VerdictSource::Theorem1_4ii: return "Theorem1_4ii";
    case VerdictSource::TheoremP2ii: return "TheoremP2ii";
    case VerdictSource::Diagnostic: return "Diagnostic";
  }
  return "Diagnostic";
}

std::string to_string(Suggestion s) {
  switch (s) {
    case Suggestion::SuggestsRecurrent: return "SuggestsRecurrent";
    case Suggestion::SuggestsTransient: return "SuggestsTransient";
    case Suggestion::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

namespace {

using Coefficients = std::map<int, double>;

struct Comparison {
  int depth = 0;  // first depth where the coefficients differ; 0 if none
  int sign = 0;   // sign of (f - g) there
};

bool same(double p, double q) {
  return p == q || std::abs(p - q) <= 1e-12 * std::max(std::abs(p), std::abs(q));
}

// Eventual order of two iterated-log series: the shallowest differing depth
// dominates every deeper one.
Comparison compare(const IteratedLogSeries& f, const Coefficients& g) {
  Coefficients all = g;
  for (const auto& t : f.terms()) all.emplace(t.depth, 0.0);
  for (const auto& [depth, unused] : all) {
    (void)unused;
    const double fc = f.coefficient(depth);
    const auto it = g.find(depth);
    const double gc = it == g.end() ? 0.0 : it->second;
    if (!same(fc, gc)) return {depth, fc > gc ? 1 : -1};
  }
  return {};
}

// Whether b v 0 is again a recurrent drift; nullopt when it cannot be told.
std::optional<bool> positive_part_recurrent(const DriftFunction& b) {
  if (b.is_constant()) return b.constant_value() <= 0.0;
  if (const auto* s = b.get_if<IteratedLogSeries>()) {
    for (const auto& t : s->terms()) {
      if (t.coefficient > 0.0) return false;
      if (t.coefficient < 0.0) return true;
    }
    return true;
  }
  return std::nullopt;
}

// Threshold family (1/2g) log^(2) + (k/2g) log^(3) at k = 1, and the
// verdict it implies for a series eventually compared with it.
std::optional<Classification> threshold_rule(const IteratedLogSeries& f, double scale,
                                             std::string* why) {
  const Comparison c = compare(f, {{2, scale}, {3, scale}});
  std::ostringstream msg;
  if (c.sign == 0) {
    *why = "exactly on the k=1 line";
    return Classification::Recurrent;
  }
  if (c.sign < 0) {
    msg << "below the k=1 line (first difference at depth " << c.depth << ")";
    *why = msg.str();
    return Classification::Recurrent;
  }
  if (c.depth <= 3) {
    msg << "above the k=1 line by a depth-" << c.depth << " term, so above some k>1 line";
    *why = msg.str();
    return Classification::Transient;
  }
  msg << "above the k=1 line only at depth " << c.depth << "; between the two families";
  *why = msg.str();
  return std::nullopt;
}

}  // namespace

Verdict classify(const TwoPhaseModel& m) {
  Verdict v;
  const auto report = validate_model(m);
  if (!report.ok()) {
    v.detail = "model violates an invariant; no theorem applies";
    return v;
  }
  const bool gamma_const = m.gamma.is_constant();
  const double g = m.gamma.constant_value();

  // Constant transient drift, constant gamma, b^R v 0 recurrent.
  if (gamma_const && m.transient.is_constant() && m.transient.constant_value() > 0.0 &&
      report.recurrent_condition.verdict == Verdict3::Pass &&
      positive_part_recurrent(m.recurrent).value_or(false)) {
    v.result = Classification::Recurrent;
    v.source = VerdictSource::Theorem1_1;
    v.detail = "constant b^T > 0, constant gamma, and b^R v 0 is recurrent";
    return v;
  }

  // b^T above (1/2g) log + (k/g) log^(2) for some k > 1: transient for any b^R.
  // Checked before the b^R = 0 families since it is the stronger statement.
  if (gamma_const) {
    if (const auto* s = m.transient.get_if<IteratedLogSeries>()) {
      const Comparison c = compare(*s, {{1, 1.0 / (2.0 * g)}, {2, 1.0 / g}});
      if (c.sign > 0 && c.depth <= 2) {
        v.result = Classification::Transient;
        v.source = VerdictSource::TheoremP2ii;
        v.detail = "b^T eventually stops gamma-down-crossings, whatever b^R is";
        return v;
      }
    }
  }

  // b^R = 0 with the threshold family on b^T.
  if (gamma_const && m.recurrent.is_zero()) {
    if (const auto* s = m.transient.get_if<IteratedLogSeries>()) {
      std::string why;
      if (auto r = threshold_rule(*s, 1.0 / (2.0 * g), &why)) {
        v.result = *r;
        v.source = *r == Classification::Recurrent ? VerdictSource::Theorem1_3i
                                                   : VerdictSource::Theorem1_3ii;
        v.detail = "b^T " + why;
        return v;
      }
    }
  }

  // b^R = 0, constant b^T, and the threshold family on gamma.
  if (m.recurrent.is_zero() && m.transient.is_constant() && m.transient.constant_value() > 0.0) {
    if (const auto* s = m.gamma.get_if<IteratedLogSeries>()) {
      std::string why;
      if (auto r = threshold_rule(*s, 1.0 / (2.0 * m.transient.constant_value()), &why)) {
        v.result = *r;
        v.source = *r == Classification::Recurrent ? VerdictSource::Theorem1_4i
                                                   : VerdictSource::Theorem1_4ii;
        v.detail = "gamma " + why;
        return v;
      }
    }
  }

  v.detail = "no theorem hypothesis matches; run the divergence diagnostic";
  return v;
}

// ---------------------------------------------------------------------------
// Divergence diagnostic

DivergenceReport divergence_diagnostic(const ModelAnalytics& an, const ChainTrajectory& chain,
                                       const DiagnosticOptions& opt) {
  DivergenceReport r;
  const std::size_t n_terms = chain.points.size();
  r.h.reserve(n_terms);
  for (std::size_t n = 0; n < n_terms; ++n) r.h.push_back(an.criterion_H(chain.points[n]));

  const std::size_t steps = chain.steps();
  if (steps == 0) return r;

  // Checkpoints N = 10^{i/k}, rounded, plus the chain end. S_N sums n = 0..N.
  std::vector<std::size_t> marks;
  const double per = static_cast<double>(std::max<std::size_t>(opt.checkpoints_per_decade, 1));
  for (int i = 0;; ++i) {
    const auto N = static_cast<std::size_t>(std::llround(std::pow(10.0, i / per)));
    if (N >= steps) break;
    if (marks.empty() || N > marks.back()) marks.push_back(N);
  }
  marks.push_back(steps);
  double s = 0.0;
  std::size_t done = 0;
  for (std::size_t N : marks) {
    for (; done <= N; ++done) s += r.h[done];
    r.checkpoints.push_back(N);
    r.partial_sums.push_back(s);
  }
  r.total = s;
  double half = 0.0;
  for (std::size_t n = 0; n <= steps / 2; ++n) half += r.h[n];
  r.window_sum = r.total - half;

  if (steps < 16) return r;  // nothing asymptotic to say

  const double n_min = std::min(opt.fit_from, std::max(1.0, static_cast<double>(steps) / 10.0));
  std::vector<double> lx, ls, lg;
  for (std::size_t i = 0; i < r.checkpoints.size(); ++i) {
    const double N = static_cast<double>(r.checkpoints[i]);
    if (N < n_min) continue;
    lx.push_back(std::log(N));
    ls.push_back(r.partial_sums[i]);
    const double grown = chain.points[r.checkpoints[i]] - chain.x0;
    lg.push_back(grown > 0.0 ? std::log(grown) : 0.0);
  }
  if (lx.size() < 3) return r;
  r.log_fit = stats::linear_fit(lx, ls);
  r.growth_exponent = stats::linear_fit(lx, lg).slope;

  // Term decay from bin medians of n H(L_n), robust to rare large terms.
  std::vector<double> bx, by;
  for (std::size_t i = 0; i + 1 < r.checkpoints.size(); ++i) {
    const std::size_t lo = r.checkpoints[i], hi = r.checkpoints[i + 1];
    if (static_cast<double>(lo) < n_min || hi <= lo) continue;
    std::vector<double> nh;
    for (std::size_t n = lo; n < hi; ++n) nh.push_back(static_cast<double>(n) * r.h[n]);
    auto mid = nh.begin() + static_cast<std::ptrdiff_t>(nh.size() / 2);
    std::nth_element(nh.begin(), mid, nh.end());
    if (!(*mid > 0.0)) continue;
    bx.push_back(0.5 * (std::log(static_cast<double>(lo)) + std::log(static_cast<double>(hi))));
    by.push_back(std::log(*mid));
  }
  if (bx.size() >= 3) {
    const auto decay = stats::linear_fit(bx, by);
    r.term_decay = decay.slope;
    const double at_end =
        std::exp(decay.intercept + decay.slope * std::log(static_cast<double>(steps)));
    r.projected_tail = r.term_decay < 0.0 ? at_end / -r.term_decay
                                          : std::numeric_limits<double>::infinity();
  } else {
    r.projected_tail = std::numeric_limits<double>::infinity();
  }

  if (r.projected_tail < opt.transient_tail) {
    r.suggestion = Suggestion::SuggestsTransient;
  } else if (r.log_fit.r_squared >= opt.recurrent_r2 &&
             r.log_fit.slope > opt.recurrent_min_slope &&
             r.term_decay >= opt.recurrent_min_decay) {
    r.suggestion = Suggestion::SuggestsRecurrent;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Spike construction

namespace {

double smoothstep5(double t) { return t * t * t * (t * (6.0 * t - 15.0) + 10.0); }

}  // namespace

SpikeScale::SpikeScale(double gamma, double x0, double diffusion)
    : origin_(x0 - gamma), anchor_(std::min(x0 - gamma - 1.0, 1.0)), slope_(1.0), a_(diffusion) {
  // u >= x^2 on [2, end of I_2] must come from the linear part alone; past
  // that, the spikes carry it. x^2/(x - anchor) is convex, so endpoints do.
  const double end2 = origin_ + 2.0 + 0.25;
  for (double x : {2.0, end2}) {
    if (x >= 2.0) slope_ = std::max(slope_, x * x / (x - anchor_));
  }
}

long SpikeScale::cell(double x) const noexcept {
  return static_cast<long>(std::floor(x - origin_));
}

double SpikeScale::amplitude(long j) const noexcept {
  const double pj = origin_ + static_cast<double>(j);
  return j == 2 ? (pj + 2.0) * (pj + 2.0) : 2.0 * pj + 3.0;
}

double SpikeScale::cumulative(long j) const noexcept {
  if (j < 2) return 0.0;
  const double q = origin_ + static_cast<double>(j) + 2.0;
  return q * q;
}

Interval SpikeScale::spike(long j) const noexcept {
  const double pj = origin_ + static_cast<double>(j);
  const double w = 1.0 / (static_cast<double>(j) * static_cast<double>(j));
  return {pj, pj + w};
}

bool SpikeScale::in_spike(double x) const noexcept {
  const long j = cell(x);
  return j >= 2 && spike(j).contains(x);
}

double SpikeScale::u(double x) const {
  double v = slope_ * (x - anchor_);
  const long j = cell(x);
  if (j < 2) return v;
  const Interval s = spike(j);
  const double t = std::clamp((x - s.lo) / s.length(), 0.0, 1.0);
  return v + cumulative(j - 1) + amplitude(j) * smoothstep5(t);
}

double SpikeScale::u_prime(double x) const {
  const long j = cell(x);
  if (j < 2) return slope_;
  const Interval s = spike(j);
  const double t = (x - s.lo) / s.length();
  if (t <= 0.0 || t >= 1.0) return slope_;
  const double q = t * (1.0 - t);
  return slope_ + amplitude(j) * 30.0 * q * q / s.length();
}

double SpikeScale::log_u_prime(double x) const { return std::log(u_prime(x)); }

double SpikeScale::drift(double x) const {
  const long j = cell(x);
  if (j < 2) return 0.0;
  const Interval s = spike(j);
  const double t = (x - s.lo) / s.length();
  if (t <= 0.0 || t >= 1.0) return 0.0;
  const double w = s.length();
  const double upp = amplitude(j) * 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t) / (w * w);
  return -0.5 * a_ * upp / u_prime(x);
}

Theorem2Construction theorem2_generator(double b, double gamma, double x0, double diffusion) {
  if (!(b > 0.0) || !(gamma > 0.0) || !(diffusion > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "b, gamma and a must be positive");
  }
  if (!(x0 - gamma + 2.0 >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "the construction needs x0 - gamma + 2 >= 0");
  }
  auto scale = std::make_shared<const SpikeScale>(gamma, x0, diffusion);
  const double inf = std::numeric_limits<double>::infinity();
  ScaleData data(scale, scale->anchor(), Interval{-inf, inf}, diffusion);
  return {scale, DriftFunction::from_scale(std::move(data))};
}

}  // namespace twophase
