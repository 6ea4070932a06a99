#include "twophase/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "twophase/rng.hpp"
#include "twophase/stats.hpp"

namespace twophase {

std::uint64_t PathConfig::steps() const {
  if (!(dt > 0.0) || !(horizon > 0.0) || !std::isfinite(horizon) || !(dt < horizon)) {
    throw Error(ErrorCode::InvalidArgument, "path config needs 0 < dt < horizon");
  }
  const auto n = static_cast<std::uint64_t>(std::ceil(horizon / dt - 1e-9));
  if (max_steps != 0 && n > max_steps) {
    std::ostringstream msg;
    msg << "horizon needs " << n << " steps but max_steps is " << max_steps;
    throw Error(ErrorCode::StepCapExceeded, msg.str());
  }
  return n;
}

namespace {

// Gaussian increments and Brownian-bridge corrections for one stream.
class Noise {
 public:
  Noise(const PathConfig& cfg, double a, std::uint64_t stream)
      : gauss_(cfg.seed, stream, StreamPurpose::Gaussian),
        bridge_(cfg.seed, stream, StreamPurpose::Bridge),
        sd_(std::sqrt(a * cfg.dt)),
        var_(a * cfg.dt),
        on_(cfg.bridge_correction) {}

  double increment() { return sd_ * gauss_.normal(); }

  // Maximum over the step: the endpoint maximum, or a draw from the bridge law.
  double step_max(double x, double y) {
    if (!on_) return std::max(x, y);
    const double d = y - x;
    return 0.5 * (x + y + std::sqrt(d * d - 2.0 * var_ * std::log(bridge_.uniform())));
  }

  // Whether the path reached `level` from above during the step.
  bool dipped(double x, double y, double level) {
    if (!on_) return y <= level;
    return crossed(x - level, y - level);
  }

  // Whether the path reached `level` from below during the step.
  bool rose(double x, double y, double level) {
    if (!on_) return y >= level;
    return crossed(level - x, level - y);
  }

 private:
  // Bridge crossing with both endpoint gaps given; one uniform per call.
  bool crossed(double gap0, double gap1) {
    const double u = bridge_.uniform();
    if (gap0 <= 0.0 || gap1 <= 0.0) return true;
    const double e = 2.0 * gap0 * gap1 / var_;
    return e < 40.0 && u < std::exp(-e);
  }

 public:
 private:
  CounterStream gauss_;
  CounterStream bridge_;
  double sd_;
  double var_;
  bool on_;
};

}  // namespace

Trajectory simulate_path(const TwoPhaseModel& m, const PathConfig& cfg, std::uint64_t stream) {
  const std::uint64_t n = cfg.steps();
  Trajectory tr;
  tr.seed = cfg.seed;
  tr.stream = stream;
  tr.states.reserve(n + 1);
  Noise noise(cfg, m.diffusion, stream);
  double x = m.x0, xmax = m.x0;
  tr.states.push_back({0.0, x, xmax, mode_at(x, xmax, m.gamma)});
  for (std::uint64_t k = 0; k < n; ++k) {
    const double y = x + m.drift(x, xmax) * cfg.dt + noise.increment();
    xmax = std::max(xmax, noise.step_max(x, y));
    x = y;
    tr.states.push_back({static_cast<double>(k + 1) * cfg.dt, x, xmax, mode_at(x, xmax, m.gamma)});
  }
  return tr;
}

std::vector<double> reference_drift_path(double x0, double b, double diffusion,
                                         const PathConfig& cfg, std::uint64_t stream) {
  const std::uint64_t n = cfg.steps();
  Noise noise(cfg, diffusion, stream);
  std::vector<double> y;
  y.reserve(n + 1);
  y.push_back(x0);
  for (std::uint64_t k = 0; k < n; ++k) y.push_back(y.back() + b * cfg.dt + noise.increment());
  return y;
}

CycleStats first_down_crossing(const Trajectory& path, const DownCrossing& gamma) {
  CycleStats c;
  for (const auto& s : path.states) {
    if (s.x <= s.xmax - gamma(s.xmax)) {
      c.sigma = s.t;
      c.L = s.xmax;
      return c;
    }
  }
  c.censored = true;
  if (!path.states.empty()) {
    c.sigma = path.states.back().t;
    c.L = path.states.back().xmax;
  }
  return c;
}

CycleStats cycle_sampler(const TwoPhaseModel& m, const PathConfig& cfg, std::uint64_t stream,
                         bool onset_only) {
  const std::uint64_t cap = cfg.max_steps != 0 ? cfg.max_steps : cfg.steps();
  Noise noise(cfg, m.diffusion, stream);
  CycleStats c;
  double x = m.x0, xmax = m.x0, t = 0.0, k_level = 0.0;
  bool transient_phase = true;
  for (std::uint64_t k = 0; k < cap; ++k) {
    if (transient_phase) {
      const double y = x + m.transient(x) * cfg.dt + noise.increment();
      const double top = std::max(xmax, noise.step_max(x, y));
      const bool crossed =
          noise.dipped(x, y, xmax - m.gamma(xmax)) || y <= top - m.gamma(top);
      xmax = top;
      x = y;
      t += cfg.dt;
      if (crossed) {
        c.sigma = t;
        c.L = xmax;
        if (onset_only) return c;
        k_level = xmax - m.gamma(xmax);
        transient_phase = false;
      }
    } else {
      const double b = x <= k_level ? m.recurrent(x) : m.transient(x);
      const double y = x + b * cfg.dt + noise.increment();
      t += cfg.dt;
      if (noise.rose(x, y, c.L)) {
        c.tau_hat = t - c.sigma;
        return c;
      }
      x = y;
    }
  }
  c.censored = true;
  if (transient_phase) {
    c.sigma = t;
    c.L = xmax;
  } else {
    c.tau_hat = t - c.sigma;
  }
  return c;
}

std::vector<CycleStats> sample_cycles(const TwoPhaseModel& m, const PathConfig& cfg,
                                      std::size_t count, Execution ex, bool onset_only) {
  return map_indices<CycleStats>(
      count, ex, [&](std::size_t i) { return cycle_sampler(m, cfg, i, onset_only); });
}

namespace {

struct ReplicateRun {
  double terminal = 0.0;
  std::vector<double> gains;      // L_i - L_{i-1} per completed cycle
  std::vector<double> durations;  // sigma_i + tau_hat_i
};

// Full path over the horizon with cycle bookkeeping along the way.
ReplicateRun run_replicate(const TwoPhaseModel& m, const PathConfig& cfg, std::uint64_t n,
                           std::uint64_t stream) {
  ReplicateRun r;
  Noise noise(cfg, m.diffusion, stream);
  double x = m.x0, xmax = m.x0;
  double cycle_start = 0.0, L_start = m.x0, L = m.x0;
  bool transient_phase = true;
  for (std::uint64_t k = 0; k < n; ++k) {
    const double t_next = static_cast<double>(k + 1) * cfg.dt;
    const double y = x + m.drift(x, xmax) * cfg.dt + noise.increment();
    const double top = std::max(xmax, noise.step_max(x, y));
    if (transient_phase) {
      const bool crossed =
          noise.dipped(x, y, xmax - m.gamma(xmax)) || y <= top - m.gamma(top);
      if (crossed) {
        transient_phase = false;
        L = top;
      }
    } else if (top > L) {
      r.gains.push_back(L - L_start);
      r.durations.push_back(t_next - cycle_start);
      cycle_start = t_next;
      L_start = L;
      transient_phase = true;
    }
    xmax = top;
    x = y;
  }
  r.terminal = (x - m.x0) / (static_cast<double>(n) * cfg.dt);
  return r;
}

}  // namespace

SpeedEstimate estimate_speed(const TwoPhaseModel& m, const PathConfig& cfg,
                             std::size_t replicates, Execution ex, double z) {
  if (replicates == 0) throw Error(ErrorCode::InvalidArgument, "need at least one replicate");
  const std::uint64_t n = cfg.steps();
  const auto runs = map_indices<ReplicateRun>(
      replicates, ex, [&](std::size_t i) { return run_replicate(m, cfg, n, i); });

  SpeedEstimate out;
  std::vector<double> gains, durations;
  for (const auto& r : runs) {
    out.per_replicate.push_back(r.terminal);
    gains.insert(gains.end(), r.gains.begin(), r.gains.end());
    durations.insert(durations.end(), r.durations.begin(), r.durations.end());
  }
  const auto s = stats::summarize(out.per_replicate);
  out.terminal = s.mean;
  out.terminal_half_width = z * s.std_error;
  out.cycles = gains.size();
  out.censored_fraction =
      static_cast<double>(replicates) / static_cast<double>(gains.size() + replicates);
  if (!gains.empty()) {
    const auto ratio = stats::ratio_estimate(gains, durations);
    out.regenerative = ratio.ratio;
    out.regenerative_half_width = z * ratio.std_error;
  }
  return out;
}

HittingEstimate hitting_monte_carlo(const TwoPhaseModel& m, double z, double c,
                                    const PathConfig& cfg, std::size_t paths, Execution ex) {
  if (!(z > m.z0) || !(c > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "hitting Monte Carlo needs z > z0 and c > 0");
  }
  const std::uint64_t cap = cfg.max_steps != 0 ? cfg.max_steps : cfg.steps();
  const double top = z + c;
  // 1 = reached z0 first, 0 = reached z + c first, -1 = censored.
  const auto outcome = map_indices<int>(paths, ex, [&](std::size_t i) {
    Noise noise(cfg, m.diffusion, i);
    double x = z;
    for (std::uint64_t k = 0; k < cap; ++k) {
      const double b = x <= z ? m.recurrent(x) : m.transient(x);
      const double y = x + b * cfg.dt + noise.increment();
      if (noise.dipped(x, y, m.z0)) return 1;
      if (noise.rose(x, y, top)) return 0;
      x = y;
    }
    return -1;
  });
  HittingEstimate h;
  h.paths = paths;
  std::size_t hits = 0;
  for (int o : outcome) {
    if (o < 0) ++h.censored;
    if (o == 1) ++hits;
  }
  const double done = static_cast<double>(paths - h.censored);
  if (done > 0) {
    h.probability = static_cast<double>(hits) / done;
    h.std_error = std::sqrt(h.probability * (1.0 - h.probability) / done);
  }
  return h;
}

}  // namespace twophase
