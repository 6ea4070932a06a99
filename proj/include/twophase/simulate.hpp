#pragma once

#include <cstdint>
#include <vector>

#include "twophase/model.hpp"
#include "twophase/parallel.hpp"

namespace twophase {

struct PathConfig {
  double dt = 1e-3;
  double horizon = 1.0;
  std::uint64_t seed = 0;
  std::uint64_t max_steps = 0;  // 0 means ceil(horizon / dt)
  bool bridge_correction = false;

  /// Number of Euler steps covering the horizon. Throws InvalidArgument for
  /// a bad dt/horizon and StepCapExceeded when they need more than max_steps.
  std::uint64_t steps() const;
};

struct PathState {
  double t = 0.0;
  double x = 0.0;
  double xmax = 0.0;
  Mode mode = Mode::TransientPhase;
};

struct Trajectory {
  std::vector<PathState> states;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

struct CycleStats {
  double sigma = 0.0;
  double tau_hat = 0.0;
  double L = 0.0;
  bool censored = false;
};

/// Euler-Maruyama path of the two-phase SDE. The Gaussian for step k of
/// stream s is draw k of (seed, s), so any schedule reproduces it.
Trajectory simulate_path(const TwoPhaseModel& m, const PathConfig& cfg, std::uint64_t stream = 0);

/// First grid point with x <= xmax - gamma(xmax). Fills sigma and L only.
CycleStats first_down_crossing(const Trajectory& path, const DownCrossing& gamma);

/// One regeneration cycle from x0: the transient phase up to the first
/// gamma-down-crossing, then the composite phase until the path returns to
/// its maximum L. Censored when the step cap is reached first. With
/// `onset_only` the cycle stops at the down-crossing.
CycleStats cycle_sampler(const TwoPhaseModel& m, const PathConfig& cfg, std::uint64_t stream,
                         bool onset_only = false);

/// Cycles on streams 0..count-1.
std::vector<CycleStats> sample_cycles(const TwoPhaseModel& m, const PathConfig& cfg,
                                      std::size_t count, Execution ex = {},
                                      bool onset_only = false);

struct SpeedEstimate {
  double terminal = 0.0;             // mean of (X(T) - x0) / T
  double terminal_half_width = 0.0;  // normal approximation at `z`
  double regenerative = 0.0;         // mean(delta L) / mean(sigma + tau_hat)
  double regenerative_half_width = 0.0;
  std::size_t cycles = 0;            // completed cycles
  double censored_fraction = 0.0;    // open cycles at the horizon / all cycles
  std::vector<double> per_replicate;
};

/// Speed from `replicates` paths over the horizon, reporting both estimators.
SpeedEstimate estimate_speed(const TwoPhaseModel& m, const PathConfig& cfg,
                             std::size_t replicates, Execution ex = {}, double z = 1.96);

struct HittingEstimate {
  double probability = 0.0;
  double std_error = 0.0;
  std::size_t paths = 0;
  std::size_t censored = 0;  // neither boundary reached within the step cap
};

/// Monte Carlo of P_z(hit z0 before z + c) for the composite diffusion with
/// drift b^R at or below z and b^T above it.
HittingEstimate hitting_monte_carlo(const TwoPhaseModel& m, double z, double c,
                                    const PathConfig& cfg, std::size_t paths, Execution ex = {});

/// Pure-drift comparison path driven by the same Gaussian stream as
/// simulate_path: y_{k+1} = y_k + b dt + sqrt(a dt) g_k.
std::vector<double> reference_drift_path(double x0, double b, double diffusion,
                                         const PathConfig& cfg, std::uint64_t stream = 0);

}  // namespace twophase
