#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "twophase/analytic.hpp"
#include "twophase/parallel.hpp"
#include "twophase/rng.hpp"
#include "twophase/scale.hpp"
#include "twophase/stats.hpp"

namespace twophase {

// ---------------------------------------------------------------------------
// Onset sampling

struct OnsetOptions {
  double tolerance = 1e-10;        // absolute, on the increment Y
  double bracket_ceiling = 1e12;   // largest Y tried before giving up
  quad::Tolerance quadrature{};
};

/// Increment Y > 0 with int_x^{x+Y} lambda = e (inverse cumulative hazard).
double onset_quantile(const ModelAnalytics& an, double x, double e, const OnsetOptions& opt = {});

/// Draws the next onset location L > x.
double sample_onset(const ModelAnalytics& an, double x, CounterStream& rng,
                    const OnsetOptions& opt = {});

// ---------------------------------------------------------------------------
// Chains

struct ChainTrajectory {
  double x0 = 0.0;
  std::vector<double> points;  // L_0 = x0, L_1, ..., L_n
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  std::size_t steps() const noexcept { return points.empty() ? 0 : points.size() - 1; }
};

/// L_0 = x0 and L_{k+1} = sample_onset(L_k), drawing from (seed, stream).
ChainTrajectory simulate_chain(const ModelAnalytics& an, std::size_t n, std::uint64_t seed,
                               std::uint64_t stream = 0, const OnsetOptions& opt = {});

/// Independent chains on streams 0..count-1.
std::vector<ChainTrajectory> simulate_chains(const ModelAnalytics& an, std::size_t n,
                                             std::size_t count, std::uint64_t seed,
                                             Execution ex = {}, const OnsetOptions& opt = {});

// ---------------------------------------------------------------------------
// Classification

enum class Classification { Recurrent, Transient, Unknown };
enum class VerdictSource {
  Theorem1_1,
  Theorem1_3i,
  Theorem1_3ii,
  Theorem1_4i,
  Theorem1_4ii,
  TheoremP2ii,
  Diagnostic,
};
enum class Suggestion { SuggestsRecurrent, SuggestsTransient, Inconclusive };

std::string to_string(Classification c);
std::string to_string(VerdictSource s);
std::string to_string(Suggestion s);

struct Verdict {
  Classification result = Classification::Unknown;
  VerdictSource source = VerdictSource::Diagnostic;
  std::string detail;
  /// Only for Diagnostic verdicts, and only when a chain was examined.
  std::optional<Suggestion> suggestion;
};

/// Matches the model against the theorem hypotheses. Conservative: anything
/// that does not provably fit a rule is Unknown.
Verdict classify(const TwoPhaseModel& m);

// ---------------------------------------------------------------------------
// Divergence diagnostic

struct DiagnosticOptions {
  double fit_from = 1e3;          // fits use N >= min(fit_from, steps / 10)
  double recurrent_r2 = 0.99;
  double recurrent_min_slope = 1e-3;
  double recurrent_min_decay = -0.05;  // term-decay exponent must stay above this
  double transient_tail = 1e-3;
  std::size_t checkpoints_per_decade = 10;
};

struct DivergenceReport {
  std::vector<double> h;                // H(L_n), n = 0..steps
  std::vector<std::size_t> checkpoints; // log-spaced N
  std::vector<double> partial_sums;     // S_N at the checkpoints
  double total = 0.0;                   // S over the whole chain
  stats::LinearFit log_fit;            // S_N against log N
  double term_decay = 0.0;              // slope of log(n H) against log n
  double projected_tail = 0.0;          // extrapolated sum beyond the chain
  double window_sum = 0.0;              // S_N - S_{N/2} at the chain end
  double growth_exponent = 0.0;         // slope of log(L_n - x0) against log n
  Suggestion suggestion = Suggestion::Inconclusive;
  bool heuristic = true;
};

/// Partial sums of H along the chain with the fitted growth diagnostics.
DivergenceReport divergence_diagnostic(const ModelAnalytics& an, const ChainTrajectory& chain,
                                       const DiagnosticOptions& opt = {});

// ---------------------------------------------------------------------------
// Adversarial recurrent drift with a transient two-phase diffusion

/// Scale curve u = B (x - anchor) + sum_j A_j S((x - p_j) / w_j) with spikes
/// on I_j = [p_j, p_j + w_j], p_j = x0 - gamma + j, w_j = 1/j^2, j >= 2.
/// S is the quintic smoothstep, so u' is C^1 and the drift is continuous.
class SpikeScale final : public ClosedFormScale {
 public:
  SpikeScale(double gamma, double x0, double diffusion);

  double u(double x) const override;
  double log_u_prime(double x) const override;
  double u_prime(double x) const;
  double drift(double x) const override;
  std::optional<bool> unbounded_above() const override { return true; }
  std::optional<bool> unbounded_below() const override { return true; }

  double bound() const noexcept { return slope_; }
  double anchor() const noexcept { return anchor_; }
  double origin() const noexcept { return origin_; }
  /// I_j. Only j >= 2 carries a spike.
  Interval spike(long j) const noexcept;
  /// Whether x lies in some I_j.
  bool in_spike(double x) const noexcept;

 private:
  // Index j of the unit cell containing x, and the local coordinate in I_j.
  long cell(double x) const noexcept;
  double amplitude(long j) const noexcept;
  double cumulative(long j) const noexcept;  // sum of A_i for 2 <= i <= j

  double origin_;  // x0 - gamma
  double anchor_;
  double slope_;
  double a_;
};

struct Theorem2Construction {
  std::shared_ptr<const SpikeScale> scale;
  DriftFunction drift;  // FromScale
};

/// Builds the recurrent drift of the transient example for b^T = b.
Theorem2Construction theorem2_generator(double b, double gamma, double x0, double diffusion = 1.0);

}  // namespace twophase
