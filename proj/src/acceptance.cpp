#include "twophase/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <limits>

#include "twophase/analytic.hpp"
#include "twophase/regeneration.hpp"
#include "twophase/simulate.hpp"
#include "twophase/stats.hpp"

namespace twophase {

namespace {

std::string fmt(const char* f, ...) {
  char buf[2048];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

bool rel_close(double x, double y, double tol) {
  return std::abs(x - y) <= tol * std::max(std::abs(x), std::abs(y));
}

struct Context {
  std::uint64_t seed;
  Execution ex;
  double budget;

  std::size_t size(double full, double floor = 100.0) const {
    return static_cast<std::size_t>(std::max(floor, std::round(full * budget)));
  }
};

TwoPhaseModel constant_model(double b, double c, double gamma, double a = 1.0, double x0 = 0.0) {
  return TwoPhaseModel::make(DriftFunction::constant(b), DriftFunction::constant(c),
                             DownCrossing::constant(gamma), x0, std::nullopt, a);
}

TwoPhaseModel iterated_log_model(double k) {
  // b^T = log^(2) x / 2 + k log^(3) x / 2 with gamma = 1 and b^R = 0. The
  // threshold sits above e^e so that log^(3) is positive.
  return TwoPhaseModel::make(DriftFunction::iterated_log(16.0, {{2, 0.5}, {3, 0.5 * k}}),
                             DriftFunction::constant(0.0), DownCrossing::constant(1.0), 16.0);
}

TwoPhaseModel iterated_gamma_model(double k) {
  return TwoPhaseModel::make(DriftFunction::constant(1.0), DriftFunction::constant(0.0),
                             DownCrossing::iterated_log(16.0, {{2, 0.5}, {3, 0.5 * k}}), 16.0);
}

DriftFunction decaying_drift(double z0) {
  // 1 / (2 (1 + |x - z0|)) on a fine grid; paths stay well inside it.
  std::vector<double> grid, values;
  for (int i = -10000; i <= 10000; ++i) {
    const double x = z0 + i * 1e-3;
    grid.push_back(x);
    values.push_back(0.5 / (1.0 + std::abs(x - z0)));
  }
  return DriftFunction::tabulated(std::move(grid), std::move(values));
}

PathConfig path_config(double dt, double horizon, std::uint64_t seed) {
  PathConfig cfg;
  cfg.dt = dt;
  cfg.horizon = horizon;
  cfg.seed = seed;
  cfg.bridge_correction = true;
  return cfg;
}

// ---------------------------------------------------------------------------

CriterionResult closed_form_identity(const Context&) {
  CriterionResult r{1, "closed-form identity grid", true, "", 0.0};
  const double grid[] = {0.25, 0.5, 1.0, 2.0, 4.0};
  const double diffusions[] = {0.5, 1.0, 2.0};
  double worst = 0.0;
  int count = 0;
  for (double b : grid) {
    for (double c : grid) {
      for (double g : grid) {
        for (double a : diffusions) {
          const auto cf = closed_forms(b, c, g, a);
          const double lhs = cf.damping * b * (cf.expected_sigma + cf.expected_return);
          const double rel = std::abs(lhs - cf.expected_L_increment) / cf.expected_L_increment;
          worst = std::max(worst, rel);
          ++count;
        }
      }
    }
  }
  r.pass = worst <= 1e-12;
  r.detail = fmt("%d grid points, worst relative gap %.3g (tol 1e-12)", count, worst);
  return r;
}

CriterionResult speed_reproduction(const Context& ctx) {
  CriterionResult r{2, "ballistic speed reproduction", false, "", 0.0};
  const auto m = constant_model(1.0, 0.5, 1.0);
  const double target = damping(1.0, 0.5, 1.0, 1.0);
  const auto est = estimate_speed(m, path_config(1e-3, 2000.0, ctx.seed), ctx.size(100, 4), ctx.ex);
  r.pass = std::abs(est.terminal - target) <= 0.02;
  r.detail = fmt("terminal %.5f +- %.5f, regenerative %.5f +- %.5f, closed form %.5f (tol 0.02)",
                 est.terminal, est.terminal_half_width, est.regenerative,
                 est.regenerative_half_width, target);
  return r;
}

CriterionResult onset_law(const Context& ctx) {
  CriterionResult r{3, "onset law", false, "", 0.0};
  const auto m = constant_model(1.0, 0.0, 1.0);
  const double d = closed_forms(1.0, 1.0, 1.0).d_b_gamma;

  const ModelAnalytics an(m);
  const auto chain = simulate_chain(an, ctx.size(1e5), ctx.seed);
  std::vector<double> draws(chain.steps());
  for (std::size_t i = 0; i < draws.size(); ++i) draws[i] = chain.points[i + 1] - chain.points[i];
  const double ks = stats::ks_statistic(draws, [d](double y) { return -std::expm1(-y / d); });
  const double p = stats::ks_pvalue(ks, draws.size());
  const bool pass_a = p > 0.01;

  const auto cycles = sample_cycles(m, path_config(1e-3, 500.0, ctx.seed), ctx.size(1e4), ctx.ex,
                                    /*onset_only=*/true);
  std::vector<double> L;
  std::size_t censored = 0;
  for (const auto& c : cycles) {
    if (c.censored) {
      ++censored;
      continue;
    }
    L.push_back(c.L - m.x0);
  }
  const auto s = stats::summarize(L);
  const bool pass_b = censored == 0 && std::abs(s.mean - d) <= 0.05 * d;

  r.pass = pass_a && pass_b;
  r.detail = fmt("(a) %zu draws KS D=%.4g p=%.3g %s; (b) %zu paths mean L-x0 %.5f vs %.5f "
                 "(%.2f%%, tol 5%%, censored %zu) %s",
                 draws.size(), ks, p, pass_a ? "ok" : "FAIL", L.size(), s.mean, d,
                 100.0 * (s.mean - d) / d, censored, pass_b ? "ok" : "FAIL");
  return r;
}

CriterionResult cycle_expectations(const Context& ctx) {
  CriterionResult r{4, "cycle expectations", false, "", 0.0};
  const auto m = constant_model(1.0, 0.5, 1.0);
  const auto cf = closed_forms(1.0, 0.5, 1.0);
  const auto cycles = sample_cycles(m, path_config(1e-3, 500.0, ctx.seed), ctx.size(1e4), ctx.ex);
  std::vector<double> sigma, tau;
  std::size_t censored = 0;
  for (const auto& c : cycles) {
    if (c.censored) {
      ++censored;
      continue;
    }
    sigma.push_back(c.sigma);
    tau.push_back(c.tau_hat);
  }
  const double ms = stats::summarize(sigma).mean;
  const double mt = stats::summarize(tau).mean;
  const double es = (ms - cf.expected_sigma) / cf.expected_sigma;
  const double et = (mt - cf.expected_return) / cf.expected_return;
  r.pass = censored == 0 && std::abs(es) <= 0.03 && std::abs(et) <= 0.03;
  r.detail = fmt("%zu cycles: sigma %.5f vs %.5f (%+.2f%%), tau_hat %.5f vs %.5f (%+.2f%%), "
                 "censored %zu, tol 3%%",
                 sigma.size(), ms, cf.expected_sigma, 100 * es, mt, cf.expected_return, 100 * et,
                 censored);
  return r;
}

CriterionResult hitting(const Context& ctx) {
  CriterionResult r{5, "hitting probability", false, "", 0.0};
  const auto flat = TwoPhaseModel::make(DriftFunction::constant(0.0), DriftFunction::constant(0.0),
                                        DownCrossing::constant(1.0), 10.0, 0.0);
  const ModelAnalytics flat_an(flat);
  double worst = 0.0;
  for (double z : {0.5, 1.0, 3.0, 7.5}) {
    for (double c : {0.1, 1.0, 4.0}) {
      worst = std::max(worst, std::abs(flat_an.hitting_prob(z, c) - c / (z + c)));
    }
  }
  const bool pass_a = worst <= 1e-9;

  const double z0 = 0.0, z = 5.0, c = 1.0;
  const auto m = TwoPhaseModel::make(DriftFunction::constant(1.0), decaying_drift(z0),
                                     DownCrossing::constant(1.0), z + 1.0, z0);
  const double q = ModelAnalytics(m).hitting_prob(z, c);
  const auto mc = hitting_monte_carlo(m, z, c, path_config(1e-4, 1e3, ctx.seed), ctx.size(1e5),
                                      ctx.ex);
  const double gap = std::abs(q - mc.probability);
  const bool pass_b = mc.censored == 0 && gap <= 2.0 * mc.std_error;

  r.pass = pass_a && pass_b;
  r.detail = fmt("(a) driftless worst error %.3g (tol 1e-9) %s; (b) quadrature %.6f, Monte Carlo "
                 "%.6f +- %.6f over %zu paths (%.2f SE, censored %zu) %s",
                 worst, pass_a ? "ok" : "FAIL", q, mc.probability, mc.std_error, mc.paths,
                 mc.std_error > 0 ? gap / mc.std_error : 0.0, mc.censored,
                 pass_b ? "ok" : "FAIL");
  return r;
}

CriterionResult classifier_table(const Context&) {
  CriterionResult r{6, "classifier truth table", true, "", 0.0};
  struct Row {
    const char* name;
    TwoPhaseModel model;
    Classification result;
    VerdictSource source;
  };
  const DownCrossing g1 = DownCrossing::constant(1.0);
  const auto p2 = DriftFunction::iterated_log(16.0, {{1, 0.5}, {2, 2.0}});
  std::vector<Row> rows{
      {"T1.1", constant_model(1.0, 0.0, 1.0), Classification::Recurrent, VerdictSource::Theorem1_1},
      {"T1.3 k=1", iterated_log_model(1.0), Classification::Recurrent, VerdictSource::Theorem1_3i},
      {"T1.3 k=2", iterated_log_model(2.0), Classification::Transient, VerdictSource::Theorem1_3ii},
      {"T1.4 k=1", iterated_gamma_model(1.0), Classification::Recurrent,
       VerdictSource::Theorem1_4i},
      {"T1.4 k=2", iterated_gamma_model(2.0), Classification::Transient,
       VerdictSource::Theorem1_4ii},
      {"P2ii b^R=0", TwoPhaseModel::make(p2, DriftFunction::constant(0.0), g1, 16.0),
       Classification::Transient, VerdictSource::TheoremP2ii},
      {"P2ii b^R tabulated", TwoPhaseModel::make(p2, decaying_drift(0.0), g1, 16.0),
       Classification::Transient, VerdictSource::TheoremP2ii},
      {"no match",
       TwoPhaseModel::make(DriftFunction::constant(1.0), DriftFunction::constant(0.0),
                           DownCrossing::tabulated({0.0, 100.0}, {1.0, 2.0}), 0.0),
       Classification::Unknown, VerdictSource::Diagnostic},
  };
  std::string failures;
  for (const auto& row : rows) {
    const auto v = classify(row.model);
    if (v.result != row.result || v.source != row.source) {
      r.pass = false;
      failures += fmt(" %s gave %s/%s;", row.name, to_string(v.result).c_str(),
                      to_string(v.source).c_str());
    }
  }
  r.detail = fmt("%zu rows%s", rows.size(), failures.empty() ? ", all matched" : failures.c_str());
  return r;
}

CriterionResult chain_growth(const Context& ctx) {
  CriterionResult r{7, "chain growth diagnostics", false, "", 0.0};
  const std::size_t n = ctx.size(1e6, 1e4);

  const ModelAnalytics rec(constant_model(1.0, 0.0, 1.0));
  const auto rep_a = divergence_diagnostic(rec, simulate_chain(rec, n, ctx.seed));
  const bool pass_a = rep_a.log_fit.r_squared > 0.99;

  const ModelAnalytics tr(iterated_log_model(2.0));
  const auto rep_b = divergence_diagnostic(tr, simulate_chain(tr, n, ctx.seed));
  const bool pass_b =
      rep_b.projected_tail < 1e-3 && rep_b.suggestion == Suggestion::SuggestsTransient;

  r.pass = pass_a && pass_b;
  r.detail = fmt("(a) constant model, %zu steps: R^2 %.6f slope %.4f, %s %s; (b) k=2 family, "
                 "%zu steps: projected tail %.3g (tol 1e-3), term decay %.3f, window sum %.4g, "
                 "%s %s",
                 n, rep_a.log_fit.r_squared, rep_a.log_fit.slope,
                 to_string(rep_a.suggestion).c_str(), pass_a ? "ok" : "FAIL", n,
                 rep_b.projected_tail, rep_b.term_decay, rep_b.window_sum,
                 to_string(rep_b.suggestion).c_str(), pass_b ? "ok" : "FAIL");
  return r;
}

CriterionResult generator(const Context& ctx) {
  CriterionResult r{8, "adversarial recurrent drift", false, "", 0.0};
  const double b = 1.0, gamma = 1.0, x0 = 1.0;
  const auto gen = theorem2_generator(b, gamma, x0);
  const auto& s = *gen.scale;

  double min_margin = std::numeric_limits<double>::infinity();
  double max_off = 0.0;
  const std::size_t points = 1000000;
  for (std::size_t i = 0; i <= points; ++i) {
    const double x = 2.0 + 998.0 * static_cast<double>(i) / points;
    min_margin = std::min(min_margin, s.u(x) - x * x);
    if (!s.in_spike(x)) max_off = std::max(max_off, s.u_prime(x));
  }
  const bool pass_u = min_margin >= 0.0;
  const bool pass_bound = max_off <= s.bound() * (1.0 + 1e-12);

  const auto m = TwoPhaseModel::make(DriftFunction::constant(b), gen.drift,
                                     DownCrossing::constant(gamma), x0);
  const ModelAnalytics an(m);
  const auto rep = divergence_diagnostic(an, simulate_chain(an, ctx.size(1e5, 1e4), ctx.seed));
  const bool pass_chain = rep.suggestion == Suggestion::SuggestsTransient;

  r.pass = pass_u && pass_bound && pass_chain;
  r.detail = fmt("min u-x^2 on [2,1000] %.4g %s; max u' off spikes %.6g vs bound %.6g %s; chain "
                 "projected tail %.3g, %s %s",
                 min_margin, pass_u ? "ok" : "FAIL", max_off, s.bound(),
                 pass_bound ? "ok" : "FAIL", rep.projected_tail,
                 to_string(rep.suggestion).c_str(), pass_chain ? "ok" : "FAIL");
  return r;
}

CriterionResult exit_time(const Context&) {
  CriterionResult r{9, "exit-time solver", false, "", 0.0};
  const double limit = exit_time_limit(1.0, 1.0, 0.5, 1.0);
  double gaps[3];
  const double ns[3] = {5.0, 10.0, 20.0};
  for (int i = 0; i < 3; ++i) gaps[i] = std::abs(exit_time_vN(1.0, 1.0, 0.5, 1.0, ns[i], 0.0) - limit);
  const bool monotone = gaps[0] > gaps[1] && gaps[1] > gaps[2];
  r.pass = gaps[2] <= 1e-8 && monotone;
  r.detail = fmt("limit %.12f; gaps N=5 %.3g, N=10 %.3g, N=20 %.3g (tol 1e-8), %s", limit, gaps[0],
                 gaps[1], gaps[2], monotone ? "monotone" : "NOT monotone");
  return r;
}

CriterionResult reflecting(const Context&) {
  CriterionResult r{10, "reflecting limit", false, "", 0.0};
  const double x = 2.0;
  const double formula = std::expm1(x) / (std::exp(x) + std::exp(-x) - 2.0);
  const double sentinel = damping(1.0, kReflecting, 1.0, 1.0);
  const double large = damping(1.0, 1e6, 1.0, 1.0);
  const double b = 1e-3;
  const double small = damping(b, kReflecting, 1.0, 1.0) * b;
  const double expansion = 0.5 + b / 2.0;
  const bool p1 = rel_close(sentinel, formula, 1e-12);
  const bool p2 = rel_close(large, sentinel, 1e-4);
  const bool p3 = std::abs(small - expansion) <= 1e-4;
  r.pass = p1 && p2 && p3;
  r.detail = fmt("sentinel %.12f vs formula %.12f %s; c=1e6 %.12f %s; small-x d*b %.9f vs %.9f %s",
                 sentinel, formula, p1 ? "ok" : "FAIL", large, p2 ? "ok" : "FAIL", small,
                 expansion, p3 ? "ok" : "FAIL");
  return r;
}

// Reduced-size versions of every Monte Carlo kernel, flattened to numbers.
std::vector<double> monte_carlo_digest(std::uint64_t seed, Execution ex) {
  std::vector<double> out;
  const auto ballistic = constant_model(1.0, 0.5, 1.0);

  const auto speed = estimate_speed(ballistic, path_config(1e-3, 50.0, seed), 8, ex);
  out.insert(out.end(), speed.per_replicate.begin(), speed.per_replicate.end());
  out.push_back(speed.regenerative);

  for (bool onset_only : {true, false}) {
    for (const auto& c : sample_cycles(ballistic, path_config(1e-3, 500.0, seed), 200, ex,
                                       onset_only)) {
      out.insert(out.end(), {c.sigma, c.tau_hat, c.L, c.censored ? 1.0 : 0.0});
    }
  }

  const auto hm = TwoPhaseModel::make(DriftFunction::constant(1.0), decaying_drift(0.0),
                                      DownCrossing::constant(1.0), 6.0, 0.0);
  const auto hit = hitting_monte_carlo(hm, 5.0, 1.0, path_config(1e-3, 1e3, seed), 400, ex);
  out.insert(out.end(), {hit.probability, hit.std_error});

  const ModelAnalytics flat(constant_model(1.0, 0.0, 1.0));
  const ModelAnalytics family(iterated_log_model(2.0));
  for (const auto* an : {&flat, &family}) {
    for (const auto& ch : simulate_chains(*an, 300, 4, seed, ex)) {
      out.insert(out.end(), ch.points.begin(), ch.points.end());
    }
  }
  return out;
}

bool bitwise_equal(const std::vector<double>& x, const std::vector<double>& y) {
  return x.size() == y.size() &&
         (x.empty() || std::memcmp(x.data(), y.data(), x.size() * sizeof(double)) == 0);
}

CriterionResult determinism(const Context& ctx) {
  CriterionResult r{11, "determinism", false, "", 0.0};
  const auto first = monte_carlo_digest(ctx.seed, Execution::serial());
  const auto again = monte_carlo_digest(ctx.seed, Execution::serial());
  const auto parallel = monte_carlo_digest(ctx.seed, Execution{4});
  const bool rerun = bitwise_equal(first, again);
  const bool par = bitwise_equal(first, parallel);
  r.pass = rerun && par;
  r.detail = fmt("%zu numbers; serial rerun %s; 4 workers vs serial %s", first.size(),
                 rerun ? "identical" : "DIFFERENT", par ? "identical" : "DIFFERENT");
  return r;
}

}  // namespace

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt) {
  using Runner = CriterionResult (*)(const Context&);
  static constexpr Runner runners[kCriterionCount] = {
      closed_form_identity, speed_reproduction, onset_law, cycle_expectations,
      hitting, classifier_table, chain_growth, generator,
      exit_time, reflecting, determinism};
  const Context ctx{opt.seed, opt.execution, opt.budget};
  std::vector<CriterionResult> results;
  for (int id = 1; id <= kCriterionCount; ++id) {
    if (!opt.only.empty() && std::find(opt.only.begin(), opt.only.end(), id) == opt.only.end()) {
      continue;
    }
    const auto start = std::chrono::steady_clock::now();
    CriterionResult res;
    try {
      res = runners[id - 1](ctx);
    } catch (const std::exception& e) {
      res = {id, "criterion " + std::to_string(id), false, std::string("error: ") + e.what(), 0.0};
    }
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (opt.on_result) opt.on_result(res);
    results.push_back(std::move(res));
  }
  return results;
}

std::string format_result(const CriterionResult& r) {
  return fmt("%s %2d  %-30s %s  (%.1f s)", r.pass ? "PASS" : "FAIL", r.id, r.label.c_str(),
             r.detail.c_str(), r.seconds);
}

}  // namespace twophase
