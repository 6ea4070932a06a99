// twophase: command-line front end.
//
// Every command reads an optional config (key = value or JSON), applies the
// command-line overrides on top, and writes its outputs to --out with the
// effective config, its hash and the seed embedded.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "twophase/acceptance.hpp"
#include "twophase/analytic.hpp"
#include "twophase/config.hpp"
#include "twophase/io.hpp"
#include "twophase/regeneration.hpp"
#include "twophase/simulate.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace twophase;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

// Thrown for a model or check that does not pass; maps to exit code 1.
struct ValidationFailure {
  json report;
};

json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<double> dt, horizon;
  std::optional<std::uint64_t> replicates, chain_length;
  std::optional<int> parallel;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config, "Config file (key = value or JSON)");
    cmd->add_option("--seed", seed, "Seed; overrides TWOPHASE_SEED and the config");
    cmd->add_option("--out", out, "Output directory");
    cmd->add_option("--dt", dt, "Euler time step");
    cmd->add_option("--horizon", horizon, "Simulated time horizon");
    cmd->add_option("--replicates", replicates, "Independent replicates");
    cmd->add_option("--chain-length", chain_length, "Regeneration chain steps");
    cmd->add_option("--parallel", parallel, "OpenMP workers (1 = serial)");
  }
};

struct Session {
  ConfigDoc doc;
  RunParams run;
  std::uint64_t seed = 1;
  fs::path out;
  Execution ex;

  json provenance() const {
    return {{"config_hash", doc.hash_hex()},
            {"seed", seed},
            {"config", json::parse(doc.to_json())}};
  }

  fs::path file(const std::string& name) const { return out / name; }

  void write_json(const std::string& name, json body) const {
    body["provenance"] = provenance();
    std::ofstream os(file(name));
    os << body.dump(2) << "\n";
    if (!os) throw Error(ErrorCode::InvalidArgument, "cannot write " + file(name).string());
  }

  std::ofstream open_csv(const std::string& name) const {
    std::ofstream os(file(name), std::ios::binary);
    if (!os) throw Error(ErrorCode::InvalidArgument, "cannot write " + file(name).string());
    write_provenance(os, doc, seed);
    return os;
  }
};

Session open_session(const Common& c) {
  Session s;
  if (!c.config.empty()) s.doc = ConfigDoc::load(c.config);
  if (c.dt) s.doc.set("run.dt", *c.dt);
  if (c.horizon) s.doc.set("run.horizon", *c.horizon);
  if (c.replicates) s.doc.set("run.replicates", std::to_string(*c.replicates));
  if (c.chain_length) s.doc.set("run.chain_length", std::to_string(*c.chain_length));
  s.seed = resolve_seed(c.seed, s.doc);
  // The seed in force is part of the embedded config, so outputs are
  // reproducible from the file alone.
  s.doc.set("run.seed", std::to_string(s.seed));
  s.run = run_from_config(s.doc);
  s.ex.workers = c.parallel.value_or(s.run.parallel);
  // Where the files go is not part of the run, so --out stays out of the hash.
  s.out = c.out.empty() ? fs::path(s.run.out) : fs::path(c.out);
  fs::create_directories(s.out);
  return s;
}

PathConfig path_config(const Session& s) {
  PathConfig cfg;
  cfg.dt = s.run.dt;
  cfg.horizon = s.run.horizon;
  cfg.seed = s.seed;
  cfg.bridge_correction = s.run.bridge;
  return cfg;
}

json report_json(const ValidationReport& r) {
  auto cond = [](const ConditionVerdict& c) {
    json j{{"verdict", to_string(c.verdict)},
           {"upper_tail", to_string(c.tails.upper)},
           {"lower_tail", to_string(c.tails.lower)},
           {"detail", c.detail}};
    if (c.tails.upper_estimate) j["upper_estimate"] = num(*c.tails.upper_estimate);
    if (c.tails.lower_estimate) j["lower_estimate"] = num(*c.tails.lower_estimate);
    return j;
  };
  json issues = json::array();
  for (const auto& i : r.issues) {
    issues.push_back({{"code", std::string(to_string(i.code))}, {"message", i.message}});
  }
  return {{"ok", r.ok()},
          {"conditions_hold", r.conditions_hold()},
          {"transient_condition", cond(r.transient_condition)},
          {"recurrent_condition", cond(r.recurrent_condition)},
          {"gamma_checks_heuristic", r.gamma_checks_heuristic},
          {"issues", issues}};
}

TwoPhaseModel checked_model(const Session& s) {
  auto m = model_from_config(s.doc);
  const auto report = validate_model(m);
  if (!report.ok()) throw ValidationFailure{report_json(report)};
  return m;
}

// ---------------------------------------------------------------------------

int cmd_validate(const Session& s) {
  const auto m = model_from_config(s.doc);
  const auto report = validate_model(m);
  const json j = report_json(report);
  std::cout << "transient condition: " << to_string(report.transient_condition.verdict) << " ("
            << report.transient_condition.detail << ")\n"
            << "recurrent condition: " << to_string(report.recurrent_condition.verdict) << " ("
            << report.recurrent_condition.detail << ")\n";
  for (const auto& i : report.issues) {
    std::cout << "issue " << to_string(i.code) << ": " << i.message << "\n";
  }
  if (report.gamma_checks_heuristic) std::cout << "gamma checks are heuristic (finite data)\n";
  const bool valid = report.ok() && report.conditions_hold();
  std::cout << (valid ? "model is valid" : "model is NOT valid") << "\n";
  s.write_json("validate.json", j);
  return valid ? 0 : kExitValidation;
}

int cmd_classify(const Session& s) {
  const auto v = classify(checked_model(s));
  json j{{"result", to_string(v.result)}, {"source", to_string(v.source)}, {"detail", v.detail}};
  std::cout << j.dump() << "\n";
  s.write_json("classify.json", j);
  return 0;
}

std::optional<double> closed_form_speed(const TwoPhaseModel& m) {
  if (!m.transient.is_constant() || !m.recurrent.is_constant() || !m.gamma.is_constant()) {
    return std::nullopt;
  }
  const double b = m.transient.constant_value(), c = m.recurrent.constant_value();
  if (!(b > 0.0 && c > 0.0)) return std::nullopt;
  return damping(b, c, m.gamma.constant_value(), m.diffusion) * b;
}

int cmd_speed(const Session& s) {
  const auto m = checked_model(s);
  const auto est = estimate_speed(m, path_config(s), s.run.replicates, s.ex);
  const auto exact = closed_form_speed(m);
  {
    auto os = s.open_csv("speed.csv");
    CsvWriter w(os);
    w.header({"estimator", "estimate", "half_width", "closed_form", "cycles", "censored_fraction"});
    const CsvWriter::Cell cf = exact ? CsvWriter::Cell(*exact) : CsvWriter::Cell(std::string());
    w.row({std::string("terminal"), est.terminal, est.terminal_half_width, cf,
           static_cast<std::int64_t>(est.cycles), est.censored_fraction});
    w.row({std::string("regenerative"), est.regenerative, est.regenerative_half_width, cf,
           static_cast<std::int64_t>(est.cycles), est.censored_fraction});
  }
  {
    auto os = s.open_csv("speed_replicates.csv");
    CsvWriter w(os);
    w.header({"replicate", "speed"});
    for (std::size_t i = 0; i < est.per_replicate.size(); ++i) {
      w.row({static_cast<std::int64_t>(i), est.per_replicate[i]});
    }
  }
  std::printf("terminal     %.6f +- %.6f\nregenerative %.6f +- %.6f\n", est.terminal,
              est.terminal_half_width, est.regenerative, est.regenerative_half_width);
  if (exact) std::printf("closed form  %.6f\n", *exact);
  return 0;
}

int cmd_chain(const Session& s) {
  const auto m = checked_model(s);
  const ModelAnalytics an(m);
  const auto chain = simulate_chain(an, s.run.chain_length, s.seed);
  const auto rep = divergence_diagnostic(an, chain);
  {
    auto os = s.open_csv("chain.csv");
    CsvWriter w(os);
    w.header({"n", "L_n", "K_n", "H", "S_n"});
    double sum = 0.0;
    for (std::size_t n = 0; n < chain.points.size(); ++n) {
      const double L = chain.points[n];
      sum += rep.h[n];
      w.row({static_cast<std::int64_t>(n), L, L - m.gamma(L), rep.h[n], sum});
    }
  }
  json checkpoints = json::array();
  for (std::size_t i = 0; i < rep.checkpoints.size(); ++i) {
    checkpoints.push_back({{"N", rep.checkpoints[i]}, {"S_N", rep.partial_sums[i]}});
  }
  json j{{"steps", chain.steps()},
         {"total", num(rep.total)},
         {"log_fit",
          {{"slope", num(rep.log_fit.slope)},
           {"intercept", num(rep.log_fit.intercept)},
           {"r_squared", num(rep.log_fit.r_squared)}}},
         {"term_decay", num(rep.term_decay)},
         {"projected_tail", num(rep.projected_tail)},
         {"window_sum", num(rep.window_sum)},
         {"growth_exponent", num(rep.growth_exponent)},
         {"suggestion", to_string(rep.suggestion)},
         {"heuristic", rep.heuristic},
         {"checkpoints", checkpoints}};
  s.write_json("chain_report.json", j);
  std::printf("%zu steps, S_N = %.6g, R^2 %.5f, projected tail %.3g: %s (heuristic)\n",
              chain.steps(), rep.total, rep.log_fit.r_squared, rep.projected_tail,
              to_string(rep.suggestion).c_str());
  return 0;
}

int cmd_onset_dist(const Session& s) {
  const auto m = checked_model(s);
  const ModelAnalytics an(m);
  const std::size_t n = s.run.paths;
  const auto chains = simulate_chains(an, 1, n, s.seed, s.ex);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = chains[i].points[1] - m.x0;

  std::vector<double> probes = s.run.probes;
  if (probes.empty()) {
    std::vector<double> sorted = y;
    std::sort(sorted.begin(), sorted.end());
    for (double q : {0.1, 0.25, 0.5, 0.75, 0.9}) {
      probes.push_back(sorted[static_cast<std::size_t>(q * static_cast<double>(n - 1))]);
    }
  }
  auto os = s.open_csv("onset_dist.csv");
  CsvWriter w(os);
  w.header({"y", "empirical_tail", "analytic_tail", "std_error", "z_score"});
  std::printf("%12s %12s %12s %8s\n", "y", "empirical", "analytic", "z");
  for (double p : probes) {
    const double emp =
        static_cast<double>(std::count_if(y.begin(), y.end(), [p](double v) { return v > p; })) /
        static_cast<double>(n);
    const double exact = an.onset_tail(m.x0, p);
    const double se = std::sqrt(exact * (1.0 - exact) / static_cast<double>(n));
    const double z = se > 0 ? (emp - exact) / se : 0.0;
    w.row({p, emp, exact, se, z});
    std::printf("%12.6g %12.6f %12.6f %8.3f\n", p, emp, exact, z);
  }
  return 0;
}

int cmd_hitting(const Session& s) {
  const auto m = checked_model(s);
  const double z = s.run.hit_z, c = s.run.hit_c;
  const double q = ModelAnalytics(m).hitting_prob(z, c);
  const auto mc = hitting_monte_carlo(m, z, c, path_config(s), s.run.paths, s.ex);
  auto os = s.open_csv("hitting.csv");
  CsvWriter w(os);
  w.header({"z", "c", "z0", "quadrature", "monte_carlo", "std_error", "z_score", "paths",
            "censored"});
  const double zs = mc.std_error > 0 ? (mc.probability - q) / mc.std_error : 0.0;
  w.row({z, c, m.z0, q, mc.probability, mc.std_error, zs, static_cast<std::int64_t>(mc.paths),
         static_cast<std::int64_t>(mc.censored)});
  std::printf("quadrature %.8f, Monte Carlo %.6f +- %.6f (%.2f SE, %zu censored)\n", q,
              mc.probability, mc.std_error, zs, mc.censored);
  return 0;
}

int cmd_closed_forms(const Session& s) {
  const auto& r = s.run;
  const auto cf = closed_forms(r.closed_b, r.closed_c, r.closed_gamma, r.closed_a);
  json j{{"b", num(r.closed_b)},
         {"c", num(r.closed_c)},
         {"gamma", num(r.closed_gamma)},
         {"a", num(r.closed_a)},
         {"c_b_gamma", num(cf.c_b_gamma)},
         {"d_b_gamma", num(cf.d_b_gamma)},
         {"damping", num(cf.damping)},
         {"expected_sigma", num(cf.expected_sigma)},
         {"expected_return", num(cf.expected_return)},
         {"expected_L_increment", num(cf.expected_L_increment)},
         {"speed", num(cf.speed)}};
  std::cout << j.dump(2) << "\n";
  s.write_json("closed_forms.json", j);
  return 0;
}

int cmd_generate_thm2(const Session& s) {
  const double b = s.doc.number("model.transient.value", 1.0);
  const double gamma = s.doc.number("model.gamma.value", 1.0);
  const double x0 = s.doc.number("model.x0", 1.0);
  const double a = s.doc.number("model.a", 1.0);
  const auto spikes = static_cast<long>(s.doc.integer("run.spikes", 50));
  const auto gen = theorem2_generator(b, gamma, x0, a);
  const auto& sc = *gen.scale;

  // Coarse grid between spikes, dense inside them so the table keeps their shape.
  std::vector<double> xs;
  const double lo = sc.anchor(), hi = sc.origin() + static_cast<double>(spikes) + 1.0;
  for (double x = lo; x < hi; x += 0.05) xs.push_back(x);
  for (long j = 2; j <= spikes; ++j) {
    const Interval I = sc.spike(j);
    for (int k = 0; k <= 32; ++k) xs.push_back(I.lo + I.length() * k / 32.0);
  }
  xs.push_back(hi);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end(), [](double p, double q) { return q - p < 1e-12; }),
           xs.end());

  const fs::path table = fs::absolute(s.file("thm2_scale.csv"));
  {
    auto os = s.open_csv("thm2_scale.csv");
    CsvWriter w(os);
    w.header({"x", "u", "u_prime"});
    const double base = sc.u_prime(sc.anchor());
    for (double x : xs) w.row({x, sc.u(x) / base, sc.u_prime(x) / base});
  }
  {
    // The table only covers the first spikes, so the runnable config uses the
    // exact construction.
    std::ofstream os(s.file("thm2.conf"));
    os << "# transient two-phase model with the generated recurrent drift\n"
       << "# config_hash = " << s.doc.hash_hex() << "\n# seed = " << s.seed << "\n"
       << "# scale table (first " << spikes << " spikes): " << table.string() << "\n"
       << "[model]\na = " << CsvWriter::format(a) << "\nx0 = " << CsvWriter::format(x0)
       << "\n\n[model.transient]\nkind = constant\nvalue = " << CsvWriter::format(b)
       << "\n\n[model.gamma]\nkind = constant\nvalue = " << CsvWriter::format(gamma)
       << "\n\n[model.recurrent]\nkind = theorem2\n";
  }
  std::printf("spike bound B = %.6g, %zu table rows, %ld spikes -> %s\n", sc.bound(), xs.size(),
              spikes, table.string().c_str());
  return 0;
}

int cmd_verify(const Session& s, double budget) {
  AcceptanceOptions opt;
  opt.seed = s.seed;
  opt.execution = s.ex;
  opt.budget = budget;
  opt.on_result = [](const CriterionResult& r) { std::cout << format_result(r) << std::endl; };
  const auto results = run_acceptance(opt);
  json rows = json::array();
  int failed = 0;
  for (const auto& r : results) {
    failed += r.pass ? 0 : 1;
    rows.push_back({{"id", r.id},
                    {"label", r.label},
                    {"pass", r.pass},
                    {"detail", r.detail},
                    {"seconds", r.seconds}});
  }
  s.write_json("verify.json", {{"budget", budget}, {"criteria", rows}, {"failed", failed}});
  std::cout << failed << " of " << results.size() << " criteria failed\n";
  return failed == 0 ? 0 : kExitValidation;
}

void print_error(const std::string& code, const std::string& message, int exit_code,
                 const json& extra = nullptr) {
  json j{{"error", {{"code", code}, {"message", message}}}, {"exit_code", exit_code}};
  if (!extra.is_null()) j["report"] = extra;
  std::cerr << j.dump() << "\n";
}

bool is_input_error(ErrorCode c) {
  switch (c) {
    case ErrorCode::ConfigError:
    case ErrorCode::InvalidArgument:
    case ErrorCode::MalformedDrift:
    case ErrorCode::GammaInadmissible:
    case ErrorCode::AnchorViolation:
      return true;
    default:
      return false;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-phase drift diffusions: analytics, regeneration chains and simulation"};
  app.require_subcommand(1);

  Common common;
  double budget = 1.0;
  std::optional<double> cb, cc, cg, ca;
  std::optional<double> gb, gg, gx0, ga;

  struct Entry {
    const char* name;
    const char* help;
  };
  const Entry entries[] = {
      {"validate", "Check drift conditions and model invariants"},
      {"classify", "Theorem-based transience/recurrence verdict"},
      {"speed", "Terminal and regenerative speed estimates"},
      {"chain", "Regeneration chain with the divergence diagnostic"},
      {"onset-dist", "Sampled onset tail against the analytic tail"},
      {"hitting", "Hitting probability: quadrature against Monte Carlo"},
      {"closed-forms", "Closed-form constants of the ballistic model"},
      {"generate-thm2", "Scale table of the adversarial recurrent drift"},
      {"verify", "Run the acceptance criteria"},
  };
  for (const auto& e : entries) {
    auto* cmd = app.add_subcommand(e.name, e.help);
    common.attach(cmd);
    if (std::string(e.name) == "closed-forms") {
      cmd->add_option("--b", cb, "Transient drift b");
      cmd->add_option("--c", cc, "Recurrent drift c (inf for the reflecting limit)");
      cmd->add_option("--gamma", cg, "Down-crossing size");
      cmd->add_option("--a", ca, "Diffusion coefficient");
    }
    if (std::string(e.name) == "generate-thm2") {
      cmd->add_option("--b", gb, "Transient drift b");
      cmd->add_option("--gamma", gg, "Down-crossing size");
      cmd->add_option("--x0", gx0, "Start point");
      cmd->add_option("--a", ga, "Diffusion coefficient");
    }
    if (std::string(e.name) == "verify") {
      cmd->add_option("--budget", budget, "Scale factor on Monte Carlo sample sizes");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    print_error("UsageError", e.what(), kExitValidation);
    return kExitValidation;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    Session s = open_session(common);
    auto put = [&](const char* key, const std::optional<double>& v) {
      if (v) s.doc.set(key, *v);
    };
    put("closed.b", cb);
    put("closed.c", cc);
    put("closed.gamma", cg);
    put("closed.a", ca);
    put("model.transient.value", gb);
    put("model.gamma.value", gg);
    put("model.x0", gx0);
    put("model.a", ga);
    s.run = run_from_config(s.doc);

    if (name == "validate") return cmd_validate(s);
    if (name == "classify") return cmd_classify(s);
    if (name == "speed") return cmd_speed(s);
    if (name == "chain") return cmd_chain(s);
    if (name == "onset-dist") return cmd_onset_dist(s);
    if (name == "hitting") return cmd_hitting(s);
    if (name == "closed-forms") return cmd_closed_forms(s);
    if (name == "generate-thm2") return cmd_generate_thm2(s);
    return cmd_verify(s, budget);
  } catch (const ValidationFailure& f) {
    print_error("ValidationFailed", "model does not validate", kExitValidation, f.report);
    return kExitValidation;
  } catch (const Error& e) {
    const int code = is_input_error(e.code()) ? kExitValidation : kExitRuntime;
    print_error(std::string(to_string(e.code())), e.what(), code);
    return code;
  } catch (const std::exception& e) {
    print_error("RuntimeError", e.what(), kExitRuntime);
    return kExitRuntime;
  }
}
