// lognlogs: command-line front end.
//
//   lognlogs simulate  --preset setting2 --seed 7 --out d.csv
//   lognlogs fit       --in d.csv --b 2 --algo iem --out fit.json
//   lognlogs select    --in d.csv --b-max 4 --out sel.json
//   lognlogs loglik    --in d.csv --theta fit.json [--rungs rungs.csv]
//   lognlogs bootstrap --in d.csv --b 2 --n-boot 200 --out boot.json
//   lognlogs curve     --in d.csv [--fit fit.json] --out curve.csv [--svg plot.svg]
//   lognlogs replay    run.manifest.json
//
// Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric failure.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lognlogs/bootstrap.hpp"
#include "lognlogs/closed_form.hpp"
#include "lognlogs/em.hpp"
#include "lognlogs/io.hpp"
#include "lognlogs/likelihood.hpp"
#include "lognlogs/model_select.hpp"
#include "lognlogs/simulate.hpp"
#include "lognlogs/version.hpp"

namespace {

using nlohmann::json;
using namespace lognlogs;

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t default_seed() {
  if (const char* env = std::getenv("LOGNLOGS_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0') return v;
    throw UsageError(std::string("LOGNLOGS_SEED='") + env + "' is not an unsigned integer");
  }
  return 1;
}

struct EmFlags {
  std::size_t n_sim = EmConfig{}.n_sim;
  std::size_t n_burn = EmConfig{}.n_burn;
  std::size_t n_limit = EmConfig{}.n_limit;
  double theta_tol = EmConfig{}.theta_tol;
  bool resample_u = false;
  bool naive_init = false;

  void add(CLI::App* app) {
    app->add_option("--n-sim", n_sim, "MH sweeps per E-step")->capture_default_str();
    app->add_option("--n-burn", n_burn, "discarded sweeps per E-step")->capture_default_str();
    app->add_option("--n-limit", n_limit, "maximum EM iterations")->capture_default_str();
    app->add_option("--theta-tol", theta_tol, "relative-change tolerance")->capture_default_str();
    app->add_flag("--iem-resample-u", resample_u, "fresh ancillary E-step inside IEM");
    app->add_flag("--naive-init", naive_init, "start from the plug-in fit without refining tau_1");
  }
  EmConfig config(std::uint64_t seed) const {
    EmConfig c;
    c.n_sim = n_sim;
    c.n_burn = n_burn;
    c.n_limit = n_limit;
    c.theta_tol = theta_tol;
    c.iem_resample_u = resample_u;
    c.refine_tau1 = !naive_init;
    c.seed = seed;
    return c;
  }
  json to_json() const {
    return {{"n_sim", n_sim}, {"n_burn", n_burn}, {"n_limit", n_limit}, {"theta_tol", theta_tol},
            {"iem_resample_u", resample_u},
            {"naive_init", naive_init}};
  }
};

struct PpFlags {
  std::size_t n_grid = PowerPosteriorConfig{}.n_grid;
  double c = PowerPosteriorConfig{}.c;
  std::size_t n_sim = PowerPosteriorConfig{}.n_sim;
  std::size_t n_burn = PowerPosteriorConfig{}.n_burn;
  std::string rule = to_string(PowerPosteriorConfig{}.rule);

  void add(CLI::App* app) {
    app->add_option("--n-grid", n_grid, "temperature rungs")->capture_default_str();
    app->add_option("--c", c, "grid exponent, t_k = (k/n_grid)^c")->capture_default_str();
    app->add_option("--pp-n-sim", n_sim, "MH sweeps per rung")->capture_default_str();
    app->add_option("--pp-n-burn", n_burn, "discarded sweeps per rung")->capture_default_str();
    app->add_option("--rule", rule, "quadrature: log-hermite or trapezoid")->capture_default_str();
  }
  PowerPosteriorConfig config(std::uint64_t seed) const {
    PowerPosteriorConfig p;
    p.n_grid = n_grid;
    p.c = c;
    p.n_sim = n_sim;
    p.n_burn = n_burn;
    p.rule = parse_quadrature_rule(rule);
    p.seed = seed;
    return p;
  }
  json to_json() const {
    return {{"n_grid", n_grid}, {"c", c}, {"n_sim", n_sim}, {"n_burn", n_burn}, {"rule", rule}};
  }
};

json manifest(const std::string& command, const std::vector<std::string>& argv, std::uint64_t seed,
              json config, json inputs, json outputs) {
  return {{"command", command},       {"argv", argv},      {"seed", seed},
          {"config", std::move(config)}, {"inputs", std::move(inputs)},
          {"outputs", std::move(outputs)}, {"tool_version", kVersion}};
}

void write_json(const std::string& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

void write_manifest(const std::string& out, const json& m) { write_json(out + ".manifest.json", m); }

// Emits `j` to `out`, or stdout when `out` is empty.
void emit(const std::string& out, const json& j) {
  if (out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    write_json(out, j);
  }
}

BrokenParetoParams theta_from_flags(const std::string& theta_path, const std::vector<double>& beta,
                                    const std::vector<double>& tau) {
  if (!theta_path.empty()) {
    if (!beta.empty() || !tau.empty()) throw UsageError("give either --theta or --beta/--tau");
    return params_from_json(read_json_file(theta_path));
  }
  if (beta.empty() || tau.empty()) throw UsageError("need --theta or both --beta and --tau");
  return BrokenParetoParams(beta, tau);
}

// ---------------------------------------------------------------------------

struct Cli {
  CLI::App app{"Broken power-law (log N - log S) estimation from Poisson counts", "lognlogs"};
  std::vector<std::string> args;

  std::uint64_t seed = 1;
  std::size_t threads = 1;

  // simulate
  std::string sim_preset;
  std::vector<double> sim_beta, sim_tau, sim_a{1e19}, sim_b{10.0};
  std::size_t sim_n = 0;
  std::string sim_out;

  // shared
  std::string in;
  std::string out;
  std::size_t pieces = 1;
  EmFlags em;
  PpFlags pp;

  // fit
  std::string algo = "iem";
  bool trace = false;
  bool trace_loglik = false;
  bool no_loglik = false;

  // select
  std::size_t b_max = 4;

  // loglik
  std::string theta_path;
  std::vector<double> theta_beta, theta_tau;
  std::string rungs_out;

  // bootstrap
  std::size_t n_boot = 200;

  // curve
  std::string fit_path;
  std::string svg_out;
  std::string impute = "mean";

  // replay
  std::string replay_path;

  CLI::App* simulate = nullptr;
  CLI::App* fit = nullptr;
  CLI::App* select = nullptr;
  CLI::App* loglik = nullptr;
  CLI::App* bootstrap = nullptr;
  CLI::App* curve = nullptr;
  CLI::App* replay = nullptr;

  Cli() {
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);
    auto add_common = [&](CLI::App* sub) {
      sub->add_option("--seed", seed, "random seed (default: $LOGNLOGS_SEED or 1)");
      sub->add_option("--threads", threads, "worker threads (0 = all cores)")->capture_default_str();
    };

    simulate = app.add_subcommand("simulate", "simulate a dataset");
    add_common(simulate);
    simulate->add_option("--preset", sim_preset, "setting1 .. setting4");
    simulate->add_option("--beta", sim_beta, "slopes")->delimiter(',');
    simulate->add_option("--tau", sim_tau, "breakpoints")->delimiter(',');
    simulate->add_option("--n", sim_n, "number of sources");
    simulate->add_option("--a", sim_a, "effective area (1 or n values)")->delimiter(',')->capture_default_str();
    simulate->add_option("--b", sim_b, "background (1 or n values)")->delimiter(',')->capture_default_str();
    simulate->add_option("--out", sim_out, "output CSV")->required();

    fit = app.add_subcommand("fit", "fit a B-piece model by Monte-Carlo EM");
    add_common(fit);
    fit->add_option("--in", in, "dataset CSV")->required();
    fit->add_option("--b", pieces, "number of pieces B")->required();
    fit->add_option("--algo", algo, "saem, aaem, aem or iem")->capture_default_str();
    em.add(fit);
    pp.add(fit);
    fit->add_flag("--trace", trace, "record per-iteration estimates");
    fit->add_flag("--trace-loglik", trace_loglik, "add closed-form -loglik to the trace (b = 0 only)");
    fit->add_flag("--no-loglik", no_loglik, "skip the log-likelihood at the estimate");
    fit->add_option("--out", out, "output JSON (default stdout)");

    select = app.add_subcommand("select", "choose B by AIC/BIC");
    add_common(select);
    select->add_option("--in", in, "dataset CSV")->required();
    select->add_option("--b-max", b_max, "largest B tried")->capture_default_str();
    em.add(select);
    pp.add(select);
    select->add_option("--out", out, "output JSON (default stdout)");

    loglik = app.add_subcommand("loglik", "power-posterior log-likelihood at a given theta");
    add_common(loglik);
    loglik->add_option("--in", in, "dataset CSV")->required();
    loglik->add_option("--theta", theta_path, "JSON with beta and tau (e.g. a fit output)");
    loglik->add_option("--beta", theta_beta, "slopes")->delimiter(',');
    loglik->add_option("--tau", theta_tau, "breakpoints")->delimiter(',');
    pp.add(loglik);
    loglik->add_option("--rungs", rungs_out, "write the (t, l_t) table as CSV");
    loglik->add_option("--out", out, "output JSON (default stdout)");

    bootstrap = app.add_subcommand("bootstrap", "bootstrap standard errors");
    add_common(bootstrap);
    bootstrap->add_option("--in", in, "dataset CSV")->required();
    bootstrap->add_option("--b", pieces, "number of pieces B")->required();
    bootstrap->add_option("--n-boot", n_boot, "replicates")->capture_default_str();
    em.add(bootstrap);
    bootstrap->add_option("--out", out, "output JSON (default stdout)");

    curve = app.add_subcommand("curve", "log N - log S curve (and fitted overlay)");
    curve->alias("lognlogs");
    add_common(curve);
    curve->add_option("--in", in, "dataset CSV")->required();
    curve->add_option("--fit", fit_path, "fit JSON; adds imputed fluxes and the overlay");
    curve->add_option("--impute", impute, "mean or draw")->capture_default_str();
    curve->add_option("--n-sim", em.n_sim, "MH sweeps for imputation")->capture_default_str();
    curve->add_option("--n-burn", em.n_burn, "discarded sweeps for imputation")->capture_default_str();
    curve->add_option("--out", out, "output CSV")->required();
    curve->add_option("--svg", svg_out, "also write an SVG plot");

    replay = app.add_subcommand("replay", "re-run the command recorded in a manifest");
    replay->add_option("manifest", replay_path, "manifest JSON")->required();
  }

  int run();
  int run_simulate();
  int run_fit();
  int run_select();
  int run_loglik();
  int run_bootstrap();
  int run_curve();
  int run_replay();

  json common_config() const { return {{"threads", threads}}; }
};

int Cli::run_simulate() {
  SimSetting s;
  if (!sim_preset.empty()) {
    if (!sim_beta.empty() || !sim_tau.empty()) throw UsageError("--preset excludes --beta/--tau");
    s = preset(sim_preset, seed);
    if (simulate->count("--n") > 0) s.n = sim_n;
    if (simulate->count("--a") > 0) s.a = sim_a;
    if (simulate->count("--b") > 0) s.b = sim_b;
  } else {
    if (sim_beta.empty() || sim_tau.empty() || sim_n == 0) {
      throw UsageError("need --preset, or --beta, --tau and --n");
    }
    s.params = BrokenParetoParams(sim_beta, sim_tau);
    s.n = sim_n;
    s.a = sim_a;
    s.b = sim_b;
    s.seed = seed;
  }
  const Simulated sim = generate(s);
  std::ostringstream csv;
  write_dataset_csv(csv, sim.data);
  write_text_file(sim_out, csv.str());

  json cfg = params_to_json(s.params);
  cfg["preset"] = sim_preset;
  cfg["n"] = s.n;
  cfg["a"] = s.a;
  cfg["b"] = s.b;
  write_manifest(sim_out, manifest("simulate", args, seed, cfg, json::object(), {{"data", sim_out}}));
  return 0;
}

int Cli::run_fit() {
  if (pieces < 1) throw UsageError("--b must be >= 1");
  const EmAlgorithm a = parse_em_algorithm(algo);
  const Dataset data = read_dataset_csv(in);
  if (trace_loglik && !data.background_free()) {
    throw UsageError("--trace-loglik needs a background-free dataset (all b = 0)");
  }
  const FitResult r = em_fit(data, pieces, a, em.config(seed));

  json j = params_to_json(r.theta_hat);
  j["algo"] = to_string(a);
  j["pieces"] = pieces;
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  j["near_equal_slopes"] = r.near_equal_slopes;
  if (no_loglik) {
    j["loglik"] = nullptr;
  } else if (data.background_free()) {
    j["loglik"] = closed_form_loglik_nobg(r.theta_hat, data);
    j["loglik_method"] = "closed-form";
  } else {
    const auto ll = power_posterior_loglik(r.theta_hat, data, pp.config(derive_seed(seed, {1})));
    j["loglik"] = ll.value;
    j["loglik_mc_se"] = ll.mc_se;
    j["loglik_method"] = "power-posterior";
  }
  if (trace || trace_loglik) {
    json tr = json::array();
    for (std::size_t k = 0; k < r.trajectory.size(); ++k) {
      json step = params_to_json(r.trajectory[k]);
      step["iteration"] = k;
      if (trace_loglik) step["neg_loglik"] = -closed_form_loglik_nobg(r.trajectory[k], data);
      tr.push_back(step);
    }
    j["trace"] = tr;
    if (!r.half_steps.empty()) {
      json hs = json::array();
      for (const auto& h : r.half_steps) hs.push_back(params_to_json(h));
      j["half_steps"] = hs;
    }
  }
  json cfg = em.to_json();
  cfg["algo"] = algo;
  cfg["pieces"] = pieces;
  cfg["trace"] = trace;
  cfg["trace_loglik"] = trace_loglik;
  if (!data.background_free() && !no_loglik) cfg["power_posterior"] = pp.to_json();
  const json m = manifest("fit", args, seed, cfg, {{"data", in}}, {{"fit", out}});
  j["manifest"] = m;
  emit(out, j);
  if (!out.empty()) write_manifest(out, m);
  return 0;
}

int Cli::run_select() {
  if (b_max < 1) throw UsageError("--b-max must be >= 1");
  const Dataset data = read_dataset_csv(in);
  const SelectionReport rep =
      select_b(data, b_max, em.config(seed), pp.config(derive_seed(seed, {1})), threads);

  json rows = json::array();
  for (const auto& c : rep.candidates) {
    json row = {{"b", c.pieces}, {"ok", c.ok}};
    if (c.ok) {
      row.update(params_to_json(*c.theta_hat));
      row["loglik"] = c.loglik;
      row["loglik_mc_se"] = c.loglik_mc_se;
      row["aic"] = c.aic;
      row["bic"] = c.bic;
      row["converged"] = c.converged;
      row["iterations"] = c.iterations;
    } else {
      row["error"] = c.error;
    }
    rows.push_back(row);
  }
  auto pairs = [](const std::vector<ClosePair>& v) {
    json a = json::array();
    for (const auto& p : v) a.push_back({p.b1, p.b2});
    return a;
  };
  json j = {{"candidates", rows},
            {"b_hat_aic", rep.b_hat_aic},
            {"b_hat_bic", rep.b_hat_bic},
            {"close_aic", pairs(rep.close_aic)},
            {"close_bic", pairs(rep.close_bic)}};
  json cfg = em.to_json();
  cfg["b_max"] = b_max;
  cfg["power_posterior"] = pp.to_json();
  cfg.update(common_config());
  const json m = manifest("select", args, seed, cfg, {{"data", in}}, {{"selection", out}});
  j["manifest"] = m;
  emit(out, j);
  if (!out.empty()) write_manifest(out, m);
  return rep.b_hat_bic == 0 ? kExitNumeric : 0;
}

int Cli::run_loglik() {
  const BrokenParetoParams theta = theta_from_flags(theta_path, theta_beta, theta_tau);
  const Dataset data = read_dataset_csv(in);
  const LoglikEstimate ll = power_posterior_loglik(theta, data, pp.config(seed));
  json j = params_to_json(theta);
  j["loglik"] = ll.value;
  j["mc_se"] = ll.mc_se;
  j["rule"] = pp.rule;
  if (!rungs_out.empty()) {
    std::ostringstream csv;
    csv << "t,l_t,var_t,se_t\n";
    for (std::size_t k = 0; k < ll.rung_ts.size(); ++k) {
      csv << format_real(ll.rung_ts[k]) << ',' << format_real(ll.rung_means[k]) << ','
          << format_real(ll.rung_vars[k]) << ',' << format_real(ll.rung_se[k]) << '\n';
    }
    write_text_file(rungs_out, csv.str());
  }
  json cfg = pp.to_json();
  cfg["theta"] = params_to_json(theta);
  json outputs = {{"loglik", out}};
  if (!rungs_out.empty()) outputs["rungs"] = rungs_out;
  const json m = manifest("loglik", args, seed, cfg, {{"data", in}}, outputs);
  j["manifest"] = m;
  emit(out, j);
  if (!out.empty()) write_manifest(out, m);
  return 0;
}

int Cli::run_bootstrap() {
  if (pieces < 1) throw UsageError("--b must be >= 1");
  if (n_boot < 2) throw UsageError("--n-boot must be >= 2");
  const Dataset data = read_dataset_csv(in);
  const BootstrapReport rep =
      bootstrap_se(data, pieces, n_boot, em.config(seed), derive_seed(seed, {2}), threads);

  const auto est = report_scale(rep.theta_hat);
  json params = json::array();
  for (std::size_t c = 0; c < est.size(); ++c) {
    const std::size_t j = c % pieces + 1;
    const std::string name = c < pieces ? "beta_" + std::to_string(j) : "log10_tau_" + std::to_string(j);
    params.push_back({{"name", name}, {"estimate", est[c]}, {"se", rep.se[c]}});
  }
  json j = {{"parameters", params},
            {"n_boot", rep.n_boot},
            {"successes", rep.replicates.size()},
            {"failures", rep.failures},
            {"not_converged", rep.not_converged},
            {"failure_messages", rep.failure_messages},
            {"replicates", rep.replicates}};
  json cfg = em.to_json();
  cfg["pieces"] = pieces;
  cfg["n_boot"] = n_boot;
  cfg.update(common_config());
  const json m = manifest("bootstrap", args, seed, cfg, {{"data", in}}, {{"bootstrap", out}});
  j["manifest"] = m;
  emit(out, j);
  if (!out.empty()) write_manifest(out, m);
  return 2 * rep.failures > n_boot ? kExitNumeric : 0;
}

std::string render_svg(const std::vector<CurvePoint>& pts, const std::vector<OverlaySegment>& overlay,
                       const std::vector<double>& breaks) {
  double x0 = kInf, x1 = -kInf, y0 = kInf, y1 = -kInf;
  for (const auto& p : pts) {
    x0 = std::min(x0, p.log10_s);
    x1 = std::max(x1, p.log10_s);
    y0 = std::min(y0, p.log10_n);
    y1 = std::max(y1, p.log10_n);
  }
  for (const auto& s : overlay) {
    x0 = std::min(x0, s.log10_s_start);
    x1 = std::max(x1, s.log10_s_end);
    y0 = std::min(y0, s.at(s.log10_s_end));
    y1 = std::max(y1, s.at(s.log10_s_start));
  }
  if (x1 - x0 < 1e-9) x1 = x0 + 1.0;
  if (y1 - y0 < 1e-9) y1 = y0 + 1.0;
  const double w = 640, h = 480, m = 50;
  auto px = [&](double x) { return m + (x - x0) / (x1 - x0) * (w - 2 * m); };
  auto py = [&](double y) { return h - m - (y - y0) / (y1 - y0) * (h - 2 * m); };
  auto f = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };
  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<line x1=\"" << m << "\" y1=\"" << h - m << "\" x2=\"" << w - m << "\" y2=\"" << h - m
    << "\" stroke=\"black\"/>\n"
    << "<line x1=\"" << m << "\" y1=\"" << m << "\" x2=\"" << m << "\" y2=\"" << h - m
    << "\" stroke=\"black\"/>\n"
    << "<text x=\"" << w / 2 << "\" y=\"" << h - 10 << "\" text-anchor=\"middle\">log10 S</text>\n"
    << "<text x=\"15\" y=\"" << h / 2 << "\" transform=\"rotate(-90 15 " << h / 2
    << ")\" text-anchor=\"middle\">log10 N(&gt;S)</text>\n"
    << "<text x=\"" << m << "\" y=\"" << h - m + 15 << "\" font-size=\"10\">" << f(x0) << "</text>\n"
    << "<text x=\"" << w - m << "\" y=\"" << h - m + 15 << "\" font-size=\"10\" text-anchor=\"end\">"
    << f(x1) << "</text>\n";
  o << "<g fill=\"none\" stroke=\"steelblue\">\n";
  for (const auto& p : pts) {
    o << "<circle cx=\"" << f(px(p.log10_s)) << "\" cy=\"" << f(py(p.log10_n)) << "\" r=\"2\"/>\n";
  }
  o << "</g>\n";
  for (double b : breaks) {
    o << "<line x1=\"" << f(px(b)) << "\" y1=\"" << m << "\" x2=\"" << f(px(b)) << "\" y2=\"" << h - m
      << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
  }
  for (const auto& s : overlay) {
    o << "<line class=\"overlay\" data-segment=\"" << s.segment << "\" data-beta=\"" << format_real(s.beta)
      << "\" x1=\"" << f(px(s.log10_s_start)) << "\" y1=\"" << f(py(s.at(s.log10_s_start))) << "\" x2=\""
      << f(px(s.log10_s_end)) << "\" y2=\"" << f(py(s.at(s.log10_s_end)))
      << "\" stroke=\"firebrick\" stroke-width=\"2\"/>\n";
  }
  o << "</svg>\n";
  return o.str();
}

int Cli::run_curve() {
  if (impute != "mean" && impute != "draw") throw UsageError("--impute must be mean or draw");
  const Dataset data = read_dataset_csv(in);
  std::vector<double> fluxes;
  std::vector<OverlaySegment> overlay;
  std::vector<double> breaks;
  std::optional<BrokenParetoParams> theta;
  if (fit_path.empty()) {
    fluxes = data.naive_fluxes();
  } else {
    theta = params_from_json(read_json_file(fit_path));
    fluxes = impute_fluxes(data, *theta, em.n_sim, em.n_burn, seed,
                           impute == "mean" ? ImputeMode::Mean : ImputeMode::Draw);
  }
  const auto pts = lognlogs_curve(fluxes);
  std::ostringstream csv;
  csv << "kind,segment,log10_s,log10_n\n";
  for (const auto& p : pts) csv << "curve,0," << format_real(p.log10_s) << ',' << format_real(p.log10_n) << '\n';
  if (theta) {
    double smax = -kInf;
    for (const auto& p : pts) smax = std::max(smax, p.log10_s);
    overlay = lognlogs_overlay(*theta, data.size(), smax);
    for (const auto& s : overlay) {
      csv << "overlay," << s.segment << ',' << format_real(s.log10_s_start) << ','
          << format_real(s.at(s.log10_s_start)) << '\n';
      csv << "overlay," << s.segment << ',' << format_real(s.log10_s_end) << ','
          << format_real(s.at(s.log10_s_end)) << '\n';
    }
    for (std::size_t j = 0; j < theta->pieces(); ++j) {
      breaks.push_back(std::log10(theta->tau()[j]));
      csv << "break," << j + 1 << ',' << format_real(breaks.back()) << ",\n";
    }
  }
  write_text_file(out, csv.str());
  json outputs = {{"curve", out}};
  if (!svg_out.empty()) {
    write_text_file(svg_out, render_svg(pts, overlay, breaks));
    outputs["svg"] = svg_out;
  }
  json cfg = {{"impute", impute}, {"n_sim", em.n_sim}, {"n_burn", em.n_burn}};
  json inputs = {{"data", in}};
  if (!fit_path.empty()) inputs["fit"] = fit_path;
  write_manifest(out, manifest("curve", args, seed, cfg, inputs, outputs));
  return 0;
}

int Cli::run_replay() {
  const json m = read_json_file(replay_path);
  if (!m.contains("argv") || !m["argv"].is_array()) throw UsageError("manifest has no argv");
  std::vector<std::string> argv = m["argv"].get<std::vector<std::string>>();
  if (!argv.empty() && argv.front() == "replay") throw UsageError("refusing to replay a replay");
  Cli inner;
  inner.args = argv;
  std::vector<std::string> reversed(argv.rbegin(), argv.rend());
  inner.app.parse(reversed);
  return inner.run();
}

int Cli::run() {
  if (replay->parsed()) return run_replay();
  if (simulate->parsed() && simulate->count("--seed") == 0) seed = default_seed();
  for (CLI::App* sub : {fit, select, loglik, bootstrap, curve}) {
    if (sub->parsed() && sub->count("--seed") == 0) seed = default_seed();
  }
  // Record the seed actually used so the manifest replays without the environment.
  if (std::find(args.begin(), args.end(), "--seed") == args.end()) {
    args.push_back("--seed");
    args.push_back(std::to_string(seed));
  }
  if (simulate->parsed()) return run_simulate();
  if (fit->parsed()) return run_fit();
  if (select->parsed()) return run_select();
  if (loglik->parsed()) return run_loglik();
  if (bootstrap->parsed()) return run_bootstrap();
  if (curve->parsed()) return run_curve();
  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  Cli cli;
  try {
    cli.app.parse(argc, argv);
    for (int i = 1; i < argc; ++i) cli.args.emplace_back(argv[i]);
  } catch (const CLI::ParseError& e) {
    const int rc = cli.app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }
  try {
    return cli.run();
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const EmptySegmentError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericFailure& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const FitError& e) {
    std::cerr << "fit failed: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitNumeric;
  }
}
