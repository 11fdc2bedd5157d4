// Command-line surface: data ingestion, estimation, adaptive confidence
// intervals, limit-law quantile tables, and the Monte Carlo study catalog.
// Exit codes: 0 success, 1 usage/config error, 2 data error, 3 numerical.

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "panelbreak/adaptive.hpp"
#include "panelbreak/csv.hpp"
#include "panelbreak/limit.hpp"
#include "panelbreak/lse.hpp"
#include "panelbreak/mle.hpp"
#include "panelbreak/noise.hpp"
#include "panelbreak/scenarios.hpp"
#include "panelbreak/stats.hpp"

using json = nlohmann::json;
using namespace panelbreak;

namespace {

constexpr const char* kVersion = "panelbreak 0.1.0";

void emit(const json& report, const std::string& output) {
  if (output.empty() || output == "-") {
    std::cout << report.dump(2) << "\n";
    return;
  }
  std::ofstream out(output);
  if (!out) throw DataError("cannot open " + output + " for writing");
  out << report.dump(2) << "\n";
}

std::map<std::string, double> parse_kv(const std::vector<std::string>& items) {
  std::map<std::string, double> out;
  for (const auto& item : items) {
    auto pos = item.find('=');
    if (pos == std::string::npos)
      throw ConfigError("expected key=value, got '" + item + "'");
    out[item.substr(0, pos)] = std::stod(item.substr(pos + 1));
  }
  return out;
}

std::vector<double> parse_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(std::stod(cell));
  return out;
}

// mean pattern: const:<v>, alt:<mag>, or list:v1,v2,...
std::vector<double> parse_pattern(const std::string& spec, std::size_t m) {
  auto pos = spec.find(':');
  std::string kind = spec.substr(0, pos);
  std::string arg = pos == std::string::npos ? "" : spec.substr(pos + 1);
  if (kind == "const") return std::vector<double>(m, std::stod(arg));
  if (kind == "alt") {
    double mag = std::stod(arg);
    std::vector<double> v(m);
    for (std::size_t k = 0; k < m; ++k) v[k] = (k % 2 == 0 ? mag : -mag);
    return v;
  }
  if (kind == "list") {
    auto v = parse_list(arg);
    if (v.size() != m)
      throw ConfigError("mean list length " + std::to_string(v.size()) +
                        " does not match m=" + std::to_string(m));
    return v;
  }
  throw ConfigError("unknown mean pattern '" + spec + "'");
}

SeqSpec parse_seq(const std::string& spec) {
  auto pos = spec.find(':');
  std::string kind = spec.substr(0, pos);
  std::string arg = pos == std::string::npos ? "" : spec.substr(pos + 1);
  auto vals = parse_list(arg);
  if (kind == "geometric") {
    if (vals.size() != 2) throw ConfigError("geometric:<scale>,<rate>");
    return SeqSpec::geometric(vals[0], vals[1]);
  }
  if (kind == "polynomial") {
    if (vals.size() != 2) throw ConfigError("polynomial:<scale>,<exponent>");
    return SeqSpec::polynomial(vals[0], vals[1]);
  }
  if (kind == "literal") return SeqSpec::from_literal(vals);
  throw ConfigError("unknown sequence spec '" + spec + "'");
}

json segment_params_json(const BreakEstimate& est) {
  json out = json::array();
  for (std::size_t k = 0; k < est.segment_params.theta.size(); ++k) {
    out.push_back({{"series", k},
                   {"theta", est.segment_params.theta[k]},
                   {"eta", est.segment_params.eta[k]},
                   {"theta_degenerate", (bool)est.segment_params.theta_degenerate[k]},
                   {"eta_degenerate", (bool)est.segment_params.eta_degenerate[k]}});
  }
  return out;
}

struct CommonOpts {
  std::string input, covariates_path, output;
  std::string family_name;
  std::vector<std::string> family_opts;
  double c_star = 0.1;
};

PanelData load_panel(const CommonOpts& c) {
  PanelData p = read_panel_csv(c.input);
  if (!c.covariates_path.empty()) read_covariates_csv(c.covariates_path, p);
  return p;
}

FamilyPtr load_family(const CommonOpts& c) {
  if (c.family_name.empty()) return nullptr;
  return make_family(c.family_name, parse_kv(c.family_opts));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string(kVersion) +
               " -- common break estimation for panel data"};
  app.set_config("--config", "", "read options from an INI config file");
  app.require_subcommand(0, 1);

  CommonOpts opt;
  std::string method = "lse";
  std::uint64_t seed = 1;
  std::size_t replicates = 500;
  double level = 0.10;
  int threads = 1;
  std::string emit_profile;

  // ---- estimate ----
  auto* est_cmd = app.add_subcommand("estimate", "estimate the common break");
  est_cmd->fallthrough();
  est_cmd->add_option("--input", opt.input, "panel CSV, one row per series")
      ->required();
  est_cmd->add_option("--covariates", opt.covariates_path,
                      "companion covariate CSV (m*n rows, d columns)");
  est_cmd->add_option("--method", method, "lse or mle")
      ->check(CLI::IsMember({"lse", "mle"}));
  est_cmd->add_option("--family", opt.family_name, "model family for mle");
  est_cmd->add_option("--family-opt", opt.family_opts,
                      "family option key=value (repeatable)");
  est_cmd->add_option("--c-star", opt.c_star, "trimming fraction in (0, 0.5)");
  est_cmd->add_option("--emit-profile", emit_profile,
                      "write the criterion profile CSV here");
  est_cmd->add_option("--output", opt.output, "report path (default stdout)");

  // ---- adapt-ci ----
  auto* ci_cmd = app.add_subcommand("adapt-ci",
                                    "adaptive confidence interval for the break");
  ci_cmd->fallthrough();
  std::string ci_method = "lse";
  std::size_t max_lag = 5;
  bool emit_draws = false;
  ci_cmd->add_option("--input", opt.input, "panel CSV")->required();
  ci_cmd->add_option("--covariates", opt.covariates_path, "covariate CSV");
  ci_cmd->add_option("--method", ci_method, "lse, mle, or lse-dep")
      ->check(CLI::IsMember({"lse", "mle", "lse-dep"}));
  ci_cmd->add_option("--family", opt.family_name, "model family");
  ci_cmd->add_option("--family-opt", opt.family_opts, "family option key=value");
  ci_cmd->add_option("--c-star", opt.c_star, "trimming fraction");
  ci_cmd->add_option("--seed", seed, "rng seed");
  ci_cmd->add_option("--replicates", replicates, "resampling replicates R");
  ci_cmd->add_option("--level", level, "alpha for the 1-alpha interval");
  ci_cmd->add_option("--max-lag", max_lag, "autocovariance band (lse-dep)");
  ci_cmd->add_flag("--emit-draws", emit_draws, "include h draws in the report");
  ci_cmd->add_option("--output", opt.output, "report path");

  // ---- limitdist ----
  auto* lim_cmd =
      app.add_subcommand("limitdist", "simulate a limiting argmax law");
  lim_cmd->fallthrough();
  std::string regime = "b";
  double gamma_l = 1.0, gamma_r = 1.0, c1_sq = 0.0;
  double gamma_l_star = 0.0, gamma_r_star = 0.0;
  double step = 0.0, horizon = 0.0;
  std::string levels_csv = "0.05,0.25,0.5,0.75,0.95";
  std::string dep_kernel, criterion_form = "lse";
  std::vector<std::string> k0_normal;
  bool refine = false;
  lim_cmd->add_option("--regime", regime, "a, b, c, or b-dep")
      ->check(CLI::IsMember({"a", "b", "c", "b-dep"}));
  lim_cmd->add_option("--gamma-l", gamma_l, "left scale (regime b)");
  lim_cmd->add_option("--gamma-r", gamma_r, "right scale (regime b)");
  lim_cmd->add_option("--c1-sq", c1_sq, "drift constant (regime c)");
  lim_cmd->add_option("--gamma-l-star", gamma_l_star, "left walk scale (regime c)");
  lim_cmd->add_option("--gamma-r-star", gamma_r_star, "right walk scale (regime c)");
  lim_cmd->add_option("--k0-normal", k0_normal,
                      "fixed-gap component mu1,mu2,sigma2 (repeatable)");
  lim_cmd->add_option("--form", criterion_form, "lse or mle jump increments")
      ->check(CLI::IsMember({"lse", "mle"}));
  lim_cmd->add_option("--dep-kernel", dep_kernel,
                      "brownian-min:<gamma_sq> covariance for b-dep");
  lim_cmd->add_option("--step", step, "grid step (0 = default)");
  lim_cmd->add_option("--horizon", horizon, "grid horizon (0 = default)");
  lim_cmd->add_option("--levels", levels_csv, "quantile levels");
  lim_cmd->add_option("--replicates", replicates, "Monte Carlo draws");
  lim_cmd->add_option("--seed", seed, "rng seed");
  lim_cmd->add_flag("--refine", refine,
                    "also emit the half-step table from coupled paths");
  lim_cmd->add_option("--output", opt.output, "report path");

  // ---- mc-study ----
  auto* mc_cmd = app.add_subcommand("mc-study", "run a named Monte Carlo study");
  mc_cmd->fallthrough();
  std::string scenario;
  std::vector<std::string> sets;
  bool emit_replicates = false;
  mc_cmd->add_option("--scenario", scenario, "one of the catalog scenarios")
      ->required();
  mc_cmd->add_option("--set", sets, "override parameter key=value (repeatable)");
  mc_cmd->add_option("--seed", seed, "rng seed");
  mc_cmd->add_option("--threads", threads, "worker cap");
  mc_cmd->add_flag("--emit-replicates", emit_replicates,
                   "include per-replicate statistics");
  mc_cmd->add_option("--output", opt.output, "report path");

  // ---- gen-data ----
  auto* gen_cmd = app.add_subcommand("gen-data", "generate a synthetic panel");
  gen_cmd->fallthrough();
  std::size_t gm = 10, gn = 200;
  double gtau = 0.5;
  std::string mu1_pat = "const:0", mu2_pat = "const:1";
  std::string noise_kind = "iid", kernel_spec, coeffs_spec;
  double noise_sd = 1.0, trunc_tol = 1e-8;
  std::string theta_csv, eta_csv, cov_output;
  std::size_t cov_dim = 1;
  double cov_lo = 0.5, cov_hi = 1.5;
  gen_cmd->add_option("--m", gm, "series count");
  gen_cmd->add_option("--n", gn, "time points");
  gen_cmd->add_option("--tau", gtau, "break fraction");
  gen_cmd->add_option("--mu1", mu1_pat, "pre-break means: const:v, alt:v, list:...");
  gen_cmd->add_option("--mu2", mu2_pat, "post-break means");
  gen_cmd->add_option("--noise", noise_kind,
                      "iid, nonlinear-ma, gp, or linear (signal-plus-noise mode)")
      ->check(CLI::IsMember({"iid", "nonlinear-ma", "gp", "linear"}));
  gen_cmd->add_option("--noise-sd", noise_sd, "innovation standard deviation");
  gen_cmd->add_option("--kernel", kernel_spec,
                      "gp kernel: geometric:s,r | polynomial:s,p | literal:...");
  gen_cmd->add_option("--coeffs", coeffs_spec, "linear-process coefficients");
  gen_cmd->add_option("--trunc-tol", trunc_tol, "linear truncation tolerance");
  gen_cmd->add_option("--family", opt.family_name,
                      "sample from a model family instead of signal-plus-noise");
  gen_cmd->add_option("--family-opt", opt.family_opts, "family option key=value");
  gen_cmd->add_option("--theta", theta_csv, "pre-break family parameters");
  gen_cmd->add_option("--eta", eta_csv, "post-break family parameters");
  gen_cmd->add_option("--cov-dim", cov_dim, "covariate dimension");
  gen_cmd->add_option("--cov-lo", cov_lo, "covariate lower bound");
  gen_cmd->add_option("--cov-hi", cov_hi, "covariate upper bound");
  gen_cmd->add_option("--cov-output", cov_output, "covariate CSV path");
  gen_cmd->add_option("--seed", seed, "rng seed");
  gen_cmd->add_option("--output", opt.output, "panel CSV path")->required();

  // ---- print-config ----
  auto* pc_cmd = app.add_subcommand(
      "print-config", "print all defaults (archivable experiment config)");
  pc_cmd->fallthrough();

  try {
    app.parse(argc, argv);

    if (pc_cmd->parsed()) {
      std::cout << "# " << kVersion << "\n";
      std::cout << app.config_to_str(true, true);
      json cat;
      for (const auto& name : scenario_names())
        cat[name] = scenario_defaults(name);
      std::cout << "# scenario catalog defaults and thresholds\n"
                << cat.dump(2) << "\n";
      return 0;
    }

    if (est_cmd->parsed()) {
      PanelData panel = load_panel(opt);
      TrimWindow window(opt.c_star);
      FamilyPtr family = load_family(opt);
      BreakEstimate est;
      json report;
      if (method == "mle") {
        if (!family) throw ConfigError("--family is required for --method mle");
        est = estimate_mle(panel, *family, window);
        auto g = gamma_mle_estimate(panel, *family, est);
        report["gamma_mle_sq"] = g.gamma_mle_sq;
        report["gamma_mle_star_sq"] = g.gamma_mle_star_sq;
      } else {
        est = estimate_lse(panel, window);
        auto g = gamma_estimates(panel, est);
        report["gamma"] = {{"gamma_L_sq", g.gamma_L_sq},
                           {"gamma_R_sq", g.gamma_R_sq},
                           {"gamma_L_star_sq", g.gamma_L_star_sq},
                           {"gamma_R_star_sq", g.gamma_R_star_sq},
                           {"c1_sq", g.c1_sq},
                           {"delta_norm_sq", g.delta_norm_sq}};
      }
      report["version"] = kVersion;
      report["method"] = method;
      report["m"] = panel.m;
      report["n"] = panel.n;
      report["config"] = {{"input", opt.input},
                          {"covariates", opt.covariates_path},
                          {"method", method},
                          {"family", opt.family_name},
                          {"c_star", opt.c_star}};
      report["tau_hat"] = est.tau_hat;
      report["b_index"] = est.b_index;
      report["segment_params"] = segment_params_json(est);
      if (!emit_profile.empty()) {
        write_profile_csv(emit_profile, est);
        report["profile_csv"] = emit_profile;
      }
      emit(report, opt.output);
      return 0;
    }

    if (ci_cmd->parsed()) {
      PanelData panel = load_panel(opt);
      FamilyPtr family = load_family(opt);
      AdaptiveConfig cfg;
      cfg.replicates = replicates;
      cfg.level = level;
      cfg.seed = seed;
      cfg.c_star = opt.c_star;
      cfg.max_lag = max_lag;
      if (ci_method == "mle")
        cfg.method = AdaptiveMethod::MLE;
      else if (ci_method == "lse-dep")
        cfg.method = AdaptiveMethod::LSE_DEPENDENT_GAUSSIAN;
      AdaptiveResult res = adaptive_ci(panel, cfg, family);
      json report{{"version", kVersion},
                  {"method", ci_method},
                  {"config",
                   {{"input", opt.input},
                    {"covariates", opt.covariates_path},
                    {"family", opt.family_name},
                    {"c_star", opt.c_star},
                    {"max_lag", max_lag}}},
                  {"tau_hat", res.tau_hat},
                  {"b_index", res.b_index},
                  {"level", res.level},
                  {"q_lo", res.q_lo},
                  {"q_hi", res.q_hi},
                  {"ci_index", {res.ci_index_lo, res.ci_index_hi}},
                  {"ci_tau", {res.ci_tau_lo, res.ci_tau_hi}},
                  {"replicates", res.replicates},
                  {"seed", res.seed},
                  {"diagnostics",
                   {{"boundary_fraction", res.boundary_fraction},
                    {"gaussian_surrogate", res.gaussian_surrogate},
                    {"degenerate_series", res.degenerate_series},
                    {"snr3_plugin", res.snr3_diagnostic}}}};
      if (emit_draws) report["h_draws"] = res.h_draws;
      emit(report, opt.output);
      return 0;
    }

    if (lim_cmd->parsed()) {
      LimitLawSpec spec;
      if (regime == "a") spec.regime = Regime::A;
      if (regime == "c") spec.regime = Regime::C;
      spec.gamma_L = gamma_l;
      spec.gamma_R = gamma_r;
      spec.c1_sq = c1_sq;
      spec.gamma_L_star = gamma_l_star;
      spec.gamma_R_star = gamma_r_star;
      spec.form = criterion_form == "mle" ? CriterionForm::MLE : CriterionForm::LSE;
      for (const auto& comp : k0_normal) {
        auto vals = parse_list(comp);
        if (vals.size() != 3) throw ConfigError("--k0-normal needs mu1,mu2,sigma2");
        auto fam = make_family("normal-known", {{"sigma2", vals[2]}});
        Vec pre(1), post(1);
        pre << vals[0];
        post << vals[1];
        spec.k0.push_back({fam, fam, pre, post});
      }
      if (regime == "b-dep") {
        if (dep_kernel.rfind("brownian-min:", 0) != 0)
          throw ConfigError("--dep-kernel must be brownian-min:<gamma_sq>");
        double gsq = std::stod(dep_kernel.substr(13));
        spec.dep_cov = [gsq](double h1, double h2) {
          if ((h1 < 0) != (h2 < 0)) return 0.0;
          return gsq * std::min(std::abs(h1), std::abs(h2));
        };
      }
      auto levels = parse_list(levels_csv);
      RngStream rng(seed);
      json report{{"version", kVersion}, {"seed", seed}, {"regime", regime}};
      auto table_json = [&](const QuantileTable& t) {
        json q;
        for (std::size_t i = 0; i < t.levels.size(); ++i)
          q[std::to_string(t.levels[i])] = t.quantiles[i];
        return json{{"levels", t.levels},
                    {"quantiles", q},
                    {"replicate_count", t.replicate_count},
                    {"grid_meta", {{"step", t.step}, {"horizon", t.horizon}}},
                    {"seed", t.seed},
                    {"doubling_fraction", t.doubling_fraction}};
      };
      json spec_echo{{"gamma_L", gamma_l},
                     {"gamma_R", gamma_r},
                     {"c1_sq", c1_sq},
                     {"gamma_L_star", gamma_l_star},
                     {"gamma_R_star", gamma_r_star},
                     {"k0_components", k0_normal},
                     {"form", criterion_form}};
      report["spec"] = spec_echo;
      if (refine && regime == "b" && !spec.dep_cov) {
        double st = step > 0.0 ? step : spec.default_step();
        double hz = horizon > 0.0 ? horizon : spec.default_horizon();
        QuantileTable fine, coarse;
        fine.step = 0.5 * st;
        coarse.step = st;
        fine.horizon = coarse.horizon = hz;
        fine.seed = coarse.seed = seed;
        fine.levels = coarse.levels = levels;
        fine.replicate_count = coarse.replicate_count = replicates;
        fine.draws.resize(replicates);
        coarse.draws.resize(replicates);
        for (std::size_t r = 0; r < replicates; ++r) {
          RngStream rr = rng.substream(r);
          auto d = sim_regime_b_coupled(spec, st, hz, rr);
          fine.draws[r] = d.h_fine;
          coarse.draws[r] = d.h_coarse;
        }
        std::sort(fine.draws.begin(), fine.draws.end());
        std::sort(coarse.draws.begin(), coarse.draws.end());
        for (double p : levels) {
          fine.quantiles.push_back(quantile_sorted(fine.draws, p));
          coarse.quantiles.push_back(quantile_sorted(coarse.draws, p));
        }
        report["table"] = table_json(coarse);
        report["table_refined"] = table_json(fine);
      } else {
        QuantileTable t = quantile_table(spec, levels, replicates, rng, step, horizon);
        report["table"] = table_json(t);
      }
      emit(report, opt.output);
      return 0;
    }

    if (mc_cmd->parsed()) {
      auto overrides = parse_kv(sets);
      ScenarioResult res = run_scenario(scenario, overrides, seed, threads);
      json report{{"version", kVersion},
                  {"scenario", res.name},
                  {"seed", res.seed},
                  {"pass", res.pass},
                  {"params", res.params},
                  {"stats", res.stats},
                  {"checks", res.checks},
                  {"wall_seconds", res.wall_seconds}};
      if (emit_replicates) report["per_replicate"] = res.per_replicate;
      emit(report, opt.output);
      for (const auto& line : res.checks) std::cerr << line << "\n";
      return 0;
    }

    if (gen_cmd->parsed()) {
      RngStream rng(seed);
      PanelData panel;
      if (!opt.family_name.empty()) {
        FamilyPtr family = load_family(opt);
        auto tv = parse_list(theta_csv);
        auto ev = parse_list(eta_csv);
        if (tv.size() != family->param_dim() || ev.size() != family->param_dim())
          throw ConfigError("--theta/--eta must have the family's dimension");
        Vec th = Eigen::Map<const Vec>(tv.data(), (Eigen::Index)tv.size());
        Vec et = Eigen::Map<const Vec>(ev.data(), (Eigen::Index)ev.size());
        std::vector<Vec> ths(gm, th), ets(gm, et);
        CovariateSpec cov{family->uses_covariates() ? cov_dim : 0, cov_lo, cov_hi};
        panel = gen_family_panel(*family, ths, ets, gtau, gn, rng, cov);
        if (panel.has_covariates() && !cov_output.empty())
          write_covariates_csv(cov_output, panel);
      } else {
        NoiseSpec noise;
        noise.innovation_sd = noise_sd;
        if (noise_kind == "nonlinear-ma") noise.kind = NoiseKind::NonlinearMA;
        if (noise_kind == "gp") {
          noise.kind = NoiseKind::GaussianProcess;
          noise.kernel = parse_seq(kernel_spec);
        }
        if (noise_kind == "linear") {
          noise.kind = NoiseKind::LinearProcess;
          noise.coeffs = parse_seq(coeffs_spec);
          noise.trunc_tol = trunc_tol;
        }
        panel = gen_panel(parse_pattern(mu1_pat, gm), parse_pattern(mu2_pat, gm),
                          gtau, noise, gn, rng);
      }
      write_panel_csv(opt.output, panel);
      std::cerr << "wrote " << panel.m << "x" << panel.n << " panel to "
                << opt.output << "\n";
      return 0;
    }

    std::cout << app.help() << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
