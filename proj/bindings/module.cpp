// Python bindings for the main operations: estimation, adaptive confidence
// intervals, limit-law simulation, and synthetic panel generation.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "panelbreak/adaptive.hpp"
#include "panelbreak/limit.hpp"
#include "panelbreak/lse.hpp"
#include "panelbreak/mle.hpp"
#include "panelbreak/noise.hpp"
#include "panelbreak/scenarios.hpp"

namespace py = pybind11;
using namespace panelbreak;

namespace {

PanelData panel_from_array(const py::array_t<double>& values,
                           const py::object& covariates) {
  auto buf = values.unchecked<2>();
  PanelData p(static_cast<std::size_t>(buf.shape(0)),
              static_cast<std::size_t>(buf.shape(1)));
  for (py::ssize_t k = 0; k < buf.shape(0); ++k)
    for (py::ssize_t t = 0; t < buf.shape(1); ++t)
      p.x(static_cast<std::size_t>(k), static_cast<std::size_t>(t)) = buf(k, t);
  if (!covariates.is_none()) {
    auto cov = covariates.cast<py::array_t<double>>().unchecked<3>();
    if (cov.shape(0) != buf.shape(0) || cov.shape(1) != buf.shape(1))
      throw ConfigError("covariates must be shaped (m, n, d)");
    p.d = static_cast<std::size_t>(cov.shape(2));
    p.covariates.resize(p.m * p.n * p.d);
    for (py::ssize_t k = 0; k < cov.shape(0); ++k)
      for (py::ssize_t t = 0; t < cov.shape(1); ++t)
        for (py::ssize_t j = 0; j < cov.shape(2); ++j)
          p.covariates[(static_cast<std::size_t>(k) * p.n +
                        static_cast<std::size_t>(t)) *
                           p.d +
                       static_cast<std::size_t>(j)] = cov(k, t, j);
  }
  return p;
}

py::dict estimate_to_dict(const BreakEstimate& est) {
  py::dict d;
  d["tau_hat"] = est.tau_hat;
  d["b_index"] = est.b_index;
  d["profile_lo"] = est.profile_lo;
  d["profile"] = est.profile;
  d["method"] = est.method == Method::LSE ? "lse" : "mle";
  py::list theta, eta;
  for (const auto& v : est.segment_params.theta) theta.append(v);
  for (const auto& v : est.segment_params.eta) eta.append(v);
  d["theta"] = theta;
  d["eta"] = eta;
  return d;
}

FamilyPtr family_from_args(const std::string& name,
                           const std::map<std::string, double>& opts) {
  return make_family(name, opts);
}

}  // namespace

PYBIND11_MODULE(_panelbreak, m) {
  m.doc() = "Common break estimation in panel data: least squares and "
            "maximum likelihood estimators, limiting-law simulation, and "
            "adaptive resampling confidence intervals.";

  m.def(
      "estimate_lse",
      [](const py::array_t<double>& values, double c_star) {
        PanelData p = panel_from_array(values, py::none());
        auto est = estimate_lse(p, TrimWindow(c_star));
        py::dict d = estimate_to_dict(est);
        auto g = gamma_estimates(p, est);
        d["gamma_L_sq"] = g.gamma_L_sq;
        d["gamma_R_sq"] = g.gamma_R_sq;
        d["gamma_L_star_sq"] = g.gamma_L_star_sq;
        d["gamma_R_star_sq"] = g.gamma_R_star_sq;
        d["c1_sq"] = g.c1_sq;
        d["delta_norm_sq"] = g.delta_norm_sq;
        return d;
      },
      py::arg("values"), py::arg("c_star") = 0.1,
      "Least squares break estimate from an (m, n) panel array.");

  m.def(
      "estimate_mle",
      [](const py::array_t<double>& values, const std::string& family,
         double c_star, const std::map<std::string, double>& family_opts,
         const py::object& covariates) {
        PanelData p = panel_from_array(values, covariates);
        auto fam = family_from_args(family, family_opts);
        auto est = estimate_mle(p, *fam, TrimWindow(c_star));
        py::dict d = estimate_to_dict(est);
        auto g = gamma_mle_estimate(p, *fam, est);
        d["gamma_mle_sq"] = g.gamma_mle_sq;
        d["gamma_mle_star_sq"] = g.gamma_mle_star_sq;
        return d;
      },
      py::arg("values"), py::arg("family"), py::arg("c_star") = 0.1,
      py::arg("family_opts") = std::map<std::string, double>{},
      py::arg("covariates") = py::none(),
      "Maximum likelihood break estimate under a named model family.");

  m.def(
      "adaptive_ci",
      [](const py::array_t<double>& values, const std::string& method,
         const std::string& family, std::size_t replicates, double level,
         std::uint64_t seed, double c_star, std::size_t max_lag,
         const std::map<std::string, double>& family_opts,
         const py::object& covariates) {
        PanelData p = panel_from_array(values, covariates);
        AdaptiveConfig cfg;
        cfg.replicates = replicates;
        cfg.level = level;
        cfg.seed = seed;
        cfg.c_star = c_star;
        cfg.max_lag = max_lag;
        if (method == "mle")
          cfg.method = AdaptiveMethod::MLE;
        else if (method == "lse-dep")
          cfg.method = AdaptiveMethod::LSE_DEPENDENT_GAUSSIAN;
        else if (method != "lse")
          throw ConfigError("method must be lse, mle, or lse-dep");
        FamilyPtr fam = family.empty() ? nullptr : family_from_args(family, family_opts);
        AdaptiveResult r = adaptive_ci(p, cfg, fam);
        py::dict d;
        d["tau_hat"] = r.tau_hat;
        d["b_index"] = r.b_index;
        d["q_lo"] = r.q_lo;
        d["q_hi"] = r.q_hi;
        d["ci_index"] = py::make_tuple(r.ci_index_lo, r.ci_index_hi);
        d["ci_tau"] = py::make_tuple(r.ci_tau_lo, r.ci_tau_hi);
        d["h_draws"] = r.h_draws;
        d["level"] = r.level;
        d["seed"] = r.seed;
        d["boundary_fraction"] = r.boundary_fraction;
        d["gaussian_surrogate"] = r.gaussian_surrogate;
        d["degenerate_series"] = r.degenerate_series;
        d["snr3_plugin"] = r.snr3_diagnostic;
        return d;
      },
      py::arg("values"), py::arg("method") = "lse", py::arg("family") = "",
      py::arg("replicates") = 500, py::arg("level") = 0.10, py::arg("seed") = 1,
      py::arg("c_star") = 0.1, py::arg("max_lag") = 5,
      py::arg("family_opts") = std::map<std::string, double>{},
      py::arg("covariates") = py::none(),
      "Adaptive resampling confidence interval for the common break.");

  m.def(
      "limit_quantiles",
      [](const std::string& regime, double gamma_L, double gamma_R,
         double c1_sq, double gamma_L_star, double gamma_R_star,
         const std::vector<double>& levels, std::size_t replicates,
         std::uint64_t seed, double step, double horizon) {
        LimitLawSpec spec;
        if (regime == "a") spec.regime = Regime::A;
        else if (regime == "c") spec.regime = Regime::C;
        else if (regime != "b") throw ConfigError("regime must be a, b, or c");
        spec.gamma_L = gamma_L;
        spec.gamma_R = gamma_R;
        spec.c1_sq = c1_sq;
        spec.gamma_L_star = gamma_L_star;
        spec.gamma_R_star = gamma_R_star;
        RngStream rng(seed);
        QuantileTable t = quantile_table(spec, levels, replicates, rng, step, horizon);
        py::dict d;
        d["levels"] = t.levels;
        d["quantiles"] = t.quantiles;
        d["draws"] = t.draws;
        d["step"] = t.step;
        d["horizon"] = t.horizon;
        d["seed"] = t.seed;
        d["doubling_fraction"] = t.doubling_fraction;
        return d;
      },
      py::arg("regime"), py::arg("gamma_L") = 1.0, py::arg("gamma_R") = 1.0,
      py::arg("c1_sq") = 0.0, py::arg("gamma_L_star") = 0.0,
      py::arg("gamma_R_star") = 0.0,
      py::arg("levels") = std::vector<double>{0.05, 0.25, 0.5, 0.75, 0.95},
      py::arg("replicates") = 1000, py::arg("seed") = 1, py::arg("step") = 0.0,
      py::arg("horizon") = 0.0,
      "Monte Carlo quantile table of one of the limiting argmax laws.");

  m.def(
      "gen_panel",
      [](const std::vector<double>& mu1, const std::vector<double>& mu2,
         double tau, std::size_t n, std::uint64_t seed, const std::string& noise,
         double noise_sd) {
        NoiseSpec spec;
        spec.innovation_sd = noise_sd;
        if (noise == "nonlinear-ma") spec.kind = NoiseKind::NonlinearMA;
        else if (noise != "iid") throw ConfigError("noise must be iid or nonlinear-ma");
        RngStream rng(seed);
        PanelData p = gen_panel(mu1, mu2, tau, spec, n, rng);
        py::array_t<double> out({p.m, p.n});
        auto buf = out.mutable_unchecked<2>();
        for (std::size_t k = 0; k < p.m; ++k)
          for (std::size_t t = 0; t < p.n; ++t)
            buf(static_cast<py::ssize_t>(k), static_cast<py::ssize_t>(t)) = p.x(k, t);
        return out;
      },
      py::arg("mu1"), py::arg("mu2"), py::arg("tau"), py::arg("n"),
      py::arg("seed") = 1, py::arg("noise") = "iid", py::arg("noise_sd") = 1.0,
      "Synthetic mean-shift panel with iid or 3-dependent noise.");

  m.def(
      "gen_family_panel",
      [](const std::string& family, const std::vector<double>& theta,
         const std::vector<double>& eta, double tau, std::size_t m,
         std::size_t n, std::uint64_t seed,
         const std::map<std::string, double>& family_opts) {
        auto fam = family_from_args(family, family_opts);
        Vec th = Eigen::Map<const Vec>(theta.data(), (Eigen::Index)theta.size());
        Vec et = Eigen::Map<const Vec>(eta.data(), (Eigen::Index)eta.size());
        std::vector<Vec> ths(m, th), ets(m, et);
        RngStream rng(seed);
        PanelData p = gen_family_panel(*fam, ths, ets, tau, n, rng);
        py::array_t<double> out({p.m, p.n});
        auto buf = out.mutable_unchecked<2>();
        for (std::size_t k = 0; k < p.m; ++k)
          for (std::size_t t = 0; t < p.n; ++t)
            buf(static_cast<py::ssize_t>(k), static_cast<py::ssize_t>(t)) = p.x(k, t);
        return out;
      },
      py::arg("family"), py::arg("theta"), py::arg("eta"), py::arg("tau"),
      py::arg("m"), py::arg("n"), py::arg("seed") = 1,
      py::arg("family_opts") = std::map<std::string, double>{},
      "Panel sampled from a model family with a parameter break.");

  m.def("family_names", &family_names, "Registered model family names.");
  m.def("scenario_names", &scenario_names, "Monte Carlo study catalog.");
  m.def(
      "run_scenario",
      [](const std::string& name, const std::map<std::string, double>& overrides,
         std::uint64_t seed) {
        ScenarioResult r = run_scenario(name, overrides, seed);
        py::dict d;
        d["name"] = r.name;
        d["pass"] = r.pass;
        d["seed"] = r.seed;
        d["params"] = r.params;
        d["stats"] = r.stats;
        d["checks"] = r.checks;
        return d;
      },
      py::arg("name"), py::arg("overrides") = std::map<std::string, double>{},
      py::arg("seed") = 1, "Run one catalog scenario and report its checks.");

  py::register_exception<ConfigError>(m, "PanelbreakConfigError",
                                      PyExc_ValueError);
  py::register_exception<DataError>(m, "PanelbreakDataError", PyExc_ValueError);
}
