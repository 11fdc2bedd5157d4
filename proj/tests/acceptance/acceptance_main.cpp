// Acceptance suite: runs every gate criterion at its pinned tolerance and
// prints one pass/fail line per criterion. Exit code = number of failures.
//
//   acceptance            run all criteria
//   acceptance --only K   run criterion K alone

#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "panelbreak/adaptive.hpp"
#include "panelbreak/limit.hpp"
#include "panelbreak/lse.hpp"
#include "panelbreak/mle.hpp"
#include "panelbreak/noise.hpp"
#include "panelbreak/scenarios.hpp"
#include "panelbreak/stats.hpp"

using namespace panelbreak;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

// mirrors the documented box-clip convention for boundary MLEs
double clip_into(double v, double lo, double hi) {
  double margin = 1e-9 * std::min(hi - lo, 1.0);
  return std::min(std::max(v, lo + margin), hi - margin);
}

// ---------------------------------------------------------------------- 1

Outcome criterion_oracle_equivalence() {
  RngStream master(101);
  const double tol = 1e-10;
  auto families = std::vector<std::string>{"normal", "bernoulli", "poisson"};
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    RngStream rng = master.substream(trial);
    std::size_t m = 1 + static_cast<std::size_t>(rng.uniform() * 5);
    std::size_t n = 16 + static_cast<std::size_t>(rng.uniform() * 25);
    const std::string fam_name = families[trial % families.size()];
    auto fam = make_family(fam_name);

    PanelData p(m, n);
    auto b0 = static_cast<std::size_t>(n / 2);
    for (std::size_t k = 0; k < m; ++k)
      for (std::size_t t = 0; t < n; ++t) {
        bool pre = t < b0;
        if (fam_name == "normal") {
          p.x(k, t) = rng.normal(pre ? 0.0 : 1.0, 1.0);
        } else if (fam_name == "bernoulli") {
          p.x(k, t) = rng.bernoulli(pre ? 0.35 : 0.65);
        } else {
          p.x(k, t) = rng.poisson(pre ? 2.0 : 4.0);
        }
      }

    TrimWindow window(0.15);
    auto range = validate_panel(p, window);
    auto prefix = build_prefix(p);
    auto prof = mle_profile(p, *fam, window);

    for (std::size_t b = range.lo; b <= range.hi; ++b) {
      // naive LSE criterion
      double naive = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        double m1 = 0, m2 = 0;
        for (std::size_t t = 0; t < b; ++t) m1 += p.x(k, t);
        for (std::size_t t = b; t < n; ++t) m2 += p.x(k, t);
        m1 /= static_cast<double>(b);
        m2 /= static_cast<double>(n - b);
        for (std::size_t t = 0; t < b; ++t)
          naive -= (p.x(k, t) - m1) * (p.x(k, t) - m1);
        for (std::size_t t = b; t < n; ++t)
          naive -= (p.x(k, t) - m2) * (p.x(k, t) - m2);
      }
      naive /= static_cast<double>(n);
      double fast = lse_criterion(prefix, b);
      worst = std::max(worst, std::abs(fast - naive) /
                                  std::max({1.0, std::abs(fast), std::abs(naive)}));
      if (!close_rel(fast, naive, tol))
        return {false, "LSE mismatch at trial " + std::to_string(trial)};

      // naive MLE criterion with from-scratch closed-form segment fits
      double naive_l = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        double s1 = 0, s2 = 0, q1 = 0, q2 = 0;
        for (std::size_t t = 0; t < b; ++t) {
          s1 += p.x(k, t);
          q1 += p.x(k, t) * p.x(k, t);
        }
        for (std::size_t t = b; t < n; ++t) {
          s2 += p.x(k, t);
          q2 += p.x(k, t) * p.x(k, t);
        }
        double len1 = static_cast<double>(b), len2 = static_cast<double>(n - b);
        if (fam_name == "normal") {
          double mu1 = s1 / len1, v1 = std::max(q1 / len1 - mu1 * mu1, 1e-12);
          double mu2 = s2 / len2, v2 = std::max(q2 / len2 - mu2 * mu2, 1e-12);
          naive_l += -0.5 * len1 * std::log(2.0 * M_PI * v1) -
                     0.5 * (q1 - 2 * mu1 * s1 + len1 * mu1 * mu1) / v1;
          naive_l += -0.5 * len2 * std::log(2.0 * M_PI * v2) -
                     0.5 * (q2 - 2 * mu2 * s2 + len2 * mu2 * mu2) / v2;
        } else if (fam_name == "bernoulli") {
          double p1 = clip_into(s1 / len1, 1e-6, 1.0 - 1e-6);
          double p2 = clip_into(s2 / len2, 1e-6, 1.0 - 1e-6);
          naive_l += s1 * std::log(p1) + (len1 - s1) * std::log1p(-p1);
          naive_l += s2 * std::log(p2) + (len2 - s2) * std::log1p(-p2);
        } else {
          double l1 = clip_into(s1 / len1, 1e-6, 1e9);
          double l2 = clip_into(s2 / len2, 1e-6, 1e9);
          double lg1 = 0, lg2 = 0;
          for (std::size_t t = 0; t < b; ++t) lg1 += std::lgamma(p.x(k, t) + 1.0);
          for (std::size_t t = b; t < n; ++t) lg2 += std::lgamma(p.x(k, t) + 1.0);
          naive_l += s1 * std::log(l1) - len1 * l1 - lg1;
          naive_l += s2 * std::log(l2) - len2 * l2 - lg2;
        }
      }
      naive_l /= static_cast<double>(n);
      double fast_l = prof.at(b);
      worst = std::max(worst, std::abs(fast_l - naive_l) /
                                  std::max({1.0, std::abs(fast_l), std::abs(naive_l)}));
      if (!close_rel(fast_l, naive_l, tol))
        return {false, fam_name + " MLE mismatch at trial " + std::to_string(trial) +
                           ", b=" + std::to_string(b)};
    }
  }
  std::ostringstream os;
  os << "50 panels, every admissible b, worst relative gap " << worst
     << " (tolerance 1e-10)";
  return {true, os.str()};
}

// ---------------------------------------------------------------------- 2

Outcome criterion_gaussian_equivalence() {
  auto family = make_family("normal-known", {{"sigma2", 1.0}});
  RngStream master(202);
  for (int trial = 0; trial < 200; ++trial) {
    RngStream rng = master.substream(trial);
    std::size_t m = 1 + static_cast<std::size_t>(rng.uniform() * 8);
    std::size_t n = 20 + static_cast<std::size_t>(rng.uniform() * 50);
    PanelData p(m, n);
    for (auto& v : p.values) v = rng.normal() + 2.0 * (rng.uniform() - 0.5);
    auto lse = estimate_lse(p, TrimWindow(0.1));
    auto mle = estimate_mle(p, *family, TrimWindow(0.1));
    if (lse.b_index != mle.b_index)
      return {false, "argmax mismatch at trial " + std::to_string(trial)};
  }
  return {true, "200 random panels, exact argmax equality"};
}

// ---------------------------------------------------------------------- 3

Outcome criterion_derivatives() {
  struct Case {
    FamilyPtr fam;
    std::vector<std::pair<double, double>> range;
  };
  std::vector<Case> cases = {
      {make_family("normal-known", {{"sigma2", 1.5}}), {{-5, 5}}},
      {make_family("normal"), {{-5, 5}, {0.2, 8}}},
      {make_family("bernoulli"), {{0.05, 0.95}}},
      {make_family("poisson"), {{0.2, 25}}},
      {make_family("zip"), {{0.05, 0.9}, {0.2, 15}}},
      {make_family("nef-poisson"), {{-1.5, 2.5}}},
      {make_family("curved-normal"), {{0.1, 5}}},
      {make_family("probit"), {{-2, 2}}},
      {make_family("tobit"), {{-2, 2}}},
  };
  RngStream rng(303);
  for (const auto& c : cases) {
    const std::size_t d = c.fam->param_dim();
    std::vector<double> cov(d, 1.0);
    for (int rep = 0; rep < 100; ++rep) {
      Vec par(d);
      for (std::size_t j = 0; j < d; ++j) {
        auto [lo, hi] = c.range[j % c.range.size()];
        par[static_cast<Eigen::Index>(j)] = lo + (hi - lo) * rng.uniform();
      }
      std::span<const double> cv{};
      if (c.fam->uses_covariates()) {
        for (auto& y : cov) y = 0.5 + rng.uniform();
        cv = cov;
      }
      double x = c.fam->sample(par, cv, rng);
      const double step = 1e-5;
      Vec an = c.fam->score(par, x, cv);
      Mat han = c.fam->hessian(par, x, cv);
      for (std::size_t j = 0; j < d; ++j) {
        Vec hi = par, lo = par;
        hi[static_cast<Eigen::Index>(j)] += step;
        lo[static_cast<Eigen::Index>(j)] -= step;
        double fd = (c.fam->log_density(hi, x, cv) - c.fam->log_density(lo, x, cv)) /
                    (2 * step);
        if (!close_rel(an[static_cast<Eigen::Index>(j)], fd, 1e-5))
          return {false, c.fam->name() + " score vs finite difference"};
        Vec sfd = (c.fam->score(hi, x, cv) - c.fam->score(lo, x, cv)) / (2 * step);
        for (std::size_t a = 0; a < d; ++a)
          if (!close_rel(han(static_cast<Eigen::Index>(a),
                             static_cast<Eigen::Index>(j)),
                         sfd[static_cast<Eigen::Index>(a)], 1e-5))
            return {false, c.fam->name() + " hessian vs finite difference"};
      }
    }
  }

  // Fisher consistency I = -E[hessian] for the full-rank exponential families
  auto check_discrete = [](const ModelFamily& fam, const Vec& par, int cap,
                           double tol) {
    Mat ehess = Mat::Zero(fam.param_dim(), fam.param_dim());
    for (int x = 0; x <= cap; ++x)
      ehess += std::exp(fam.log_density(par, x)) * fam.hessian(par, x);
    Mat info = fam.fisher_info(par);
    return (info + ehess).cwiseAbs().maxCoeff() < tol;
  };
  Vec bp(1), lp(1), np(1);
  bp << 0.3;
  lp << 2.5;
  np << 0.7;
  if (!check_discrete(*make_family("bernoulli"), bp, 1, 1e-6))
    return {false, "bernoulli fisher identity"};
  if (!check_discrete(*make_family("poisson"), lp, 120, 1e-6))
    return {false, "poisson fisher identity"};
  if (!check_discrete(*make_family("nef-poisson"), np, 150, 1e-6))
    return {false, "nef fisher identity"};

  auto check_quad = [](const ModelFamily& fam, const Vec& par, double mean,
                       double sd) {
    const int nodes = 160;
    Mat ehess = Mat::Zero(fam.param_dim(), fam.param_dim());
    for (int i = 0; i < nodes; ++i) {
      double x = mean + sd * (-12.0 + 24.0 * (i + 0.5) / nodes);
      ehess += std::exp(fam.log_density(par, x)) * fam.hessian(par, x) *
               (24.0 * sd / nodes);
    }
    Mat info = fam.fisher_info(par);
    return (info + ehess).cwiseAbs().maxCoeff() < 1e-6;
  };
  Vec nk(1), nn(2), cd(1);
  nk << 0.4;
  nn << 1.0, 2.0;
  cd << 2.0;
  if (!check_quad(*make_family("normal-known", {{"sigma2", 1.5}}), nk, 0.4,
                  std::sqrt(1.5)))
    return {false, "normal-known fisher identity"};
  if (!check_quad(*make_family("normal"), nn, 1.0, std::sqrt(2.0)))
    return {false, "normal fisher identity"};
  if (!check_quad(*make_family("curved-normal"), cd, 0.5, 0.5))
    return {false, "curved-normal fisher identity"};

  return {true,
          "score/hessian vs finite differences at 100 points per family "
          "(rel 1e-5); Fisher = -E[hessian] within 1e-6"};
}

// ------------------------------------------------------------------- 4, 5

Outcome scenario_outcome(const std::string& name,
                         const std::map<std::string, double>& overrides,
                         std::uint64_t seed) {
  ScenarioResult res = run_scenario(name, overrides, seed);
  std::ostringstream os;
  bool first = true;
  for (const auto& [k, v] : res.stats) {
    if (!first) os << ", ";
    os << k << "=" << v;
    first = false;
  }
  return {res.pass, os.str()};
}

Outcome criterion_regime_a() { return scenario_outcome("regime-a-degeneracy", {}, 404); }

Outcome criterion_rate() {
  Outcome lse = scenario_outcome("rate-lse", {}, 505);
  Outcome mle = scenario_outcome("rate-mle", {}, 506);
  return {lse.pass && mle.pass, "lse: " + lse.detail + " | mle: " + mle.detail};
}

// ---------------------------------------------------------------------- 6

Outcome criterion_limit_scaling() {
  std::ostringstream os;

  // regime b gamma^2-scaling on the gamma^2-proportional default grids:
  // draws(gamma=2) vs 4 * draws(gamma=1)
  const std::size_t reps = 10000;
  {
    LimitLawSpec g2;
    g2.gamma_L = g2.gamma_R = 2.0;
    LimitLawSpec g1;
    g1.gamma_L = g1.gamma_R = 1.0;
    std::vector<double> a(reps), b(reps);
    RngStream ma(601), mb(602);
    for (std::size_t r = 0; r < reps; ++r) {
      RngStream r1 = ma.substream(r);
      a[r] = sim_regime_b(g2, g2.default_step(), g2.default_horizon(), r1).h;
      RngStream r2 = mb.substream(r);
      b[r] = 4.0 * sim_regime_b(g1, g1.default_step(), g1.default_horizon(), r2).h;
    }
    double ks = ks_statistic(a, b);
    double crit = ks_critical(0.01, reps, reps);
    os << "regime-b KS " << ks << " (crit " << crit << ")";
    if (ks >= crit) return {false, os.str()};
  }

  // regime c scaling: multiplying (c1^2, gamma*) by a common factor leaves
  // the integer law unchanged, and the (1,1) law matches an independently
  // coded gamma*^2/c^2-scaled walk-argmax oracle
  {
    LimitLawSpec s1;
    s1.regime = Regime::C;
    s1.c1_sq = 1.0;
    s1.gamma_L_star = s1.gamma_R_star = 1.0;
    LimitLawSpec s2 = s1;
    s2.c1_sq = 2.0;
    s2.gamma_L_star = s2.gamma_R_star = 2.0;
    std::vector<double> a(reps), b(reps), c(reps);
    RngStream ma(603), mb(604), mc(605);
    for (std::size_t r = 0; r < reps; ++r) {
      RngStream r1 = ma.substream(r);
      a[r] = static_cast<double>(sim_regime_c(s1, 64, r1).h);
      RngStream r2 = mb.substream(r);
      b[r] = static_cast<double>(sim_regime_c(s2, 64, r2).h);
      // oracle: direct two-sided Gaussian walk with drift -|h|/2, scaled by
      // gamma*^2 / c^2 = 1 for this parameterization
      RngStream r3 = mc.substream(r);
      double best = 0.0;
      long long best_h = 0;
      for (int side = 0; side < 2; ++side) {
        double cum = 0.0;
        for (long long j = 1; j <= 64; ++j) {
          cum += r3.normal() - 0.5;
          long long h = side == 0 ? -j : j;
          if (cum > best ||
              (cum == best && std::llabs(h) < std::llabs(best_h))) {
            best = cum;
            best_h = h;
          }
        }
      }
      c[r] = static_cast<double>(best_h);
    }
    double ks_pair = ks_statistic(a, b);
    double ks_oracle = ks_statistic(a, c);
    double crit = ks_critical(0.01, reps, reps);
    os << "; regime-c KS scale-pair " << ks_pair << ", walk-oracle " << ks_oracle
       << " (crit " << crit << ")";
    if (ks_pair >= crit || ks_oracle >= crit) return {false, os.str()};
  }

  // discretization refinement: coupled paths at step and step/2
  {
    LimitLawSpec spec;
    spec.gamma_L = spec.gamma_R = 1.0;
    const std::size_t n = 20000;
    std::vector<double> fine(n), coarse(n);
    RngStream master(606);
    for (std::size_t r = 0; r < n; ++r) {
      RngStream rng = master.substream(r);
      auto d = sim_regime_b_coupled(spec, 0.01, 100.0, rng);
      fine[r] = d.h_fine;
      coarse[r] = d.h_coarse;
    }
    std::sort(fine.begin(), fine.end());
    std::sort(coarse.begin(), coarse.end());
    double worst = 0.0;
    for (double p : {0.05, 0.25, 0.75, 0.95}) {
      double qf = quantile_sorted(fine, p);
      double qc = quantile_sorted(coarse, p);
      worst = std::max(worst, std::abs(qf - qc) / std::max(std::abs(qc), 1.0));
    }
    os << "; refinement drift " << worst << " (cap 0.02)";
    if (worst >= 0.02) return {false, os.str()};
  }
  return {true, os.str()};
}

// ------------------------------------------------------------------- 7-10

Outcome criterion_variance_ordering() {
  return scenario_outcome("variance-ordering", {}, 707);
}

Outcome criterion_coverage() { return scenario_outcome("coverage-lse", {}, 808); }

Outcome criterion_zip() { return scenario_outcome("zip-equal-mean", {}, 909); }

Outcome criterion_dependent() {
  return scenario_outcome("dependent-gaussian-ci", {}, 1010);
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc)
      only = std::atoi(argv[i + 1]);
  }

  struct Entry {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  std::vector<Entry> entries = {
      {1, "oracle equivalence of both criteria", criterion_oracle_equivalence},
      {2, "gaussian equivalence of the estimators", criterion_gaussian_equivalence},
      {3, "derivative and Fisher correctness", criterion_derivatives},
      {4, "regime (a) degeneracy", criterion_regime_a},
      {5, "rate boundedness across n", criterion_rate},
      {6, "limit-law scaling identities", criterion_limit_scaling},
      {7, "variance ordering MLE vs LSE", criterion_variance_ordering},
      {8, "adaptive CI coverage", criterion_coverage},
      {9, "ZIP equal-mean separation", criterion_zip},
      {10, "dependent-Gaussian adaptive variant", criterion_dependent},
  };

  int failures = 0;
  for (const auto& entry : entries) {
    if (only != 0 && entry.id != only) continue;
    auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = entry.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    std::cout << (out.pass ? "PASS" : "FAIL") << " criterion " << entry.id
              << ": " << entry.name << " [" << out.detail << "] ("
              << static_cast<int>(secs) << "s)" << std::endl;
    if (!out.pass) ++failures;
  }
  return failures;
}
