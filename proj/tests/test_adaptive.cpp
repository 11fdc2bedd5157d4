#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "panelbreak/adaptive.hpp"
#include "panelbreak/noise.hpp"
#include "panelbreak/stats.hpp"

using namespace panelbreak;

namespace {

PanelData step_panel(std::size_t m, std::size_t n, double mu2, double sigma,
                     double tau, std::uint64_t seed) {
  RngStream rng(seed);
  std::vector<double> a(m, 0.0), b(m, mu2);
  NoiseSpec noise;
  noise.innovation_sd = sigma;
  return gen_panel(a, b, tau, noise, n, rng);
}

}  // namespace

TEST_CASE("refit: normal family reproduces the segment moments") {
  PanelData p = step_panel(3, 60, 1.0, 1.0, 0.5, 1);
  auto est = estimate_lse(p, TrimWindow(0.1));
  auto fitted = refit_params(p, est, make_family("normal"));
  auto prefix = build_prefix(p);
  auto st = segment_stats(prefix, est.b_index);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(fitted.theta[k][0] == doctest::Approx(st.mu1[k]));
    CHECK(fitted.theta[k][1] == doctest::Approx(st.s1sq[k]));
    CHECK(fitted.eta[k][0] == doctest::Approx(st.mu2[k]));
  }
  CHECK_FALSE(fitted.gaussian_surrogate);
}

TEST_CASE("refit: bernoulli link sets p = mu and variance p(1-p)") {
  RngStream rng(2);
  auto bern = make_family("bernoulli");
  Vec p1(1), p2(1);
  p1 << 0.3;
  p2 << 0.8;
  std::vector<Vec> th(4, p1), et(4, p2);
  PanelData p = gen_family_panel(*bern, th, et, 0.5, 200, rng);
  auto est = estimate_lse(p, TrimWindow(0.1));
  auto fitted = refit_params(p, est, bern);
  auto prefix = build_prefix(p);
  auto st = segment_stats(prefix, est.b_index);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(fitted.theta[k][0] == doctest::Approx(st.mu1[k]));
    auto mv = bern->mean_variance(fitted.theta[k]);
    CHECK(mv.second == doctest::Approx(st.mu1[k] * (1.0 - st.mu1[k])));
  }
}

TEST_CASE("refit: poisson MLE mode keeps the segment score roots") {
  RngStream rng(3);
  auto pois = make_family("poisson");
  Vec l1(1), l2(1);
  l1 << 2.0;
  l2 << 5.0;
  std::vector<Vec> th(3, l1), et(3, l2);
  PanelData p = gen_family_panel(*pois, th, et, 0.5, 300, rng);
  auto est = estimate_mle(p, *pois, TrimWindow(0.1));
  auto fitted = refit_params(p, est, pois);
  for (std::size_t k = 0; k < 3; ++k) {
    double s = 0.0;
    for (std::size_t t = 0; t < est.b_index; ++t) s += p.x(k, t);
    CHECK(fitted.theta[k][0] ==
          doctest::Approx(s / static_cast<double>(est.b_index)));
  }
}

TEST_CASE("h-tilde degenerates when the fitted variance collapses") {
  // noiseless panel: fitted variances hit the 1e-12 floor, every synthetic
  // draw reproduces the break exactly
  PanelData p(2, 40);
  for (std::size_t k = 0; k < 2; ++k)
    for (std::size_t t = 16; t < 40; ++t) p.x(k, t) = 3.0;
  auto est = estimate_lse(p, TrimWindow(0.1));
  auto range = validate_panel(p, TrimWindow(0.1));
  auto fitted = refit_params(p, est);
  RngStream rng(4);
  for (int r = 0; r < 25; ++r) {
    RngStream rr = rng.substream(r);
    CHECK(draw_h_tilde(fitted, p, est.b_index, range, rr) == 0);
  }
}

TEST_CASE("h-tilde symmetry under a symmetric homoskedastic fit") {
  // weak fitted signal so the resampling law has a negligible atom at 0
  const std::size_t m = 10, n = 400;
  PanelData dummy(m, n);
  FittedLaws fitted;
  fitted.criterion = Method::LSE;
  fitted.mu1.assign(m, 0.0);
  fitted.mu2.assign(m, 0.1);
  fitted.s1sq.assign(m, 1.0);
  fitted.s2sq.assign(m, 1.0);
  fitted.gaussian_surrogate = true;
  fitted.degenerate.assign(m, false);
  AdmissibleRange range{40, 360};
  RngStream master(5);
  int pos = 0;
  const int reps = 2500;
  for (int r = 0; r < reps; ++r) {
    RngStream rng = master.substream(r);
    long long h = draw_h_tilde(fitted, dummy, 200, range, rng);
    if (h > 0) ++pos;
  }
  double phat = static_cast<double>(pos) / reps;
  CHECK(std::abs(phat - 0.5) < 0.03);
}

TEST_CASE("h-tilde equals the naive criterion argmax on a tiny panel") {
  const std::size_t n = 12;
  PanelData source(1, n);
  FittedLaws fitted;
  fitted.criterion = Method::LSE;
  fitted.mu1 = {0.0};
  fitted.mu2 = {1.0};
  fitted.s1sq = {1.0};
  fitted.s2sq = {1.0};
  fitted.gaussian_surrogate = true;
  fitted.degenerate = {false};
  AdmissibleRange range{2, 10};
  const std::size_t b_hat = 6;

  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    RngStream r1(seed), r2(seed);
    PanelData synth = synth_panel(fitted, source, b_hat, r1);
    // naive scan over every admissible b with the fixed plug-ins
    double best = -1e300;
    long long best_h = 0;
    for (std::size_t b = range.lo; b <= range.hi; ++b) {
      double acc = 0.0;
      for (std::size_t t = 0; t < b; ++t) {
        double r = synth.x(0, t) - 0.0;
        acc -= r * r;
      }
      for (std::size_t t = b; t < n; ++t) {
        double r = synth.x(0, t) - 1.0;
        acc -= r * r;
      }
      acc /= static_cast<double>(n);
      long long h = static_cast<long long>(b) - static_cast<long long>(b_hat);
      if (acc > best || (acc == best && std::llabs(h) < std::llabs(best_h))) {
        best = acc;
        best_h = h;
      }
    }
    CHECK(draw_h_tilde(fitted, source, b_hat, range, r2) == best_h);
  }
}

TEST_CASE("dependent sampler with band 0 equals the independent procedure") {
  // equal fitted means and variances on both segments make the two
  // resampling laws identical by construction
  PanelData p = step_panel(5, 300, 0.8, 1.0, 0.5, 6);
  auto est = estimate_lse(p, TrimWindow(0.1));
  auto range = validate_panel(p, TrimWindow(0.1));

  DependentHTildeSampler band0(p, est, 0);
  auto c = autocov_estimates(p, est, 0);
  FittedLaws fitted;
  fitted.criterion = Method::LSE;
  fitted.gaussian_surrogate = true;
  fitted.degenerate.assign(5, false);
  for (std::size_t k = 0; k < 5; ++k) {
    fitted.mu1.push_back(est.segment_params.theta[k][0]);
    fitted.mu2.push_back(est.segment_params.eta[k][0]);
    fitted.s1sq.push_back(c[k][0]);
    fitted.s2sq.push_back(c[k][0]);
  }

  const int reps = 800;
  std::vector<double> a(reps), b(reps);
  RngStream ma(7), mb(8);
  for (int r = 0; r < reps; ++r) {
    RngStream r1 = ma.substream(r);
    a[r] = static_cast<double>(band0.draw(range, r1));
    RngStream r2 = mb.substream(r);
    b[r] = static_cast<double>(draw_h_tilde(fitted, p, est.b_index, range, r2));
  }
  CHECK(ks_statistic(a, b) < ks_critical(0.05, reps, reps));
}

TEST_CASE("identity of laws: resampling at the truth matches fresh estimation") {
  const std::size_t m = 20, n = 400;
  const double shift = 0.3, tau = 0.5;
  const std::size_t b0 = 200;
  std::vector<double> mu1(m, 0.0), mu2(m, shift);
  NoiseSpec noise;
  AdmissibleRange range{40, 360};

  FittedLaws truth;
  truth.criterion = Method::LSE;
  truth.mu1 = mu1;
  truth.mu2 = mu2;
  truth.s1sq.assign(m, 1.0);
  truth.s2sq.assign(m, 1.0);
  truth.gaussian_surrogate = true;
  truth.degenerate.assign(m, false);
  PanelData dummy(m, n);

  const int reps = 1200;
  std::vector<double> h_tilde(reps), h_fresh(reps);
  RngStream ma(9), mb(10);
  for (int r = 0; r < reps; ++r) {
    RngStream r1 = ma.substream(r);
    h_tilde[r] = static_cast<double>(draw_h_tilde(truth, dummy, b0, range, r1));
    RngStream r2 = mb.substream(r);
    PanelData fresh = gen_panel(mu1, mu2, tau, noise, n, r2);
    auto est = estimate_lse(fresh, TrimWindow(0.1));
    h_fresh[r] = static_cast<double>(est.b_index) - static_cast<double>(b0);
  }
  CHECK(ks_statistic(h_tilde, h_fresh) < ks_critical(0.01, reps, reps));
}

TEST_CASE("adaptive CI: strong signal collapses to the point estimate") {
  for (std::uint64_t s = 1; s <= 6; ++s) {
    PanelData p = step_panel(40, 300, 2.0, 1.0, 0.5, s);
    AdaptiveConfig cfg;
    cfg.replicates = 120;
    cfg.seed = 100 + s;
    AdaptiveResult r = adaptive_ci(p, cfg);
    CHECK(r.ci_index_lo == r.ci_index_hi);
    CHECK(r.ci_index_lo == static_cast<long long>(r.b_index));
    CHECK(r.q_lo == 0.0);
    CHECK(r.q_hi == 0.0);
  }
}

TEST_CASE("adaptive CI determinism and level monotonicity") {
  PanelData p = step_panel(12, 200, 0.25, 1.0, 0.5, 77);
  AdaptiveConfig cfg;
  cfg.replicates = 200;
  cfg.seed = 42;
  AdaptiveResult a = adaptive_ci(p, cfg);
  AdaptiveResult b = adaptive_ci(p, cfg);
  CHECK(a.h_draws == b.h_draws);
  CHECK(a.ci_index_lo == b.ci_index_lo);
  CHECK(a.ci_index_hi == b.ci_index_hi);

  AdaptiveConfig wide = cfg;
  wide.level = 0.05;
  AdaptiveResult w = adaptive_ci(p, wide);
  CHECK(w.h_draws == a.h_draws);  // same seed, same draw set
  CHECK(w.ci_index_lo <= a.ci_index_lo);
  CHECK(w.ci_index_hi >= a.ci_index_hi);

  auto range = validate_panel(p, TrimWindow(cfg.c_star));
  CHECK(a.q_lo <= a.q_hi);
  CHECK(a.ci_index_lo >= static_cast<long long>(range.lo));
  CHECK(a.ci_index_hi <= static_cast<long long>(range.hi));
  CHECK(a.snr3_diagnostic > 0.0);
}

TEST_CASE("probit MLE-mode interval resamples the observed design") {
  auto probit = make_family("probit");
  RngStream rng(41);
  Vec b0(1), b1(1);
  b0 << 0.0;
  b1 << 1.3;
  std::vector<Vec> th(8, b0), et(8, b1);
  PanelData p = gen_family_panel(*probit, th, et, 0.5, 160, rng);
  AdaptiveConfig cfg;
  cfg.replicates = 120;
  cfg.method = AdaptiveMethod::MLE;
  cfg.seed = 5;
  AdaptiveResult a = adaptive_ci(p, cfg, probit);
  AdaptiveResult b = adaptive_ci(p, cfg, probit);
  CHECK(a.h_draws == b.h_draws);
  CHECK(std::abs(static_cast<double>(a.b_index) - 80.0) <= 12);
  CHECK(a.ci_index_lo <= static_cast<long long>(a.b_index));
  CHECK(a.ci_index_hi >= static_cast<long long>(a.b_index));
}

TEST_CASE("config validation") {
  PanelData p = step_panel(3, 60, 1.0, 1.0, 0.5, 1);
  AdaptiveConfig cfg;
  cfg.replicates = 10;
  CHECK_THROWS_AS(adaptive_ci(p, cfg), ConfigError);
  cfg.replicates = 100;
  cfg.level = 1.5;
  CHECK_THROWS_AS(adaptive_ci(p, cfg), ConfigError);
  cfg.level = 0.1;
  cfg.method = AdaptiveMethod::MLE;
  CHECK_THROWS_AS(adaptive_ci(p, cfg), ConfigError);  // family missing
  cfg.method = AdaptiveMethod::LSE_DEPENDENT_GAUSSIAN;
  cfg.max_lag = 50;
  CHECK_THROWS_AS(adaptive_ci(p, cfg), ConfigError);  // lag too large
}
