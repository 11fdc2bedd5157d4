#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "panelbreak/lse.hpp"
#include "panelbreak/mle.hpp"
#include "panelbreak/noise.hpp"
#include "panelbreak/stats.hpp"

using namespace panelbreak;

TEST_CASE("criterion on a perfect-fit break") {
  PanelData p(1, 20);
  for (std::size_t t = 8; t < 20; ++t) p.x(0, t) = 4.0;
  auto prefix = build_prefix(p);
  CHECK(lse_criterion(prefix, 8) == doctest::Approx(0.0));
  for (std::size_t b = 2; b < 18; ++b) {
    if (b == 8) continue;
    CHECK(lse_criterion(prefix, b) < -1e-12);
  }

  PanelData c(2, 16);
  for (auto& v : c.values) v = 3.0;
  auto cp = build_prefix(c);
  double v0 = lse_criterion(cp, 4);
  for (std::size_t b = 2; b <= 13; ++b)
    CHECK(lse_criterion(cp, b) == doctest::Approx(v0));
}

TEST_CASE("criterion equals the naive two-pass recomputation") {
  RngStream rng(314);
  PanelData p = pbtest::random_panel(3, 12, rng);
  auto prefix = build_prefix(p);
  for (std::size_t b = 1; b <= 11; ++b)
    CHECK(pbtest::close_rel(lse_criterion(prefix, b),
                            pbtest::naive_lse_criterion(p, b), 1e-10));
}

TEST_CASE("argmax ties break toward the smallest index") {
  // constant panel: the LSE profile is exactly zero at every b, so every
  // candidate ties (the MLE profile carries ulp noise from the per-split
  // log-constant sums and cannot tie exactly; it uses the same comparison)
  PanelData c(2, 30);
  for (auto& v : c.values) v = 1.5;
  auto est = estimate_lse(c, TrimWindow(0.2));
  auto range = validate_panel(c, TrimWindow(0.2));
  for (double v : est.profile) CHECK(v == 0.0);
  CHECK(est.b_index == range.lo);
}

TEST_CASE("noiseless break is recovered exactly") {
  PanelData p(2, 100);
  for (std::size_t k = 0; k < 2; ++k)
    for (std::size_t t = 30; t < 100; ++t) p.x(k, t) = 1.0 + static_cast<double>(k);
  auto est = estimate_lse(p, TrimWindow(0.1));
  CHECK(est.b_index == 30);
  CHECK(est.tau_hat == doctest::Approx(0.3));
  CHECK(est.profile_at(30) >= est.profile_at(31));
}

TEST_CASE("strong-signal Monte Carlo localization") {
  RngStream master(2718);
  const std::size_t m = 50, n = 200;
  std::vector<double> mu1(m, 0.0), mu2(m, 2.0);
  NoiseSpec noise;
  noise.kind = NoiseKind::IID;
  int exact = 0;
  const int reps = 200;
  for (int r = 0; r < reps; ++r) {
    RngStream rng = master.substream(r);
    PanelData p = gen_panel(mu1, mu2, 0.5, noise, n, rng);
    if (estimate_lse(p, TrimWindow(0.1)).b_index == 100) ++exact;
  }
  CHECK(exact >= static_cast<int>(0.95 * reps));
}

TEST_CASE("sign-flipped shifts give the identical profile") {
  // flipping a centered series (delta_k and its noise together) leaves the
  // criterion unchanged pathwise
  RngStream rng(55);
  const std::size_t m = 6, n = 80;
  std::vector<double> mu1(m, 0.0), mu2(m, 0.7);
  NoiseSpec noise;
  PanelData p = gen_panel(mu1, mu2, 0.4, noise, n, rng);
  auto est = estimate_lse(p, TrimWindow(0.1));

  PanelData flipped = p;
  for (std::size_t k = 0; k < m; k += 2)
    for (std::size_t t = 0; t < n; ++t) flipped.x(k, t) = -flipped.x(k, t);
  auto est2 = estimate_lse(flipped, TrimWindow(0.1));
  CHECK(est2.b_index == est.b_index);
  for (std::size_t i = 0; i < est.profile.size(); ++i)
    CHECK(est2.profile[i] == doctest::Approx(est.profile[i]).epsilon(1e-12));
}

TEST_CASE("location, scale, and permutation invariance") {
  RngStream rng(123);
  PanelData p = pbtest::random_panel(4, 60, rng);
  auto est = estimate_lse(p, TrimWindow(0.1));

  PanelData shifted = p;
  for (std::size_t k = 0; k < 4; ++k)
    for (std::size_t t = 0; t < 60; ++t) shifted.x(k, t) += 3.0 * (k + 1);
  auto est_sh = estimate_lse(shifted, TrimWindow(0.1));
  CHECK(est_sh.b_index == est.b_index);
  for (std::size_t i = 0; i < est.profile.size(); ++i)
    CHECK(est_sh.profile[i] == doctest::Approx(est.profile[i]).epsilon(1e-8));

  PanelData scaled = p;
  for (auto& v : scaled.values) v *= 2.5;
  auto est_sc = estimate_lse(scaled, TrimWindow(0.1));
  CHECK(est_sc.b_index == est.b_index);
  for (std::size_t i = 0; i < est.profile.size(); ++i)
    CHECK(est_sc.profile[i] ==
          doctest::Approx(2.5 * 2.5 * est.profile[i]).epsilon(1e-9));

  PanelData perm(4, 60);
  std::vector<std::size_t> order{2, 0, 3, 1};
  for (std::size_t k = 0; k < 4; ++k)
    for (std::size_t t = 0; t < 60; ++t) perm.x(k, t) = p.x(order[k], t);
  auto est_pm = estimate_lse(perm, TrimWindow(0.1));
  CHECK(est_pm.b_index == est.b_index);
  for (std::size_t i = 0; i < est.profile.size(); ++i)
    CHECK(est_pm.profile[i] == doctest::Approx(est.profile[i]).epsilon(1e-10));
}

TEST_CASE("time reversal maps the noiseless argmax to n - b") {
  PanelData p(1, 50);
  for (std::size_t t = 20; t < 50; ++t) p.x(0, t) = 2.0;
  auto est = estimate_lse(p, TrimWindow(0.1));
  CHECK(est.b_index == 20);

  PanelData rev(1, 50);
  for (std::size_t t = 0; t < 50; ++t) rev.x(0, t) = p.x(0, 49 - t);
  auto est_r = estimate_lse(rev, TrimWindow(0.1));
  CHECK(est_r.b_index == 30);
}

TEST_CASE("gamma plug-in estimates") {
  PanelData dummy(2, 10);
  BreakEstimate est;
  est.b_index = 5;
  est.segment_params.theta = {{1.0, 2.0}, {0.0, 9.0}};  // (mu, s2) per series
  est.segment_params.eta = {{0.0, 1.0}, {0.0, 1.0}};
  auto g = gamma_estimates(dummy, est);
  CHECK(g.delta_norm_sq == doctest::Approx(1.0));
  CHECK(g.gamma_L_sq == doctest::Approx(2.0));
  CHECK(g.gamma_L_star_sq == doctest::Approx(2.0));

  est.segment_params.theta = {{1.0, 1.0}, {1.0, 3.0}};
  est.segment_params.eta = {{0.0, 1.0}, {0.0, 1.0}};
  auto g2 = gamma_estimates(dummy, est);
  CHECK(g2.gamma_L_sq == doctest::Approx(2.0));
  CHECK(g2.c1_sq == doctest::Approx(2.0));

  // homoskedastic panel: both gammas collapse to the common variance
  est.segment_params.theta = {{1.0, 1.7}, {2.0, 1.7}};
  est.segment_params.eta = {{0.0, 1.7}, {0.5, 1.7}};
  auto g3 = gamma_estimates(dummy, est);
  CHECK(g3.gamma_L_sq == doctest::Approx(1.7));
  CHECK(g3.gamma_R_sq == doctest::Approx(1.7));

  est.segment_params.theta = {{1.0, 1.0}, {1.0, 1.0}};
  est.segment_params.eta = {{1.0, 1.0}, {1.0, 1.0}};
  CHECK_THROWS_AS(gamma_estimates(dummy, est), ZeroSignalError);
}

TEST_CASE("pre-break autocovariance estimates") {
  RngStream rng(77);

  // iid normal: lag 0 near 1, lag 1 near 0
  std::vector<double> mu1{0.0}, mu2{0.0};
  NoiseSpec iid;
  PanelData p = gen_panel(mu1, mu2, 0.5, iid, 10000, rng);
  BreakEstimate est;
  est.b_index = 5000;
  est.segment_params.theta = {{0.0, 1.0}};
  est.segment_params.eta = {{0.0, 1.0}};
  auto c = autocov_estimates(p, est, 3);
  CHECK(std::abs(c[0][0] - 1.0) < 0.05);
  CHECK(std::abs(c[0][1]) < 0.05);

  // constant series: all lags zero
  PanelData flat(1, 40);
  for (auto& v : flat.values) v = 2.0;
  BreakEstimate estf;
  estf.b_index = 20;
  estf.segment_params.theta = {{2.0, 0.0}};
  estf.segment_params.eta = {{2.0, 0.0}};
  auto cf = autocov_estimates(flat, estf, 4);
  for (double v : cf[0]) CHECK(v == doctest::Approx(0.0));

  // MA(1) with coefficient 0.5: C0 = 1.25, C1 = 0.5
  NoiseSpec ma;
  ma.kind = NoiseKind::LinearProcess;
  ma.coeffs = SeqSpec::from_literal({1.0, 0.5});
  PanelData q = gen_panel(mu1, mu2, 0.5, ma, 100000, rng);
  BreakEstimate estq;
  estq.b_index = 50000;
  estq.segment_params.theta = {{0.0, 1.25}};
  estq.segment_params.eta = {{0.0, 1.25}};
  auto cq = autocov_estimates(q, estq, 2);
  CHECK(std::abs(cq[0][0] - 1.25) < 0.05);
  CHECK(std::abs(cq[0][1] - 0.5) < 0.05);
  CHECK(std::abs(cq[0][2]) < 0.05);

  CHECK_THROWS_AS(autocov_estimates(flat, estf, 25), LagTooLargeError);
}
