#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "panelbreak/noise.hpp"
#include "panelbreak/stats.hpp"

using namespace panelbreak;

namespace {

double lag_autocov(const std::vector<double>& y, std::size_t lag) {
  double mu = mean(y);
  double acc = 0.0;
  for (std::size_t t = 0; t + lag < y.size(); ++t)
    acc += (y[t] - mu) * (y[t + lag] - mu);
  return acc / static_cast<double>(y.size() - lag);
}

// empirical standard error of a lag autocovariance estimate
double lag_autocov_se(const std::vector<double>& y, std::size_t lag) {
  double mu = mean(y);
  std::vector<double> prod;
  prod.reserve(y.size());
  for (std::size_t t = 0; t + lag < y.size(); ++t)
    prod.push_back((y[t] - mu) * (y[t + lag] - mu));
  return std::sqrt(variance(prod) / static_cast<double>(prod.size()));
}

}  // namespace

TEST_CASE("linear coefficient truncation") {
  auto geo = SeqSpec::geometric(1.0, 0.5);
  auto t = truncate_linear(geo, 1e-6);
  CHECK(t.lag == 20);
  CHECK(t.a.size() == 21);
  // direct tail-sum oracle: the kept truncation is the smallest valid one
  double tail = 0.0;
  for (std::size_t j = t.lag + 1; j < 200; ++j) tail += std::pow(0.5, j);
  CHECK(tail < 1e-6);
  double tail_prev = tail + std::pow(0.5, t.lag);
  CHECK(tail_prev >= 1e-6);

  auto lit = SeqSpec::from_literal({1.0, 0.0, 0.0});
  CHECK(truncate_linear(lit, 1e-6).lag == 0);

  auto poly = SeqSpec::polynomial(1.0, 2.0);
  auto tp = truncate_linear(poly, 1e-3);
  CHECK(tp.lag > 500);
  CHECK(tp.lag < 2000);
  double ptail = 0.0;
  for (std::size_t j = tp.lag + 1; j < tp.lag + 4000000; ++j)
    ptail += 1.0 / ((1.0 + j) * (1.0 + j));
  CHECK(ptail < 1e-3);

  CHECK_THROWS_AS(truncate_linear(geo, -1.0), ConfigError);
}

TEST_CASE("iid noise is white") {
  RngStream rng(101);
  std::vector<double> mu1{0.0}, mu2{0.0};
  NoiseSpec spec;
  const std::size_t n = 20000;
  PanelData p = gen_panel(mu1, mu2, 0.5, spec, n, rng);
  std::vector<double> y(p.values.begin(), p.values.end());
  CHECK(std::abs(lag_autocov(y, 1)) < 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("nonlinear MA is 3-dependent white noise with variance 2") {
  RngStream rng(102);
  std::vector<double> mu1{0.0}, mu2{0.0};
  NoiseSpec spec;
  spec.kind = NoiseKind::NonlinearMA;
  const std::size_t n = 100000;
  PanelData p = gen_panel(mu1, mu2, 0.5, spec, n, rng);
  std::vector<double> y(p.values.begin(), p.values.end());
  double c1 = lag_autocov(y, 1);
  CHECK(std::abs(c1) < 3.0 * lag_autocov_se(y, 1));
  double v = lag_autocov(y, 0);
  CHECK(std::abs(v - 2.0) < 3.0 * lag_autocov_se(y, 0));
}

TEST_CASE("gaussian process kernels are honored") {
  std::vector<double> mu1{0.0}, mu2{0.0};

  // circulant-embedding path (n > 4096)
  {
    RngStream rng(103);
    NoiseSpec spec;
    spec.kind = NoiseKind::GaussianProcess;
    spec.kernel = SeqSpec::geometric(1.0, 0.5);
    const std::size_t n = 100000;
    PanelData p = gen_panel(mu1, mu2, 0.5, spec, n, rng);
    std::vector<double> y(p.values.begin(), p.values.end());
    CHECK(std::abs(lag_autocov(y, 1) - 0.5) < 0.05);
    CHECK(std::abs(lag_autocov(y, 0) - 1.0) < 0.05);
  }

  // banded Cholesky path (n <= 4096), lags 0..5 against the kernel
  {
    RngStream rng(104);
    NoiseSpec spec;
    spec.kind = NoiseKind::GaussianProcess;
    spec.kernel = SeqSpec::geometric(2.0, 0.6);
    const std::size_t n = 4000;
    const std::size_t m = 30;
    std::vector<double> z1(m, 0.0), z2(m, 0.0);
    PanelData p = gen_panel(z1, z2, 0.5, spec, n, rng);
    for (std::size_t lag = 0; lag <= 5; ++lag) {
      // across-series spread is an honest se for the pooled estimate even
      // under serial dependence
      std::vector<double> per_series(m);
      for (std::size_t k = 0; k < m; ++k) {
        std::vector<double> y(p.values.begin() + k * n,
                              p.values.begin() + (k + 1) * n);
        per_series[k] = lag_autocov(y, lag);
      }
      double acc = mean(per_series);
      double se = std::sqrt(variance(per_series) / static_cast<double>(m));
      CHECK(std::abs(acc - spec.kernel.at(lag)) < 3.0 * se);
    }
  }
}

TEST_CASE("non positive definite kernel is rejected") {
  NoiseSpec spec;
  spec.kind = NoiseKind::GaussianProcess;
  spec.kernel = SeqSpec::from_literal({1.0, 0.9});  // tridiagonal, eigenvalue < 0
  std::vector<double> mu{0.0};
  RngStream rng(105);
  CHECK_THROWS_AS(gen_panel(mu, mu, 0.5, spec, 512, rng), KernelNotPDError);
}

TEST_CASE("seed determinism and mean shifts") {
  std::vector<double> mu1{0.0, 1.0}, mu2{0.5, -1.0};
  NoiseSpec spec;
  spec.kind = NoiseKind::LinearProcess;
  spec.coeffs = SeqSpec::geometric(1.0, 0.4);

  RngStream a(42), b(42);
  PanelData p1 = gen_panel(mu1, mu2, 0.3, spec, 500, a);
  PanelData p2 = gen_panel(mu1, mu2, 0.3, spec, 500, b);
  CHECK(p1.values == p2.values);  // bit-for-bit

  RngStream c(43);
  const std::size_t n = 100000;
  PanelData big = gen_panel(mu1, mu2, 0.3, spec, n, c);
  auto b0 = static_cast<std::size_t>(std::floor(0.3 * n));
  for (std::size_t k = 0; k < 2; ++k) {
    std::vector<double> pre(big.values.begin() + k * n,
                            big.values.begin() + k * n + b0);
    std::vector<double> post(big.values.begin() + k * n + b0,
                             big.values.begin() + (k + 1) * n);
    double se_pre = 3.0 * std::sqrt(variance(pre) / pre.size());
    double se_post = 3.0 * std::sqrt(variance(post) / post.size());
    // serial correlation inflates the naive se; triple it for slack
    CHECK(std::abs(mean(pre) - mu1[k]) < 3.0 * se_pre);
    CHECK(std::abs(mean(post) - mu2[k]) < 3.0 * se_post);
  }
}

TEST_CASE("family panels switch parameters at the break") {
  auto family = make_family("poisson");
  RngStream rng(7);
  Vec lo(1), hi(1);
  lo << 1.0;
  hi << 6.0;
  std::vector<Vec> th(3, lo), et(3, hi);
  PanelData p = gen_family_panel(*family, th, et, 0.5, 2000, rng);
  for (std::size_t k = 0; k < 3; ++k) {
    std::vector<double> pre(p.values.begin() + k * 2000,
                            p.values.begin() + k * 2000 + 1000);
    std::vector<double> post(p.values.begin() + k * 2000 + 1000,
                             p.values.begin() + (k + 1) * 2000);
    CHECK(std::abs(mean(pre) - 1.0) < 0.15);
    CHECK(std::abs(mean(post) - 6.0) < 0.35);
  }
}
