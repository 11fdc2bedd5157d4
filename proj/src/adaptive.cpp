#include "panelbreak/adaptive.hpp"

#include <algorithm>
#include <cmath>

#include "panelbreak/stats.hpp"

namespace panelbreak {

namespace {

constexpr double kVarianceFloor = 1e-12;

// Shifted-criterion scan with frozen plug-ins. Returns the argmax over
// h = b - b_hat for admissible b, O(m n) total via incremental updates.
long long scan_h(const PanelData& synth, const FittedLaws& fitted,
                 std::size_t b_hat, const AdmissibleRange& range) {
  const std::size_t m = synth.m, n = synth.n;
  const bool mle = fitted.criterion == Method::MLE;

  auto pre_term = [&](std::size_t k, std::size_t t) {
    double x = synth.x(k, t);
    if (mle)
      return fitted.family->log_density(
          fitted.theta[k], x,
          synth.has_covariates() ? synth.cov(k, t) : std::span<const double>{});
    double r = x - fitted.mu1[k];
    return -r * r;
  };
  auto post_term = [&](std::size_t k, std::size_t t) {
    double x = synth.x(k, t);
    if (mle)
      return fitted.family->log_density(
          fitted.eta[k], x,
          synth.has_covariates() ? synth.cov(k, t) : std::span<const double>{});
    double r = x - fitted.mu2[k];
    return -r * r;
  };

  // criterion at the left edge of the window
  double value = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t t = 0; t < range.lo; ++t) value += pre_term(k, t);
    for (std::size_t t = range.lo; t < n; ++t) value += post_term(k, t);
  }
  value /= static_cast<double>(n);

  double best_v = value;
  long long best_h = static_cast<long long>(range.lo) - static_cast<long long>(b_hat);
  auto consider = [&](double v, long long h) {
    if (v > best_v) {
      best_v = v;
      best_h = h;
      return;
    }
    if (v == best_v) {
      long long ah = std::llabs(h), ab = std::llabs(best_h);
      if (ah < ab || (ah == ab && h < best_h)) best_h = h;
    }
  };

  for (std::size_t b = range.lo + 1; b <= range.hi; ++b) {
    std::size_t t = b - 1;  // observation switching from post to pre
    double delta = 0.0;
    for (std::size_t k = 0; k < m; ++k) delta += pre_term(k, t) - post_term(k, t);
    value += delta / static_cast<double>(n);
    consider(value, static_cast<long long>(b) - static_cast<long long>(b_hat));
  }
  return best_h;
}

}  // namespace

FittedLaws refit_params(const PanelData& panel, const BreakEstimate& est,
                        FamilyPtr family) {
  FittedLaws f;
  f.degenerate.assign(panel.m, false);

  if (est.method == Method::MLE) {
    if (!family)
      throw ConfigError("refit_params: MLE mode requires the model family");
    f.criterion = Method::MLE;
    f.family = family;
    f.theta.resize(panel.m);
    f.eta.resize(panel.m);
    for (std::size_t k = 0; k < panel.m; ++k) {
      const auto& tv = est.segment_params.theta[k];
      const auto& ev = est.segment_params.eta[k];
      f.theta[k] = Eigen::Map<const Vec>(tv.data(), static_cast<Eigen::Index>(tv.size()));
      f.eta[k] = Eigen::Map<const Vec>(ev.data(), static_cast<Eigen::Index>(ev.size()));
      f.degenerate[k] = est.segment_params.theta_degenerate[k] ||
                        est.segment_params.eta_degenerate[k];
    }
    return f;
  }

  f.criterion = Method::LSE;
  f.mu1.resize(panel.m);
  f.mu2.resize(panel.m);
  f.s1sq.resize(panel.m);
  f.s2sq.resize(panel.m);
  for (std::size_t k = 0; k < panel.m; ++k) {
    f.mu1[k] = est.segment_params.theta[k][0];
    f.s1sq[k] = std::max(est.segment_params.theta[k][1], kVarianceFloor);
    f.mu2[k] = est.segment_params.eta[k][0];
    f.s2sq[k] = std::max(est.segment_params.eta[k][1], kVarianceFloor);
  }

  if (family) {
    // linked parameters theta = h(mu, sigma^2) where the family declares one
    f.theta.resize(panel.m);
    f.eta.resize(panel.m);
    bool linked = true;
    for (std::size_t k = 0; k < panel.m && linked; ++k) {
      auto pre = family->params_from_moments(f.mu1[k], f.s1sq[k]);
      auto post = family->params_from_moments(f.mu2[k], f.s2sq[k]);
      if (!pre || !post) {
        linked = false;
        break;
      }
      f.theta[k] = pre->param;
      f.eta[k] = post->param;
      f.degenerate[k] = pre->degenerate || post->degenerate;
    }
    if (linked) {
      f.family = family;
      return f;
    }
    f.theta.clear();
    f.eta.clear();
  }
  f.gaussian_surrogate = true;
  return f;
}

PanelData synth_panel(const FittedLaws& fitted, const PanelData& source,
                      std::size_t b_hat, RngStream& rng) {
  PanelData out(source.m, source.n);
  const bool covs = fitted.family && fitted.family->uses_covariates();
  if (covs) {
    out.d = source.d;
    out.covariates.assign(source.m * source.n * source.d, 0.0);
  }
  for (std::size_t k = 0; k < source.m; ++k) {
    RngStream rk = rng.substream(k);
    for (std::size_t t = 0; t < source.n; ++t) {
      std::span<const double> cv{};
      if (covs) {
        // resample the observed design with replacement
        auto pick = static_cast<std::size_t>(rk.uniform() * static_cast<double>(source.n));
        if (pick >= source.n) pick = source.n - 1;
        auto src = source.cov(k, pick);
        double* dst = out.covariates.data() + (k * source.n + t) * out.d;
        std::copy(src.begin(), src.end(), dst);
        cv = {dst, out.d};
      }
      bool pre = t < b_hat;
      if (fitted.family) {
        out.x(k, t) =
            fitted.family->sample(pre ? fitted.theta[k] : fitted.eta[k], cv, rk);
      } else {
        out.x(k, t) = pre ? rk.normal(fitted.mu1[k], std::sqrt(fitted.s1sq[k]))
                          : rk.normal(fitted.mu2[k], std::sqrt(fitted.s2sq[k]));
      }
    }
  }
  return out;
}

long long draw_h_tilde(const FittedLaws& fitted, const PanelData& source,
                       std::size_t b_hat, const AdmissibleRange& range,
                       RngStream& rng) {
  PanelData synth = synth_panel(fitted, source, b_hat, rng);
  return scan_h(synth, fitted, b_hat, range);
}

DependentHTildeSampler::DependentHTildeSampler(const PanelData& panel,
                                               const BreakEstimate& est,
                                               std::size_t max_lag)
    : m_(panel.m), n_(panel.n), b_hat_(est.b_index), band_(max_lag) {
  auto c = autocov_estimates(panel, est, max_lag);
  mu1_.resize(m_);
  mu2_.resize(m_);
  for (std::size_t k = 0; k < m_; ++k) {
    mu1_[k] = est.segment_params.theta[k][0];
    mu2_[k] = est.segment_params.eta[k][0];
  }

  chol_.assign(m_, {});
  dense_.assign(m_, {});
  const std::size_t w = band_ + 1;
  for (std::size_t k = 0; k < m_; ++k) {
    // fast path: banded Cholesky of the banded Toeplitz matrix
    std::vector<double>& L = chol_[k];
    L.assign(n_ * w, 0.0);
    bool ok = true;
    for (std::size_t i = 0; i < n_ && ok; ++i) {
      std::size_t jlo = i > band_ ? i - band_ : 0;
      for (std::size_t j = jlo; j <= i; ++j) {
        std::size_t lag = i - j;
        double s = c[k][lag];
        std::size_t klo = std::max(jlo, j > band_ ? j - band_ : 0);
        for (std::size_t kk = klo; kk < j; ++kk)
          s -= L[i * w + (i - kk)] * L[j * w + (j - kk)];
        if (j < i) {
          L[i * w + lag] = s / L[j * w];
        } else if (s > kVarianceFloor) {
          L[i * w] = std::sqrt(s);
        } else {
          ok = false;
          break;
        }
      }
    }
    if (ok) continue;

    // hard truncation can break positive definiteness: floor the
    // eigenvalues of the full matrix at 1e-12 and keep a dense factor
    L.clear();
    Mat full = Mat::Zero(n_, n_);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i > band_ ? i - band_ : 0; j <= std::min(i + band_, n_ - 1); ++j)
        full(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            c[k][i > j ? i - j : j - i];
    Eigen::SelfAdjointEigenSolver<Mat> es(full);
    if (es.info() != Eigen::Success)
      throw CovNotPSDError("autocovariance eigendecomposition failed (series " +
                           std::to_string(k) + ")");
    Vec lam = es.eigenvalues();
    for (Eigen::Index i = 0; i < lam.size(); ++i)
      lam[i] = std::max(lam[i], kVarianceFloor);
    dense_[k] = es.eigenvectors() * lam.cwiseSqrt().asDiagonal();
  }
}

long long DependentHTildeSampler::draw(const AdmissibleRange& range,
                                       RngStream& rng) const {
  PanelData synth(m_, n_);
  const std::size_t w = band_ + 1;
  Vec z(static_cast<Eigen::Index>(n_));
  for (std::size_t k = 0; k < m_; ++k) {
    RngStream rk = rng.substream(k);
    for (std::size_t t = 0; t < n_; ++t) z[static_cast<Eigen::Index>(t)] = rk.normal();
    if (!dense_[k].size()) {
      const std::vector<double>& L = chol_[k];
      for (std::size_t i = 0; i < n_; ++i) {
        double s = 0.0;
        std::size_t jlo = i > band_ ? i - band_ : 0;
        for (std::size_t j = jlo; j <= i; ++j)
          s += L[i * w + (i - j)] * z[static_cast<Eigen::Index>(j)];
        synth.x(k, i) = s + (i < b_hat_ ? mu1_[k] : mu2_[k]);
      }
    } else {
      Vec y = dense_[k] * z;
      for (std::size_t i = 0; i < n_; ++i)
        synth.x(k, i) = y[static_cast<Eigen::Index>(i)] +
                        (i < b_hat_ ? mu1_[k] : mu2_[k]);
    }
  }
  FittedLaws plug;
  plug.criterion = Method::LSE;
  plug.mu1 = mu1_;
  plug.mu2 = mu2_;
  return scan_h(synth, plug, b_hat_, range);
}

long long draw_h_tilde_dependent(const PanelData& panel, const BreakEstimate& est,
                                 std::size_t max_lag, const AdmissibleRange& range,
                                 RngStream& rng) {
  DependentHTildeSampler sampler(panel, est, max_lag);
  return sampler.draw(range, rng);
}

AdaptiveResult adaptive_ci(const PanelData& panel, const AdaptiveConfig& config,
                           FamilyPtr family) {
  if (config.replicates < 100)
    throw ConfigError("adaptive CI needs at least 100 replicates");
  if (!(config.level > 0.0 && config.level < 1.0))
    throw ConfigError("adaptive CI level must lie in (0, 1)");
  TrimWindow window(config.c_star);
  AdmissibleRange range = validate_panel(panel, window);
  if (config.method == AdaptiveMethod::LSE_DEPENDENT_GAUSSIAN &&
      config.max_lag + 1 >= range.lo)
    throw ConfigError("max_lag must satisfy L < n c* - 1");

  RngStream master(config.seed);
  AdaptiveResult res;
  res.level = config.level;
  res.seed = config.seed;
  res.replicates = config.replicates;

  BreakEstimate est;
  if (config.method == AdaptiveMethod::MLE) {
    if (!family) throw ConfigError("MLE adaptive CI requires a model family");
    est = estimate_mle(panel, *family, window);
  } else {
    est = estimate_lse(panel, window);
  }
  res.tau_hat = est.tau_hat;
  res.b_index = est.b_index;

  res.h_draws.resize(config.replicates);
  if (config.method == AdaptiveMethod::LSE_DEPENDENT_GAUSSIAN) {
    DependentHTildeSampler sampler(panel, est, config.max_lag);
    for (std::size_t r = 0; r < config.replicates; ++r) {
      RngStream rr = master.substream(r);
      res.h_draws[r] = sampler.draw(range, rr);
    }
  } else {
    FittedLaws fitted = refit_params(panel, est, family);
    res.gaussian_surrogate = fitted.gaussian_surrogate;
    for (bool d : fitted.degenerate)
      if (d) ++res.degenerate_series;
    for (std::size_t r = 0; r < config.replicates; ++r) {
      RngStream rr = master.substream(r);
      res.h_draws[r] = draw_h_tilde(fitted, panel, est.b_index, range, rr);
    }
  }

  std::vector<double> sorted(res.h_draws.begin(), res.h_draws.end());
  std::sort(sorted.begin(), sorted.end());
  res.q_lo = quantile_sorted(sorted, 0.5 * config.level);
  res.q_hi = quantile_sorted(sorted, 1.0 - 0.5 * config.level);

  // pivot inversion: b0 covered iff q_lo <= b_hat - b0 <= q_hi
  double lo_real = static_cast<double>(est.b_index) - res.q_hi;
  double hi_real = static_cast<double>(est.b_index) - res.q_lo;
  auto lo_idx = static_cast<long long>(std::ceil(lo_real - 1e-9));
  auto hi_idx = static_cast<long long>(std::floor(hi_real + 1e-9));
  lo_idx = std::max<long long>(lo_idx, static_cast<long long>(range.lo));
  hi_idx = std::min<long long>(hi_idx, static_cast<long long>(range.hi));
  if (lo_idx > hi_idx)
    lo_idx = hi_idx = static_cast<long long>(est.b_index);
  res.ci_index_lo = lo_idx;
  res.ci_index_hi = hi_idx;
  res.ci_tau_lo = static_cast<double>(lo_idx) / static_cast<double>(panel.n);
  res.ci_tau_hi = static_cast<double>(hi_idx) / static_cast<double>(panel.n);

  long long h_min = static_cast<long long>(range.lo) - static_cast<long long>(est.b_index);
  long long h_max = static_cast<long long>(range.hi) - static_cast<long long>(est.b_index);
  std::size_t at_edge = 0;
  for (long long h : res.h_draws)
    if (h == h_min || h == h_max) ++at_edge;
  res.boundary_fraction =
      static_cast<double>(at_edge) / static_cast<double>(config.replicates);

  // SNR3 plug-in diagnostic (no pass/fail threshold attached)
  double delta2 = 0.0;
  for (std::size_t k = 0; k < panel.m; ++k) {
    double d = est.segment_params.theta[k][0] - est.segment_params.eta[k][0];
    delta2 += d * d;
  }
  double logm = panel.m >= 3 ? std::log(static_cast<double>(panel.m)) : 1.0;
  res.snr3_diagnostic = std::sqrt(static_cast<double>(panel.n)) * delta2 /
                        (static_cast<double>(panel.m) * std::sqrt(logm));
  return res;
}

}  // namespace panelbreak
