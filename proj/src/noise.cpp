#include "panelbreak/noise.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <iostream>

namespace panelbreak {

double SeqSpec::at(std::size_t j) const {
  switch (kind) {
    case Kind::Geometric:
      return scale * std::pow(rate, static_cast<double>(j));
    case Kind::Polynomial:
      return scale / std::pow(1.0 + static_cast<double>(j), rate);
    case Kind::Literal:
      return j < literal.size() ? literal[j] : 0.0;
  }
  return 0.0;
}

SeqSpec SeqSpec::geometric(double scale, double rate) {
  if (!(std::abs(rate) < 1.0))
    throw ConfigError("geometric sequence needs |rate| < 1 for summability");
  SeqSpec s;
  s.kind = Kind::Geometric;
  s.scale = scale;
  s.rate = rate;
  return s;
}

SeqSpec SeqSpec::polynomial(double scale, double rate) {
  if (!(rate > 1.0))
    throw ConfigError("polynomial sequence needs exponent > 1 for summability");
  SeqSpec s;
  s.kind = Kind::Polynomial;
  s.scale = scale;
  s.rate = rate;
  return s;
}

SeqSpec SeqSpec::from_literal(std::vector<double> v) {
  SeqSpec s;
  s.kind = Kind::Literal;
  s.literal = std::move(v);
  return s;
}

namespace {

// Infinite tail sum_{j>J} |a_j|, exact for geometric/literal, summed with an
// integral remainder for polynomial decay.
double tail_abs_sum(const SeqSpec& seq, std::size_t J) {
  switch (seq.kind) {
    case SeqSpec::Kind::Geometric: {
      double r = std::abs(seq.rate);
      return std::abs(seq.scale) * std::pow(r, static_cast<double>(J + 1)) /
             (1.0 - r);
    }
    case SeqSpec::Kind::Literal: {
      double s = 0.0;
      for (std::size_t j = J + 1; j < seq.literal.size(); ++j)
        s += std::abs(seq.literal[j]);
      return s;
    }
    case SeqSpec::Kind::Polynomial: {
      // sum a chunk directly, then bound the rest by the integral
      double s = 0.0;
      std::size_t j = J + 1;
      const std::size_t chunk_end = J + 1 + 100000;
      for (; j < chunk_end; ++j) {
        double v = std::abs(seq.at(j));
        s += v;
        if (v < 1e-18) return s;
      }
      double p = seq.rate;
      s += std::abs(seq.scale) * std::pow(static_cast<double>(j), 1.0 - p) / (p - 1.0);
      return s;
    }
  }
  return 0.0;
}

double centered_innovation(const NoiseSpec& spec, RngStream& rng) {
  if (!spec.innovation) return spec.innovation_sd * rng.normal();
  Vec p = Eigen::Map<const Vec>(spec.innovation_param.data(),
                                static_cast<Eigen::Index>(spec.innovation_param.size()));
  double x = spec.innovation->sample(p, {}, rng);
  return x - spec.innovation->mean_variance(p).first;
}

std::size_t kernel_band(const SeqSpec& kernel, std::size_t n) {
  double g0 = std::abs(kernel.at(0));
  if (!(g0 > 0.0)) throw ConfigError("gaussian process kernel needs g(0) > 0");
  std::size_t band = 0;
  for (std::size_t h = 1; h < n; ++h) {
    if (std::abs(kernel.at(h)) > 1e-14 * g0) band = h;
  }
  return band;
}

// Lower Cholesky factor of the banded Toeplitz matrix T_ij = g(|i-j|) with a
// diagonal jitter; row-major storage L[i*(B+1) + (i-j)].
bool banded_cholesky(const SeqSpec& kernel, std::size_t n, std::size_t band,
                     double jitter, std::vector<double>& L) {
  const std::size_t w = band + 1;
  L.assign(n * w, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t jlo = i > band ? i - band : 0;
    for (std::size_t j = jlo; j <= i; ++j) {
      double s = kernel.at(i - j) + (i == j ? jitter : 0.0);
      std::size_t klo = std::max(jlo, j > band ? j - band : 0);
      for (std::size_t k = klo; k < j; ++k)
        s -= L[i * w + (i - k)] * L[j * w + (j - k)];
      if (j < i) {
        L[i * w + (i - j)] = s / L[j * w];
      } else {
        if (!(s > 1e-300)) return false;
        L[i * w] = std::sqrt(s);
      }
    }
  }
  return true;
}

std::vector<double> sample_gp_cholesky(const SeqSpec& kernel, std::size_t n,
                                       RngStream& rng) {
  std::size_t band = std::min(kernel_band(kernel, n), n - 1);
  std::vector<double> L;
  double g0 = kernel.at(0);
  double jitter = 0.0;
  bool ok = banded_cholesky(kernel, n, band, jitter, L);
  for (int attempt = 0; !ok && attempt < 3; ++attempt) {
    jitter = (jitter == 0.0) ? 1e-12 * g0 : jitter * 100.0;
    std::cerr << "[panelbreak] warning: kernel not positive definite, "
                 "flooring with diagonal jitter "
              << jitter << "\n";
    ok = banded_cholesky(kernel, n, band, jitter, L);
  }
  if (!ok)
    throw KernelNotPDError("Toeplitz kernel factorization failed after flooring");

  const std::size_t w = band + 1;
  std::vector<double> z(n), y(n);
  for (std::size_t t = 0; t < n; ++t) z[t] = rng.normal();
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    std::size_t jlo = i > band ? i - band : 0;
    for (std::size_t j = jlo; j <= i; ++j) s += L[i * w + (i - j)] * z[j];
    y[i] = s;
  }
  return y;
}

std::vector<double> sample_gp_circulant(const SeqSpec& kernel, std::size_t n,
                                        RngStream& rng) {
  std::size_t band = kernel_band(kernel, n);
  std::size_t M = 1;
  while (M < 2 * (n - 1) || M < 2 * (band + 1)) M <<= 1;

  std::vector<double> row(M, 0.0);
  for (std::size_t j = 0; j <= M / 2; ++j) {
    double v = j <= band ? kernel.at(j) : 0.0;
    row[j] = v;
    if (j > 0 && j < M / 2) row[M - j] = v;
  }

  std::vector<std::complex<double>> buf(M), out(M);
  for (std::size_t j = 0; j < M; ++j) buf[j] = {row[j], 0.0};
  fftw_plan plan = fftw_plan_dft_1d(
      static_cast<int>(M), reinterpret_cast<fftw_complex*>(buf.data()),
      reinterpret_cast<fftw_complex*>(out.data()), FFTW_FORWARD, FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);

  double lam_max = 0.0, lam_min = 0.0;
  std::vector<double> lam(M);
  for (std::size_t j = 0; j < M; ++j) {
    lam[j] = out[j].real();
    lam_max = std::max(lam_max, lam[j]);
    lam_min = std::min(lam_min, lam[j]);
  }
  if (lam_min < -1e-8 * lam_max)
    std::cerr << "[panelbreak] warning: circulant embedding has negative "
                 "eigenvalues (min "
              << lam_min << "), flooring at 1e-12\n";
  for (std::size_t j = 0; j < M; ++j) lam[j] = std::max(lam[j], 1e-12);

  // Dietrich-Newsam: e = FFT(a) with a_j = sqrt(lam_j / M) (u_j + i v_j);
  // the real part of e has the circulant covariance.
  for (std::size_t j = 0; j < M; ++j) {
    double s = std::sqrt(lam[j] / static_cast<double>(M));
    buf[j] = {s * rng.normal(), s * rng.normal()};
  }
  fftw_plan plan2 = fftw_plan_dft_1d(
      static_cast<int>(M), reinterpret_cast<fftw_complex*>(buf.data()),
      reinterpret_cast<fftw_complex*>(out.data()), FFTW_FORWARD, FFTW_ESTIMATE);
  fftw_execute(plan2);
  fftw_destroy_plan(plan2);

  std::vector<double> y(n);
  for (std::size_t t = 0; t < n; ++t) y[t] = out[t].real();
  return y;
}

}  // namespace

TruncatedCoeffs truncate_linear(const SeqSpec& coeffs, double tol) {
  if (!(tol > 0.0)) throw ConfigError("truncation tolerance must be positive");
  const std::size_t cap = 1000000;
  for (std::size_t J = 0; J <= cap; ++J) {
    if (tail_abs_sum(coeffs, J) < tol) {
      TruncatedCoeffs t;
      t.lag = J;
      t.a.resize(J + 1);
      for (std::size_t j = 0; j <= J; ++j) t.a[j] = coeffs.at(j);
      return t;
    }
  }
  throw TailNotSummableError(
      "coefficient tail did not reach tolerance within 1e6 lags");
}

std::vector<double> sample_gaussian_process(const SeqSpec& kernel, std::size_t n,
                                            RngStream& rng) {
  if (n <= 4096) return sample_gp_cholesky(kernel, n, rng);
  return sample_gp_circulant(kernel, n, rng);
}

PanelData gen_panel(const std::vector<double>& mu1, const std::vector<double>& mu2,
                    double tau, const NoiseSpec& noise, std::size_t n,
                    RngStream& rng) {
  const std::size_t m = mu1.size();
  if (mu2.size() != m) throw ConfigError("mu1 and mu2 must have equal length");
  auto b0 = static_cast<std::size_t>(std::floor(static_cast<double>(n) * tau));
  if (b0 < 1 || b0 >= n)
    throw ConfigError("break fraction tau puts the break outside (0, n)");

  PanelData panel(m, n);
  TruncatedCoeffs tc;
  if (noise.kind == NoiseKind::LinearProcess)
    tc = truncate_linear(noise.coeffs, noise.trunc_tol);

  for (std::size_t k = 0; k < m; ++k) {
    RngStream rk = rng.substream(k);
    std::vector<double> y(n, 0.0);
    switch (noise.kind) {
      case NoiseKind::IID: {
        for (std::size_t t = 0; t < n; ++t) y[t] = centered_innovation(noise, rk);
        break;
      }
      case NoiseKind::NonlinearMA: {
        // Y_t = e_{t-1} e_{t-2} + e_t, a 3-dependent white noise
        std::vector<double> e(n + 2);
        for (auto& v : e) v = centered_innovation(noise, rk);
        for (std::size_t t = 0; t < n; ++t)
          y[t] = e[t + 1] * e[t] + e[t + 2];
        break;
      }
      case NoiseKind::GaussianProcess: {
        y = sample_gaussian_process(noise.kernel, n, rk);
        break;
      }
      case NoiseKind::LinearProcess: {
        const std::size_t J = tc.lag;
        std::vector<double> e(n + J);
        for (auto& v : e) v = centered_innovation(noise, rk);
        for (std::size_t t = 0; t < n; ++t) {
          double s = 0.0;
          for (std::size_t j = 0; j <= J; ++j) s += tc.a[j] * e[t + J - j];
          y[t] = s;
        }
        break;
      }
    }
    for (std::size_t t = 0; t < n; ++t)
      panel.x(k, t) = (t < b0 ? mu1[k] : mu2[k]) + y[t];
  }
  return panel;
}

PanelData gen_family_panel(const ModelFamily& family,
                           const std::vector<Vec>& theta,
                           const std::vector<Vec>& eta, double tau,
                           std::size_t n, RngStream& rng,
                           const CovariateSpec& covs) {
  const std::size_t m = theta.size();
  if (eta.size() != m) throw ConfigError("theta and eta must have equal length");
  auto b0 = static_cast<std::size_t>(std::floor(static_cast<double>(n) * tau));
  if (b0 < 1 || b0 >= n)
    throw ConfigError("break fraction tau puts the break outside (0, n)");

  PanelData panel(m, n);
  if (family.uses_covariates()) {
    panel.d = covs.dim > 0 ? covs.dim : family.param_dim();
    panel.covariates.assign(m * n * panel.d, 0.0);
  }
  for (std::size_t k = 0; k < m; ++k) {
    RngStream rk = rng.substream(k);
    for (std::size_t t = 0; t < n; ++t) {
      std::span<const double> cv{};
      if (panel.has_covariates()) {
        double* row = panel.covariates.data() + (k * n + t) * panel.d;
        for (std::size_t j = 0; j < panel.d; ++j)
          row[j] = covs.lo + (covs.hi - covs.lo) * rk.uniform();
        cv = {row, panel.d};
      }
      panel.x(k, t) = family.sample(t < b0 ? theta[k] : eta[k], cv, rk);
    }
  }
  return panel;
}

}  // namespace panelbreak
