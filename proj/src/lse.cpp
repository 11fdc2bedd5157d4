#include "panelbreak/lse.hpp"

#include <cmath>

namespace panelbreak {

double lse_criterion(const PrefixSums& prefix, std::size_t b_index) {
  const double len1 = static_cast<double>(b_index);
  const double len2 = static_cast<double>(prefix.n - b_index);
  double total = 0.0;
  for (std::size_t k = 0; k < prefix.m; ++k) {
    double s1 = prefix.seg_sum(k, 0, b_index);
    double q1 = prefix.seg_sumsq(k, 0, b_index);
    double s2 = prefix.seg_sum(k, b_index, prefix.n);
    double q2 = prefix.seg_sumsq(k, b_index, prefix.n);
    total += (q1 - s1 * s1 / len1) + (q2 - s2 * s2 / len2);
  }
  return -total / static_cast<double>(prefix.n);
}

BreakEstimate estimate_lse(const PanelData& panel, const TrimWindow& window) {
  AdmissibleRange range = validate_panel(panel, window);
  PrefixSums prefix = build_prefix(panel);

  BreakEstimate est;
  est.method = Method::LSE;
  est.profile_lo = range.lo;
  est.profile.reserve(range.count());

  std::size_t best_b = range.lo;
  double best_v = -std::numeric_limits<double>::infinity();
  for (std::size_t b = range.lo; b <= range.hi; ++b) {
    double v = lse_criterion(prefix, b);
    est.profile.push_back(v);
    if (v > best_v) {  // strict: ties keep the smallest index
      best_v = v;
      best_b = b;
    }
  }
  est.b_index = best_b;
  est.tau_hat = static_cast<double>(best_b) / static_cast<double>(panel.n);

  SegmentStats st = segment_stats(prefix, best_b);
  est.segment_params.theta.resize(panel.m);
  est.segment_params.eta.resize(panel.m);
  est.segment_params.theta_degenerate.assign(panel.m, false);
  est.segment_params.eta_degenerate.assign(panel.m, false);
  for (std::size_t k = 0; k < panel.m; ++k) {
    est.segment_params.theta[k] = {st.mu1[k], st.s1sq[k]};
    est.segment_params.eta[k] = {st.mu2[k], st.s2sq[k]};
  }
  return est;
}

GammaEstimates gamma_estimates(const PanelData& panel, const BreakEstimate& est) {
  if (est.method != Method::LSE)
    throw ConfigError("gamma_estimates expects a least squares estimate");
  GammaEstimates g;
  double num_L = 0.0, num_R = 0.0, denom = 0.0;
  for (std::size_t k = 0; k < panel.m; ++k) {
    double mu1 = est.segment_params.theta[k][0];
    double s1 = est.segment_params.theta[k][1];
    double mu2 = est.segment_params.eta[k][0];
    double s2 = est.segment_params.eta[k][1];
    double d2 = (mu1 - mu2) * (mu1 - mu2);
    denom += d2;
    num_L += d2 * s1;
    num_R += d2 * s2;
  }
  if (denom <= 0.0)
    throw ZeroSignalError("gamma estimates undefined: all segment mean gaps are zero");
  g.delta_norm_sq = denom;
  g.c1_sq = denom;
  g.gamma_L_sq = num_L / denom;
  g.gamma_R_sq = num_R / denom;
  g.gamma_L_star_sq = num_L;
  g.gamma_R_star_sq = num_R;
  return g;
}

std::vector<std::vector<double>> autocov_estimates(const PanelData& panel,
                                                   const BreakEstimate& est,
                                                   std::size_t max_lag) {
  const std::size_t b = est.b_index;
  if (max_lag + 1 >= b)
    throw LagTooLargeError("max lag " + std::to_string(max_lag) +
                           " too large for pre-break segment of length " +
                           std::to_string(b));

  std::vector<std::vector<double>> c(panel.m, std::vector<double>(max_lag + 1, 0.0));
  for (std::size_t k = 0; k < panel.m; ++k) {
    double mu1 = 0.0;
    for (std::size_t t = 0; t < b; ++t) mu1 += panel.x(k, t);
    mu1 /= static_cast<double>(b);
    for (std::size_t l = 0; l <= max_lag; ++l) {
      double acc = 0.0;
      for (std::size_t t = 0; t + l < b; ++t) acc += panel.x(k, t) * panel.x(k, t + l);
      c[k][l] = acc / static_cast<double>(b - l) - mu1 * mu1;
    }
  }
  return c;
}

}  // namespace panelbreak
