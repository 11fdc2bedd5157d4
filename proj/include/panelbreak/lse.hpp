#ifndef PANELBREAK_LSE_HPP
#define PANELBREAK_LSE_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "panelbreak/panel.hpp"

namespace panelbreak {

enum class Method { LSE, MLE };

// Per-series segment parameters at the estimated break. For LSE these are
// (mean, variance) pairs; for MLE the family parameter vectors.
struct SegmentParams {
  std::vector<std::vector<double>> theta;  // pre-break, one vector per series
  std::vector<std::vector<double>> eta;    // post-break
  std::vector<bool> theta_degenerate;
  std::vector<bool> eta_degenerate;
};

struct BreakEstimate {
  double tau_hat = 0.0;
  std::size_t b_index = 0;
  std::size_t profile_lo = 0;           // b of profile.front()
  std::vector<double> profile;          // criterion value per admissible b
  Method method = Method::LSE;
  SegmentParams segment_params;

  double profile_at(std::size_t b) const { return profile[b - profile_lo]; }
};

// Plug-in estimates of the limit-law scale parameters.
struct GammaEstimates {
  double gamma_L_sq = 0.0;
  double gamma_R_sq = 0.0;
  double gamma_L_star_sq = 0.0;
  double gamma_R_star_sq = 0.0;
  double c1_sq = 0.0;
  double delta_norm_sq = 0.0;
};

// Pooled criterion M_n(b) = -(1/n) sum_k [pre RSS + post RSS], O(m) via
// the prefix identity sum (x - xbar)^2 = Q - S^2/len.
double lse_criterion(const PrefixSums& prefix, std::size_t b_index);

// Argmax of the criterion over the admissible window, ties broken toward
// the smallest index. Segment params carry (mean, variance) per series.
BreakEstimate estimate_lse(const PanelData& panel, const TrimWindow& window);

// Variance-weighted signal ratios at the estimated break; starred versions
// are the unnormalized sums over all series.
GammaEstimates gamma_estimates(const PanelData& panel, const BreakEstimate& est);

// Pre-break lag-l sample autocovariances per series, l = 0..max_lag:
// C_{k,l} = (1/(b-l)) sum_{t<=b-l} X_kt X_k(t+l) - muhat1k^2.
std::vector<std::vector<double>> autocov_estimates(const PanelData& panel,
                                                   const BreakEstimate& est,
                                                   std::size_t max_lag);

}  // namespace panelbreak

#endif
