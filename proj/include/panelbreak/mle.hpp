#ifndef PANELBREAK_MLE_HPP
#define PANELBREAK_MLE_HPP

#include <cstddef>
#include <optional>
#include <vector>

#include "panelbreak/families.hpp"
#include "panelbreak/lse.hpp"
#include "panelbreak/panel.hpp"

namespace panelbreak {

// Full profile of the pooled segment log-likelihood with cached per-series
// segment roots and degenerate-fit markers.
struct MleProfile {
  std::size_t lo = 0;                          // b of values.front()
  std::vector<double> values;                  // L_n(b)
  std::vector<std::vector<Vec>> theta_at;      // [b - lo][k]
  std::vector<std::vector<Vec>> eta_at;
  struct Flag {
    std::size_t k;
    std::size_t b;
    bool pre;
  };
  std::vector<Flag> degenerate_flags;

  double at(std::size_t b) const { return values[b - lo]; }
};

struct MleCriterionValue {
  double value = 0.0;
  std::vector<Vec> theta;
  std::vector<Vec> eta;
  std::vector<bool> theta_degenerate;
  std::vector<bool> eta_degenerate;
};

// Segment MLEs at one break index (warm-started when previous roots are
// supplied) and the pooled mean log-likelihood L_n(b).
MleCriterionValue mle_criterion(const PanelData& panel, const ModelFamily& family,
                                std::size_t b_index,
                                const std::vector<Vec>* warm_theta = nullptr,
                                const std::vector<Vec>* warm_eta = nullptr);

// Left-to-right sweep over the admissible window with warm starts.
MleProfile mle_profile(const PanelData& panel, const ModelFamily& family,
                       const TrimWindow& window, bool warm_starts = true);

BreakEstimate estimate_mle(const PanelData& panel, const ModelFamily& family,
                           const TrimWindow& window);

struct GammaMle {
  double gamma_mle_sq = 0.0;
  double gamma_mle_star_sq = 0.0;
};

// Plug-in of eq-style ratio sum (theta-eta)' I(theta) (theta-eta) over
// ||theta-eta||^2; the starred version is the unnormalized numerator.
GammaMle gamma_mle_estimate(const PanelData& panel, const ModelFamily& family,
                            const BreakEstimate& est);

}  // namespace panelbreak

#endif
