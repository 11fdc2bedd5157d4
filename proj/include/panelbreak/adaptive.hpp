#ifndef PANELBREAK_ADAPTIVE_HPP
#define PANELBREAK_ADAPTIVE_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "panelbreak/families.hpp"
#include "panelbreak/lse.hpp"
#include "panelbreak/mle.hpp"
#include "panelbreak/panel.hpp"

namespace panelbreak {

enum class AdaptiveMethod { LSE, MLE, LSE_DEPENDENT_GAUSSIAN };

struct AdaptiveConfig {
  std::size_t replicates = 500;
  double level = 0.10;  // alpha
  AdaptiveMethod method = AdaptiveMethod::LSE;
  std::size_t max_lag = 5;  // dependent variant only
  std::uint64_t seed = 1;
  double c_star = 0.1;
};

// Per-series fitted segment laws plus the frozen plug-in parameters of the
// resampling criterion.
struct FittedLaws {
  Method criterion = Method::LSE;
  FamilyPtr family;  // null: Gaussian surrogate at (mu, s2)
  std::vector<Vec> theta;  // pre-break sampling parameters
  std::vector<Vec> eta;    // post-break
  std::vector<double> mu1, mu2;      // LSE criterion plug-ins
  std::vector<double> s1sq, s2sq;    // floored fitted variances
  bool gaussian_surrogate = false;
  std::vector<bool> degenerate;  // per series, either segment flagged
};

struct AdaptiveResult {
  double tau_hat = 0.0;
  std::size_t b_index = 0;
  std::vector<long long> h_draws;
  double q_lo = 0.0, q_hi = 0.0;
  long long ci_index_lo = 0, ci_index_hi = 0;
  double ci_tau_lo = 0.0, ci_tau_hi = 0.0;
  double level = 0.10;
  std::uint64_t seed = 0;
  std::size_t replicates = 0;
  double boundary_fraction = 0.0;
  bool gaussian_surrogate = false;
  std::size_t degenerate_series = 0;
  double snr3_diagnostic = 0.0;
};

// Fitted per-series segment laws at the estimated break. LSE mode stores
// (mu, sigma^2) and, when the family declares a mean-variance link, the
// linked parameters; MLE mode reuses the segment score-equation roots.
FittedLaws refit_params(const PanelData& panel, const BreakEstimate& est,
                        FamilyPtr family = nullptr);

// Synthetic panel from the fitted laws with the break at b_hat. Covariates
// for probit/tobit are resampled with replacement from the observed design.
PanelData synth_panel(const FittedLaws& fitted, const PanelData& source,
                      std::size_t b_hat, RngStream& rng);

// One replicate: generate a synthetic panel, evaluate the shifted criterion
// with plug-in parameters held fixed, return the integer argmax h-tilde
// (ties to the smallest |h|, then negative).
long long draw_h_tilde(const FittedLaws& fitted, const PanelData& source,
                       std::size_t b_hat, const AdmissibleRange& range,
                       RngStream& rng);

// Dependent Gaussian variant: per-series banded Toeplitz covariance from the
// pre-break autocovariances, factorized once and reused across draws.
class DependentHTildeSampler {
public:
  DependentHTildeSampler(const PanelData& panel, const BreakEstimate& est,
                         std::size_t max_lag);
  long long draw(const AdmissibleRange& range, RngStream& rng) const;

private:
  std::size_t m_, n_, b_hat_, band_;
  std::vector<double> mu1_, mu2_;
  std::vector<std::vector<double>> chol_;  // per series, banded storage
  std::vector<Mat> dense_;  // eigenvalue-floored factor when the band fails
};

long long draw_h_tilde_dependent(const PanelData& panel, const BreakEstimate& est,
                                 std::size_t max_lag, const AdmissibleRange& range,
                                 RngStream& rng);

// Full procedure: estimate, refit, R resampling draws, pivot-inverted CI
// [b - q_{1-a/2}, b - q_{a/2}] clipped to the admissible window.
AdaptiveResult adaptive_ci(const PanelData& panel, const AdaptiveConfig& config,
                           FamilyPtr family = nullptr);

}  // namespace panelbreak

#endif
