#ifndef PANELBREAK_LIMIT_HPP
#define PANELBREAK_LIMIT_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "panelbreak/families.hpp"
#include "panelbreak/rng.hpp"

namespace panelbreak {

enum class Regime { A, B, C };

// A(h) jump-term component for one fixed-gap series: its pre/post laws.
struct K0Component {
  FamilyPtr pre_family;
  FamilyPtr post_family;
  Vec pre_param;
  Vec post_param;
};

enum class CriterionForm { LSE, MLE };

struct LimitLawSpec {
  Regime regime = Regime::B;
  // regime b scales
  double gamma_L = 1.0;
  double gamma_R = 1.0;
  // regime c scales
  double c1_sq = 0.0;
  double gamma_L_star = 0.0;
  double gamma_R_star = 0.0;
  std::vector<K0Component> k0;
  CriterionForm form = CriterionForm::LSE;
  // dependent regime b: covariance function of the limit Gaussian part
  std::function<double(double, double)> dep_cov;

  double max_gamma_sq() const {
    double g = std::max(gamma_L, gamma_R);
    return g * g;
  }
  // defaults keep horizon doubling rare: drift makes far excursions
  // exponentially unlikely
  double default_step() const { return 0.005 * max_gamma_sq(); }
  double default_horizon() const { return 100.0 * max_gamma_sq(); }
};

struct RegimeBDraw {
  double h = 0.0;
  int doublings = 0;
};

// Argmax of -0.5|h| + gamma_side B_h on a step-delta grid; the horizon
// doubles (appending increments, never resampling) while the argmax lands
// within 5% of the edge. Ties go to the smallest |h|, then negative h.
RegimeBDraw sim_regime_b(const LimitLawSpec& spec, double step, double horizon,
                         RngStream& rng);

// One path at step/2 scored on both the fine grid and its step-coarse
// subgrid; used for discretization-refinement checks without MC noise.
struct CoupledDraw {
  double h_fine = 0.0;
  double h_coarse = 0.0;
};
CoupledDraw sim_regime_b_coupled(const LimitLawSpec& spec, double step,
                                 double horizon, RngStream& rng);

struct RegimeCDraw {
  long long h = 0;
  int doublings = 0;
};

// Integer-grid argmax of D + C + A per the limit-law restatement on Z:
// drift -0.5 c1^2 per outward step, Gaussian steps gamma*_L / gamma*_R, and
// the K0 jump increments (squared-difference form for LSE, log-density
// differences for MLE) with pre-law draws left of the origin and post-law
// draws right of it.
RegimeCDraw sim_regime_c(const LimitLawSpec& spec, long long horizon,
                         RngStream& rng);

// Dependent regime b: Gaussian vector with covariance dep_cov(h_i, h_j) on
// the fixed grid, drift added, argmax. The factorization is cached so
// replicate draws are O(grid^2).
class RegimeBDependentSampler {
public:
  RegimeBDependentSampler(const LimitLawSpec& spec, double step, double horizon);
  double draw(RngStream& rng) const;
  std::size_t grid_size() const { return grid_.size(); }

private:
  std::vector<double> grid_;
  Mat chol_;  // lower factor
};

double sim_regime_b_dependent(const LimitLawSpec& spec, double step,
                              double horizon, RngStream& rng);

struct QuantileTable {
  std::vector<double> draws;  // sorted
  std::vector<double> levels;
  std::vector<double> quantiles;
  std::size_t replicate_count = 0;
  double step = 0.0;
  double horizon = 0.0;
  std::uint64_t seed = 0;
  double doubling_fraction = 0.0;
};

// Monte Carlo quantiles (type-7) of the configured limit law; replicate r
// draws from rng.substream(r), so results are independent of scheduling.
QuantileTable quantile_table(const LimitLawSpec& spec,
                             const std::vector<double>& levels,
                             std::size_t replicates, RngStream& rng,
                             double step = 0.0, double horizon = 0.0);

}  // namespace panelbreak

#endif
