#ifndef PANELBREAK_FAMILIES_HPP
#define PANELBREAK_FAMILIES_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "panelbreak/errors.hpp"
#include "panelbreak/rng.hpp"

namespace panelbreak {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Open interval constraint for one parameter coordinate.
struct Interval {
  double lo;
  double hi;
  double clip(double v, double margin_frac = 1e-9) const {
    double margin = margin_frac * std::min(hi - lo, 1.0);
    if (v < lo + margin) return lo + margin;
    if (v > hi - margin) return hi - margin;
    return v;
  }
  bool contains(double v) const { return v > lo && v < hi; }
  double center() const { return 0.5 * (lo + hi); }
};

// Observations of one segment, optionally with aliased covariate rows.
struct SegmentView {
  std::span<const double> xs;
  const double* covs = nullptr;  // row-major len x d, may be null
  std::size_t d = 0;

  std::size_t size() const { return xs.size(); }
  std::span<const double> cov(std::size_t i) const {
    return {covs + i * d, d};
  }
  bool has_covs() const { return covs != nullptr && d > 0; }
};

// Result of a segment maximum-likelihood fit. Boundary estimates are
// clipped into the parameter box and flagged instead of erroring so that
// a break-profile scan can keep going.
struct FitResult {
  Vec param;
  bool degenerate = false;
  bool converged = true;
  int iterations = 0;
  double score_norm = 0.0;  // sup-norm of the mean score at the returned root
};

struct SolveOptions {
  std::optional<Vec> warm_start;
  bool multistart = true;  // method-of-moments start plus two deterministic jitters
  int max_iterations = 100;
  double score_tol = 1e-10;  // sup-norm of the mean score
  double step_tol = 1e-12;   // sup-norm of the Newton step
};

// Uniform model descriptor: log-density, analytic derivatives, sampler,
// segment MLE, Fisher information, moments. Immutable and shareable.
class ModelFamily {
public:
  virtual ~ModelFamily() = default;

  virtual std::string name() const = 0;
  virtual std::size_t param_dim() const = 0;
  virtual std::vector<Interval> param_box() const = 0;
  virtual bool uses_covariates() const { return false; }
  virtual bool discrete_support() const = 0;

  virtual double log_density(const Vec& param, double x,
                             std::span<const double> cov = {}) const = 0;
  virtual Vec score(const Vec& param, double x,
                    std::span<const double> cov = {}) const = 0;
  virtual Mat hessian(const Vec& param, double x,
                      std::span<const double> cov = {}) const = 0;

  virtual double sample(const Vec& param, std::span<const double> cov,
                        RngStream& rng) const = 0;

  // Root of the segment score equation; closed form where one exists,
  // otherwise safeguarded Newton. Throws NoConvergenceError after the
  // iteration cap, DegenerateSegmentError on a tobit rank failure.
  virtual FitResult segment_mle(const SegmentView& seg,
                                const SolveOptions& opts = {}) const;

  // Expected outer product of the score, closed form where available.
  virtual Mat fisher_info(const Vec& param) const = 0;
  // Covariate families integrate over the empirical covariate distribution.
  virtual Mat fisher_info(const Vec& param, const SegmentView& covs) const {
    (void)covs;
    return fisher_info(param);
  }

  virtual std::pair<double, double> mean_variance(const Vec& param) const = 0;
  virtual std::pair<double, double> mean_variance(
      const Vec& param, std::span<const double> cov) const {
    (void)cov;
    return mean_variance(param);
  }

  // Mean-variance link theta = h(mu, sigma^2) used by LSE-mode adaptive
  // resampling; families without a usable link return nullopt.
  virtual std::optional<FitResult> params_from_moments(double mu,
                                                       double s2) const {
    (void)mu;
    (void)s2;
    return std::nullopt;
  }

  // Fast profile lane: low-dimensional sufficient statistics that make the
  // per-break segment fit O(1) after prefix summation. stat_dim() == 0
  // means the family has no such reduction (probit, tobit).
  virtual std::size_t stat_dim() const { return 0; }
  virtual void stats(double x, double* out) const { (void)x, (void)out; }
  virtual FitResult mle_from_stats(const double* sums, double len) const;
  virtual double loglik_from_stats(const Vec& param, const double* sums,
                                   double len) const;

protected:
  // Generic ascent: full Newton with halving line search, gradient fallback
  // when the negated Hessian is not positive definite.
  FitResult newton_solve(const SegmentView& seg, const Vec& init,
                         const SolveOptions& opts) const;
  // Method-of-moments style initializer for the Newton families.
  virtual Vec initial_guess(const SegmentView& seg) const;

  void check_in_box(const Vec& param) const;
};

using FamilyPtr = std::shared_ptr<const ModelFamily>;

// Named construction; `options` carries family-specific settings such as
// sigma2 for the known-variance Normal or the ZIP box constants.
FamilyPtr make_family(const std::string& name,
                      const std::map<std::string, double>& options = {});

std::vector<std::string> family_names();

}  // namespace panelbreak

#endif
