#ifndef PANELBREAK_NOISE_HPP
#define PANELBREAK_NOISE_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "panelbreak/families.hpp"
#include "panelbreak/panel.hpp"
#include "panelbreak/rng.hpp"

namespace panelbreak {

// Named sequence catalog for covariance kernels and MA coefficients:
// geometric scale * rate^j, polynomial scale / (1+j)^rate, or a literal
// vector (zero beyond its length).
struct SeqSpec {
  enum class Kind { Geometric, Polynomial, Literal };
  Kind kind = Kind::Geometric;
  double scale = 1.0;
  double rate = 0.5;  // geometric ratio in (-1,1) or polynomial exponent > 1
  std::vector<double> literal;

  double at(std::size_t j) const;
  static SeqSpec geometric(double scale, double rate);
  static SeqSpec polynomial(double scale, double rate);
  static SeqSpec from_literal(std::vector<double> v);
};

// All four noise classes are stationary with absolutely summable second
// moments. The Gaussian-process entries and any bounded m-dependent
// construction (IID, NonlinearMA, finitely supported linear coefficients)
// also have summable cumulants of every order; heavy-tailed innovations in
// an infinite-order linear process need not.
enum class NoiseKind { IID, NonlinearMA, GaussianProcess, LinearProcess };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::IID;
  // innovation law for IID / NonlinearMA / LinearProcess; sampled values are
  // centered by the family mean. Null means standard normal.
  FamilyPtr innovation;
  std::vector<double> innovation_param;
  double innovation_sd = 1.0;  // std normal scale when no family is given
  SeqSpec kernel;              // Gaussian process autocovariance g(h), h >= 0
  SeqSpec coeffs;              // linear-process a_j
  double trunc_tol = 1e-8;     // linear-process truncation tolerance
};

// Smallest J with tail sum_{j>J} |a_j| < tol (capped at 1e6), plus the kept
// coefficients a_0..a_J.
struct TruncatedCoeffs {
  std::vector<double> a;
  std::size_t lag = 0;
};
TruncatedCoeffs truncate_linear(const SeqSpec& coeffs, double tol);

// Panel with mean shift mu1 -> mu2 at floor(n*tau) and stationary noise,
// independent across series; series k draws from rng.substream(k).
PanelData gen_panel(const std::vector<double>& mu1, const std::vector<double>& mu2,
                    double tau, const NoiseSpec& noise, std::size_t n,
                    RngStream& rng);

// Covariate generator for the probit / tobit designs: iid Uniform(lo, hi)
// entries per coordinate.
struct CovariateSpec {
  std::size_t dim = 0;
  double lo = 0.5;
  double hi = 1.5;
};

// Panel sampled from a model family with per-series parameters switching
// from theta to eta at floor(n*tau).
PanelData gen_family_panel(const ModelFamily& family,
                           const std::vector<Vec>& theta,
                           const std::vector<Vec>& eta, double tau,
                           std::size_t n, RngStream& rng,
                           const CovariateSpec& covs = {});

// Stationary Gaussian sample path of length n with autocovariance kernel
// g(|h|): banded Toeplitz Cholesky for n <= 4096, circulant embedding above.
std::vector<double> sample_gaussian_process(const SeqSpec& kernel, std::size_t n,
                                            RngStream& rng);

}  // namespace panelbreak

#endif
