#ifndef PANELBREAK_PANEL_HPP
#define PANELBREAK_PANEL_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "panelbreak/errors.hpp"

namespace panelbreak {

// m x n observation matrix, series in rows. Optional m x n x d covariate
// tensor for the probit / tobit families. Immutable after construction.
struct PanelData {
  std::vector<double> values;      // row-major, size m*n
  std::vector<double> covariates;  // row-major (k, t, j), size m*n*d; empty if unused
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t d = 0;  // covariate dimension, 0 when covariates are absent

  PanelData() = default;
  PanelData(std::size_t m_, std::size_t n_)
      : values(m_ * n_, 0.0), m(m_), n(n_) {}

  double x(std::size_t k, std::size_t t) const { return values[k * n + t]; }
  double& x(std::size_t k, std::size_t t) { return values[k * n + t]; }

  bool has_covariates() const { return d > 0; }

  std::span<const double> cov(std::size_t k, std::size_t t) const {
    return {covariates.data() + (k * n + t) * d, d};
  }

  std::span<const double> series(std::size_t k) const {
    return {values.data() + k * n, n};
  }
};

// Trimming fraction c* in (0, 0.5); candidate breaks are restricted to the
// interior window (c*, 1-c*).
struct TrimWindow {
  double c_star = 0.1;

  explicit TrimWindow(double c = 0.1) : c_star(c) {
    if (!(c_star > 0.0 && c_star < 0.5))
      throw ConfigError("trim fraction c* must lie in (0, 0.5), got " +
                        std::to_string(c_star));
  }
};

// Inclusive range of admissible break indices. Break at index b means
// segments {1..b} and {b+1..n} (1-based), i.e. the first b observations are
// pre-break; tau_hat = b / n.
struct AdmissibleRange {
  std::size_t lo = 0;
  std::size_t hi = 0;
  std::size_t count() const { return hi - lo + 1; }
};

// Per-series prefix sums of values and squared values. S[k][t] = sum of the
// first t observations, S[k][0] = 0, so segment sums are O(1) differences.
struct PrefixSums {
  std::vector<std::vector<double>> s;   // values
  std::vector<std::vector<double>> q;   // squared values
  std::size_t m = 0;
  std::size_t n = 0;

  double seg_sum(std::size_t k, std::size_t lo, std::size_t hi) const {
    return s[k][hi] - s[k][lo];  // observations (lo, hi] in 1-based terms
  }
  double seg_sumsq(std::size_t k, std::size_t lo, std::size_t hi) const {
    return q[k][hi] - q[k][lo];
  }
};

// Segment means and population variances (divisor = segment length) at one
// candidate break.
struct SegmentStats {
  std::vector<double> mu1, mu2;      // pre / post means per series
  std::vector<double> s1sq, s2sq;    // pre / post variances per series
};

// Verifies panel invariants and returns the admissible break range
// [ceil(n c*), floor(n (1-c*))].
AdmissibleRange validate_panel(const PanelData& panel, const TrimWindow& window);

// Prefix sums with compensated accumulation.
PrefixSums build_prefix(const PanelData& panel);

// Segment statistics at break index b (pre = first b observations).
SegmentStats segment_stats(const PrefixSums& prefix, std::size_t b_index);

}  // namespace panelbreak

#endif
