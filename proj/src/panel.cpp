#include "panelbreak/panel.hpp"

#include <cmath>
#include <string>

#include "panelbreak/stats.hpp"

namespace panelbreak {

AdmissibleRange validate_panel(const PanelData& panel, const TrimWindow& window) {
  if (panel.m < 1) throw DataError("panel needs at least one series");
  if (panel.n < 4) throw DataError("panel needs at least 4 time points, got " +
                                   std::to_string(panel.n));
  if (panel.values.size() != panel.m * panel.n)
    throw DataError("panel value buffer does not match m*n");
  for (std::size_t i = 0; i < panel.values.size(); ++i) {
    if (!std::isfinite(panel.values[i])) {
      std::size_t k = i / panel.n, t = i % panel.n;
      throw NonFiniteError("non-finite value at series " + std::to_string(k) +
                           ", time " + std::to_string(t));
    }
  }
  if (panel.has_covariates()) {
    if (panel.covariates.size() != panel.m * panel.n * panel.d)
      throw DataError("covariate buffer does not match m*n*d");
    for (double v : panel.covariates)
      if (!std::isfinite(v)) throw NonFiniteError("non-finite covariate entry");
  }

  const double n = static_cast<double>(panel.n);
  auto lo = static_cast<std::size_t>(std::ceil(n * window.c_star));
  auto hi = static_cast<std::size_t>(std::floor(n * (1.0 - window.c_star)));
  if (lo < 1) lo = 1;
  if (hi > panel.n - 1) hi = panel.n - 1;
  if (lo > hi)
    throw EmptyWindowError("admissible break window is empty for n=" +
                           std::to_string(panel.n) +
                           ", c*=" + std::to_string(window.c_star));
  return {lo, hi};
}

PrefixSums build_prefix(const PanelData& panel) {
  PrefixSums p;
  p.m = panel.m;
  p.n = panel.n;
  p.s.assign(panel.m, std::vector<double>(panel.n + 1, 0.0));
  p.q.assign(panel.m, std::vector<double>(panel.n + 1, 0.0));
  for (std::size_t k = 0; k < panel.m; ++k) {
    CompensatedSum cs, cq;
    for (std::size_t t = 0; t < panel.n; ++t) {
      double v = panel.x(k, t);
      cs.add(v);
      cq.add(v * v);
      p.s[k][t + 1] = cs.value();
      p.q[k][t + 1] = cq.value();
    }
  }
  return p;
}

SegmentStats segment_stats(const PrefixSums& prefix, std::size_t b_index) {
  const std::size_t m = prefix.m, n = prefix.n;
  SegmentStats st;
  st.mu1.resize(m);
  st.mu2.resize(m);
  st.s1sq.resize(m);
  st.s2sq.resize(m);
  const double len1 = static_cast<double>(b_index);
  const double len2 = static_cast<double>(n - b_index);
  for (std::size_t k = 0; k < m; ++k) {
    double s1 = prefix.seg_sum(k, 0, b_index);
    double q1 = prefix.seg_sumsq(k, 0, b_index);
    double s2 = prefix.seg_sum(k, b_index, n);
    double q2 = prefix.seg_sumsq(k, b_index, n);
    st.mu1[k] = s1 / len1;
    st.mu2[k] = s2 / len2;
    // population form: Var = Q/len - mean^2, clamped against rounding
    st.s1sq[k] = std::max(0.0, q1 / len1 - st.mu1[k] * st.mu1[k]);
    st.s2sq[k] = std::max(0.0, q2 / len2 - st.mu2[k] * st.mu2[k]);
  }
  return st;
}

}  // namespace panelbreak
