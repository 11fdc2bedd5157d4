#ifndef PANELBREAK_TEST_HELPERS_HPP
#define PANELBREAK_TEST_HELPERS_HPP

#include <cmath>
#include <vector>

#include "panelbreak/families.hpp"
#include "panelbreak/panel.hpp"
#include "panelbreak/rng.hpp"

namespace pbtest {

using panelbreak::Mat;
using panelbreak::ModelFamily;
using panelbreak::PanelData;
using panelbreak::RngStream;
using panelbreak::Vec;

inline bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

// Central finite difference of the log-density in the parameter.
inline Vec score_fd(const ModelFamily& fam, const Vec& param, double x,
                    std::span<const double> cov, double step = 1e-5) {
  Vec g(param.size());
  for (Eigen::Index j = 0; j < param.size(); ++j) {
    Vec hi = param, lo = param;
    hi[j] += step;
    lo[j] -= step;
    g[j] = (fam.log_density(hi, x, cov) - fam.log_density(lo, x, cov)) /
           (2.0 * step);
  }
  return g;
}

inline Mat hessian_fd(const ModelFamily& fam, const Vec& param, double x,
                      std::span<const double> cov, double step = 1e-5) {
  Mat h(param.size(), param.size());
  for (Eigen::Index j = 0; j < param.size(); ++j) {
    Vec hi = param, lo = param;
    hi[j] += step;
    lo[j] -= step;
    Vec d = (fam.score(hi, x, cov) - fam.score(lo, x, cov)) / (2.0 * step);
    h.col(j) = d;
  }
  return h;
}

// Naive two-pass pooled LSE criterion, the oracle for the prefix identity.
inline double naive_lse_criterion(const PanelData& panel, std::size_t b) {
  double total = 0.0;
  for (std::size_t k = 0; k < panel.m; ++k) {
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t t = 0; t < b; ++t) m1 += panel.x(k, t);
    for (std::size_t t = b; t < panel.n; ++t) m2 += panel.x(k, t);
    m1 /= static_cast<double>(b);
    m2 /= static_cast<double>(panel.n - b);
    double rss = 0.0;
    for (std::size_t t = 0; t < b; ++t)
      rss += (panel.x(k, t) - m1) * (panel.x(k, t) - m1);
    for (std::size_t t = b; t < panel.n; ++t)
      rss += (panel.x(k, t) - m2) * (panel.x(k, t) - m2);
    total += rss;
  }
  return -total / static_cast<double>(panel.n);
}

inline PanelData random_panel(std::size_t m, std::size_t n, RngStream& rng,
                              double spread = 2.0) {
  PanelData p(m, n);
  for (auto& v : p.values) v = spread * (rng.uniform() - 0.5) + rng.normal();
  return p;
}

}  // namespace pbtest

#endif
