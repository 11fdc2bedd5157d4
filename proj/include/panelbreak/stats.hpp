#ifndef PANELBREAK_STATS_HPP
#define PANELBREAK_STATS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace panelbreak {

// Neumaier compensated accumulator; keeps prefix sums accurate to ~1 ulp
// even for n up to 1e6.
class CompensatedSum {
public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double mean(const std::vector<double>& x) {
  if (x.empty()) return 0.0;
  CompensatedSum s;
  for (double v : x) s.add(v);
  return s.value() / static_cast<double>(x.size());
}

// Population variance (divisor n).
inline double variance(const std::vector<double>& x) {
  if (x.empty()) return 0.0;
  double m = mean(x);
  CompensatedSum s;
  for (double v : x) s.add((v - m) * (v - m));
  return s.value() / static_cast<double>(x.size());
}

// Type-7 quantile (linear interpolation of order statistics), matching the
// convention pinned for quantile tables. `sorted` must be ascending.
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
  const std::size_t n = sorted.size();
  if (n == 0) return 0.0;
  if (n == 1) return sorted[0];
  double h = (static_cast<double>(n) - 1.0) * p;
  double fl = std::floor(h);
  std::size_t lo = static_cast<std::size_t>(std::max(0.0, fl));
  if (lo >= n - 1) return sorted[n - 1];
  double frac = h - fl;
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

inline double quantile(std::vector<double> x, double p) {
  std::sort(x.begin(), x.end());
  return quantile_sorted(x, p);
}

inline double norm_pdf(double z) {
  static const double inv_sqrt_2pi = 0.3989422804014326779;
  return inv_sqrt_2pi * std::exp(-0.5 * z * z);
}

inline double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// log Phi(z), stable in the left tail via the asymptotic Mills expansion.
inline double norm_log_cdf(double z) {
  if (z > -8.0) return std::log(norm_cdf(z));
  double z2 = z * z;
  // Phi(z) ~ phi(z)/|z| * (1 - 1/z^2 + 3/z^4) for z -> -inf
  return -0.5 * z2 - 0.5 * std::log(2.0 * M_PI) - std::log(-z) +
         std::log1p(-1.0 / z2 + 3.0 / (z2 * z2));
}

// Inverse Mills ratio phi(z)/Phi(z), stable for z << 0.
inline double mills_ratio(double z) {
  if (z > -8.0) return norm_pdf(z) / norm_cdf(z);
  double z2 = z * z;
  return -z / (1.0 - 1.0 / z2 + 3.0 / (z2 * z2));
}

// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const std::size_t na = a.size(), nb = b.size();
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < na && j < nb) {
    double x = std::min(a[i], b[j]);
    while (i < na && a[i] <= x) ++i;
    while (j < nb && b[j] <= x) ++j;
    double fa = static_cast<double>(i) / static_cast<double>(na);
    double fb = static_cast<double>(j) / static_cast<double>(nb);
    d = std::max(d, std::abs(fa - fb));
  }
  return d;
}

// Critical value for the two-sample KS test: c(alpha) * sqrt((na+nb)/(na*nb)).
inline double ks_critical(double alpha, std::size_t na, std::size_t nb) {
  double c;
  if (alpha <= 0.01) {
    c = 1.62762;
  } else if (alpha <= 0.05) {
    c = 1.35810;
  } else {
    c = 1.22385;  // alpha = 0.10
  }
  return c * std::sqrt(static_cast<double>(na + nb) /
                       (static_cast<double>(na) * static_cast<double>(nb)));
}

}  // namespace panelbreak

#endif
