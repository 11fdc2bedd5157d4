#include "panelbreak/families.hpp"

#include <cmath>
#include <functional>
#include <limits>

#include "panelbreak/stats.hpp"

namespace panelbreak {

namespace {

double opt_or(const std::map<std::string, double>& opts, const std::string& key,
              double fallback) {
  auto it = opts.find(key);
  return it == opts.end() ? fallback : it->second;
}

bool is_nonneg_int(double x) {
  return x >= -1e-9 && std::abs(x - std::round(x)) < 1e-9;
}

double dot(const Vec& beta, std::span<const double> y) {
  double z = 0.0;
  for (Eigen::Index j = 0; j < beta.size(); ++j) z += beta[j] * y[j];
  return z;
}

}  // namespace

void ModelFamily::check_in_box(const Vec& param) const {
  auto box = param_box();
  if (param.size() != static_cast<Eigen::Index>(box.size()))
    throw ConfigError(name() + ": parameter dimension mismatch");
  for (std::size_t j = 0; j < box.size(); ++j)
    if (!box[j].contains(param[static_cast<Eigen::Index>(j)]))
      throw ConfigError(name() + ": parameter coordinate " + std::to_string(j) +
                        " outside the parameter box");
}

Vec ModelFamily::initial_guess(const SegmentView& seg) const {
  auto box = param_box();
  Vec v(box.size());
  for (std::size_t j = 0; j < box.size(); ++j) v[j] = box[j].center();
  (void)seg;
  return v;
}

FitResult ModelFamily::mle_from_stats(const double* sums, double len) const {
  (void)sums, (void)len;
  throw ConfigError(name() + ": no sufficient-statistic fit path");
}

double ModelFamily::loglik_from_stats(const Vec& param, const double* sums,
                                      double len) const {
  (void)param, (void)sums, (void)len;
  throw ConfigError(name() + ": no sufficient-statistic likelihood path");
}

FitResult ModelFamily::newton_solve(const SegmentView& seg, const Vec& init,
                                    const SolveOptions& opts) const {
  const auto box = param_box();
  const std::size_t d = param_dim();
  const double len = static_cast<double>(seg.size());

  auto clip_into_box = [&](Vec v) {
    for (std::size_t j = 0; j < d; ++j) v[j] = box[j].clip(v[j]);
    return v;
  };
  auto mean_loglik = [&](const Vec& p) {
    double s = 0.0;
    for (std::size_t i = 0; i < seg.size(); ++i)
      s += log_density(p, seg.xs[i], seg.has_covs() ? seg.cov(i) : std::span<const double>{});
    return s / len;
  };
  auto at_edge = [&](const Vec& p, std::size_t j) {
    double margin = 4e-9 * std::min(box[j].hi - box[j].lo, 1.0);
    int out = 0;
    if (p[j] <= box[j].lo + margin) out = -1;
    if (p[j] >= box[j].hi - margin) out = 1;
    return out;
  };

  Vec theta = clip_into_box(init);
  double ll = mean_loglik(theta);
  FitResult res;
  res.converged = false;

  int gradient_fallbacks = 0;
  int iter = 0;
  for (; iter < opts.max_iterations; ++iter) {
    Vec g = Vec::Zero(d);
    Mat H = Mat::Zero(d, d);
    for (std::size_t i = 0; i < seg.size(); ++i) {
      auto cv = seg.has_covs() ? seg.cov(i) : std::span<const double>{};
      g += score(theta, seg.xs[i], cv);
      H += hessian(theta, seg.xs[i], cv);
    }
    g /= len;
    H /= len;
    res.score_norm = g.lpNorm<Eigen::Infinity>();

    // coordinates pinned to the box with an outward-pointing score leave
    // the Newton system; their score cannot vanish at a boundary MLE
    std::vector<std::size_t> free;
    for (std::size_t j = 0; j < d; ++j) {
      int edge = at_edge(theta, j);
      bool pinned = (edge < 0 && g[j] < 0.0) || (edge > 0 && g[j] > 0.0);
      if (!pinned) free.push_back(j);
    }
    double free_score = 0.0;
    for (std::size_t j : free) free_score = std::max(free_score, std::abs(g[j]));
    if (free_score < opts.score_tol) {
      res.converged = true;
      break;
    }

    Vec step = Vec::Zero(d);
    const auto nf = static_cast<Eigen::Index>(free.size());
    Vec gf(nf);
    Mat Hf(nf, nf);
    for (Eigen::Index a = 0; a < nf; ++a) {
      gf[a] = g[free[static_cast<std::size_t>(a)]];
      for (Eigen::Index b = 0; b < nf; ++b)
        Hf(a, b) = H(static_cast<Eigen::Index>(free[static_cast<std::size_t>(a)]),
                     static_cast<Eigen::Index>(free[static_cast<std::size_t>(b)]));
    }
    Eigen::LLT<Mat> llt(-Hf);
    if (llt.info() == Eigen::Success) {
      Vec sf = llt.solve(gf);
      for (Eigen::Index a = 0; a < nf; ++a) step[free[static_cast<std::size_t>(a)]] = sf[a];
    } else if (gradient_fallbacks < 50) {
      // non-negative-definite Hessian: plain ascent on the free coordinates
      ++gradient_fallbacks;
      for (Eigen::Index a = 0; a < nf; ++a)
        step[free[static_cast<std::size_t>(a)]] = gf[a];
    } else {
      break;
    }

    // halving line search on the mean log-likelihood
    double scale = 1.0;
    Vec cand;
    double ll_cand = -std::numeric_limits<double>::infinity();
    for (int half = 0; half < 40; ++half) {
      cand = clip_into_box(theta + scale * step);
      ll_cand = mean_loglik(cand);
      if (ll_cand >= ll - 1e-14) break;
      scale *= 0.5;
    }
    double step_norm = (cand - theta).lpNorm<Eigen::Infinity>();
    theta = cand;
    ll = ll_cand;
    if (step_norm < opts.step_tol) {
      Vec g2 = Vec::Zero(d);
      for (std::size_t i = 0; i < seg.size(); ++i)
        g2 += score(theta, seg.xs[i],
                    seg.has_covs() ? seg.cov(i) : std::span<const double>{});
      res.score_norm = (g2 / len).lpNorm<Eigen::Infinity>();
      res.converged = true;
      break;
    }
  }

  res.param = theta;
  res.iterations = iter;
  // a root pinned to the box edge with a non-vanishing score is a boundary MLE
  for (std::size_t j = 0; j < d; ++j) {
    if (at_edge(theta, j) != 0 && res.score_norm > 1e-6) res.degenerate = true;
  }
  return res;
}

FitResult ModelFamily::segment_mle(const SegmentView& seg,
                                   const SolveOptions& opts) const {
  const std::size_t d = param_dim();
  const auto box = param_box();
  // closed-form families fit any nonempty slice; the Newton families need
  // at least d + 1 observations
  if (seg.size() < 1 || (stat_dim() == 0 && seg.size() < d + 1)) {
    FitResult r;
    r.param = Vec(d);
    for (std::size_t j = 0; j < d; ++j) r.param[j] = box[j].center();
    if (opts.warm_start) r.param = *opts.warm_start;
    r.degenerate = true;
    r.converged = false;
    return r;
  }

  if (stat_dim() > 0) {
    std::vector<double> sums(stat_dim(), 0.0);
    std::vector<double> buf(stat_dim());
    for (double x : seg.xs) {
      stats(x, buf.data());
      for (std::size_t j = 0; j < sums.size(); ++j) sums[j] += buf[j];
    }
    return mle_from_stats(sums.data(), static_cast<double>(seg.size()));
  }

  std::vector<Vec> starts;
  if (opts.warm_start) {
    starts.push_back(*opts.warm_start);
  } else {
    starts.push_back(initial_guess(seg));
  }
  if (opts.multistart) {
    Vec center(d);
    for (std::size_t j = 0; j < d; ++j) center[j] = box[j].center();
    starts.push_back(0.75 * starts[0] + 0.25 * center);
    starts.push_back(center);
  }

  FitResult best;
  bool have = false;
  double best_ll = -std::numeric_limits<double>::infinity();
  for (const auto& s0 : starts) {
    FitResult r = newton_solve(seg, s0, opts);
    if (!r.converged) continue;
    double ll = 0.0;
    for (std::size_t i = 0; i < seg.size(); ++i)
      ll += log_density(r.param, seg.xs[i],
                        seg.has_covs() ? seg.cov(i) : std::span<const double>{});
    if (!have || ll > best_ll) {
      best = r;
      best_ll = ll;
      have = true;
    }
  }
  if (!have)
    throw NoConvergenceError(name() + ": segment solver failed to converge in " +
                             std::to_string(opts.max_iterations) + " iterations");
  return best;
}

// ---------------------------------------------------------------------------
// Normal with known variance
// ---------------------------------------------------------------------------

class NormalKnownVar final : public ModelFamily {
public:
  explicit NormalKnownVar(double sigma2) : sigma2_(sigma2) {
    if (!(sigma2 > 0)) throw ConfigError("normal-known: sigma2 must be > 0");
  }
  std::string name() const override { return "normal-known"; }
  std::size_t param_dim() const override { return 1; }
  std::vector<Interval> param_box() const override { return {{-1e12, 1e12}}; }
  bool discrete_support() const override { return false; }

  double log_density(const Vec& p, double x, std::span<const double>) const override {
    double r = x - p[0];
    return -0.5 * std::log(2.0 * M_PI * sigma2_) - 0.5 * r * r / sigma2_;
  }
  Vec score(const Vec& p, double x, std::span<const double>) const override {
    Vec g(1);
    g[0] = (x - p[0]) / sigma2_;
    return g;
  }
  Mat hessian(const Vec&, double, std::span<const double>) const override {
    Mat h(1, 1);
    h(0, 0) = -1.0 / sigma2_;
    return h;
  }
  double sample(const Vec& p, std::span<const double>, RngStream& rng) const override {
    return rng.normal(p[0], std::sqrt(sigma2_));
  }
  Mat fisher_info(const Vec&) const override {
    Mat i(1, 1);
    i(0, 0) = 1.0 / sigma2_;
    return i;
  }
  std::pair<double, double> mean_variance(const Vec& p) const override {
    return {p[0], sigma2_};
  }
  std::optional<FitResult> params_from_moments(double mu, double) const override {
    FitResult r;
    r.param = Vec(1);
    r.param[0] = param_box()[0].clip(mu);
    return r;
  }

  std::size_t stat_dim() const override { return 2; }
  void stats(double x, double* out) const override {
    out[0] = x;
    out[1] = x * x;
  }
  FitResult mle_from_stats(const double* s, double len) const override {
    FitResult r;
    r.param = Vec(1);
    r.param[0] = s[0] / len;
    return r;
  }
  double loglik_from_stats(const Vec& p, const double* s, double len) const override {
    double rss = s[1] - 2.0 * p[0] * s[0] + len * p[0] * p[0];
    return -0.5 * len * std::log(2.0 * M_PI * sigma2_) - 0.5 * rss / sigma2_;
  }

private:
  double sigma2_;
};

// ---------------------------------------------------------------------------
// Normal with unknown variance, param = (mu, sigma^2)
// ---------------------------------------------------------------------------

class NormalFamily final : public ModelFamily {
public:
  std::string name() const override { return "normal"; }
  std::size_t param_dim() const override { return 2; }
  std::vector<Interval> param_box() const override {
    return {{-1e12, 1e12}, {1e-12, 1e12}};
  }
  bool discrete_support() const override { return false; }

  double log_density(const Vec& p, double x, std::span<const double>) const override {
    double r = x - p[0];
    return -0.5 * std::log(2.0 * M_PI * p[1]) - 0.5 * r * r / p[1];
  }
  Vec score(const Vec& p, double x, std::span<const double>) const override {
    double r = x - p[0], s2 = p[1];
    Vec g(2);
    g[0] = r / s2;
    g[1] = -0.5 / s2 + 0.5 * r * r / (s2 * s2);
    return g;
  }
  Mat hessian(const Vec& p, double x, std::span<const double>) const override {
    double r = x - p[0], s2 = p[1];
    Mat h(2, 2);
    h(0, 0) = -1.0 / s2;
    h(0, 1) = h(1, 0) = -r / (s2 * s2);
    h(1, 1) = 0.5 / (s2 * s2) - r * r / (s2 * s2 * s2);
    return h;
  }
  double sample(const Vec& p, std::span<const double>, RngStream& rng) const override {
    return rng.normal(p[0], std::sqrt(p[1]));
  }
  Mat fisher_info(const Vec& p) const override {
    Mat i = Mat::Zero(2, 2);
    i(0, 0) = 1.0 / p[1];
    i(1, 1) = 0.5 / (p[1] * p[1]);
    return i;
  }
  std::pair<double, double> mean_variance(const Vec& p) const override {
    return {p[0], p[1]};
  }
  std::optional<FitResult> params_from_moments(double mu, double s2) const override {
    FitResult r;
    r.param = Vec(2);
    auto box = param_box();
    r.param[0] = box[0].clip(mu);
    r.param[1] = box[1].clip(s2);
    r.degenerate = !box[1].contains(s2);
    return r;
  }

  std::size_t stat_dim() const override { return 2; }
  void stats(double x, double* out) const override {
    out[0] = x;
    out[1] = x * x;
  }
  FitResult mle_from_stats(const double* s, double len) const override {
    FitResult r;
    r.param = Vec(2);
    double mu = s[0] / len;
    double v = s[1] / len - mu * mu;
    auto box = param_box();
    r.param[0] = mu;
    r.param[1] = box[1].clip(std::max(v, 0.0));
    r.degenerate = !(v > box[1].lo);
    return r;
  }
  double loglik_from_stats(const Vec& p, const double* s, double len) const override {
    double rss = s[1] - 2.0 * p[0] * s[0] + len * p[0] * p[0];
    return -0.5 * len * std::log(2.0 * M_PI * p[1]) - 0.5 * rss / p[1];
  }
};

// ---------------------------------------------------------------------------
// Bernoulli, box (c, 1-c)
// ---------------------------------------------------------------------------

class BernoulliFamily final : public ModelFamily {
public:
  explicit BernoulliFamily(double c) : c_(c) {
    if (!(c > 0 && c < 0.5)) throw ConfigError("bernoulli: box constant in (0, 0.5)");
  }
  std::string name() const override { return "bernoulli"; }
  std::size_t param_dim() const override { return 1; }
  std::vector<Interval> param_box() const override { return {{c_, 1.0 - c_}}; }
  bool discrete_support() const override { return true; }

  double log_density(const Vec& p, double x, std::span<const double>) const override {
    if (!is_nonneg_int(x) || x > 1.5)
      throw OutOfSupportError("bernoulli observation must be 0 or 1");
    return x > 0.5 ? std::log(p[0]) : std::log1p(-p[0]);
  }
  Vec score(const Vec& p, double x, std::span<const double>) const override {
    Vec g(1);
    g[0] = x > 0.5 ? 1.0 / p[0] : -1.0 / (1.0 - p[0]);
    return g;
  }
  Mat hessian(const Vec& p, double x, std::span<const double>) const override {
    Mat h(1, 1);
    h(0, 0) = x > 0.5 ? -1.0 / (p[0] * p[0]) : -1.0 / ((1.0 - p[0]) * (1.0 - p[0]));
    return h;
  }
  double sample(const Vec& p, std::span<const double>, RngStream& rng) const override {
    return rng.bernoulli(p[0]);
  }
  Mat fisher_info(const Vec& p) const override {
    Mat i(1, 1);
    i(0, 0) = 1.0 / (p[0] * (1.0 - p[0]));
    return i;
  }
  std::pair<double, double> mean_variance(const Vec& p) const override {
    return {p[0], p[0] * (1.0 - p[0])};
  }
  std::optional<FitResult> params_from_moments(double mu, double) const override {
    FitResult r;
    r.param = Vec(1);
    r.param[0] = param_box()[0].clip(mu);
    r.degenerate = !param_box()[0].contains(mu);
    return r;
  }

  std::size_t stat_dim() const override { return 1; }
  void stats(double x, double* out) const override { out[0] = x; }
  FitResult mle_from_stats(const double* s, double len) const override {
    FitResult r;
    r.param = Vec(1);
    double p = s[0] / len;
    r.param[0] = param_box()[0].clip(p);
    r.degenerate = !param_box()[0].contains(p);
    return r;
  }
  double loglik_from_stats(const Vec& p, const double* s, double len) const override {
    return s[0] * std::log(p[0]) + (len - s[0]) * std::log1p(-p[0]);
  }

private:
  double c_;
};

// ---------------------------------------------------------------------------
// Poisson, mean parameterization
// ---------------------------------------------------------------------------

class PoissonFamily final : public ModelFamily {
public:
  PoissonFamily(double lo, double hi) : box_{lo, hi} {
    if (!(lo > 0 && hi > lo)) throw ConfigError("poisson: invalid box");
  }
  std::string name() const override { return "poisson"; }
  std::size_t param_dim() const override { return 1; }
  std::vector<Interval> param_box() const override { return {box_}; }
  bool discrete_support() const override { return true; }

  double log_density(const Vec& p, double x, std::span<const double>) const override {
    if (!is_nonneg_int(x)) throw OutOfSupportError("poisson observation must be a nonnegative integer");
    return x * std::log(p[0]) - p[0] - std::lgamma(x + 1.0);
  }
  Vec score(const Vec& p, double x, std::span<const double>) const override {
    Vec g(1);
    g[0] = x / p[0] - 1.0;
    return g;
  }
  Mat hessian(const Vec& p, double x, std::span<const double>) const override {
    Mat h(1, 1);
    h(0, 0) = -x / (p[0] * p[0]);
    return h;
  }
  double sample(const Vec& p, std::span<const double>, RngStream& rng) const override {
    return rng.poisson(p[0]);
  }
  Mat fisher_info(const Vec& p) const override {
    Mat i(1, 1);
    i(0, 0) = 1.0 / p[0];
    return i;
  }
  std::pair<double, double> mean_variance(const Vec& p) const override {
    return {p[0], p[0]};
  }
  std::optional<FitResult> params_from_moments(double mu, double) const override {
    FitResult r;
    r.param = Vec(1);
    r.param[0] = box_.clip(mu);
    r.degenerate = !box_.contains(mu);
    return r;
  }

  std::size_t stat_dim() const override { return 2; }
  void stats(double x, double* out) const override {
    out[0] = x;
    out[1] = std::lgamma(x + 1.0);
  }
  FitResult mle_from_stats(const double* s, double len) const override {
    FitResult r;
    r.param = Vec(1);
    double lam = s[0] / len;
    r.param[0] = box_.clip(lam);
    r.degenerate = !box_.contains(lam);
    return r;
  }
  double loglik_from_stats(const Vec& p, const double* s, double len) const override {
    return s[0] * std::log(p[0]) - len * p[0] - s[1];
  }

private:
  Interval box_;
};

// ---------------------------------------------------------------------------
// Zero-inflated Poisson, param = (sigma, lambda)
// ---------------------------------------------------------------------------

class ZipFamily final : public ModelFamily {
public:
  ZipFamily(double c1, double c2, double c3) : c1_(c1), c2_(c2), c3_(c3) {
    if (!(c1 > 0 && c1 < 0.5 && c2 > 0 && c3 > c2))
      throw ConfigError("zip: invalid box constants");
  }
  std::string name() const override { return "zip"; }
  std::size_t param_dim() const override { return 2; }
  std::vector<Interval> param_box() const override {
    return {{c1_, 1.0 - c1_}, {c2_, c3_}};
  }
  bool discrete_support() const override { return true; }

  double log_density(const Vec& p, double x, std::span<const double>) const override {
    if (!is_nonneg_int(x)) throw OutOfSupportError("zip observation must be a nonnegative integer");
    double sg = p[0], lam = p[1];
    if (x < 0.5) return std::log(sg + (1.0 - sg) * std::exp(-lam));
    return std::log1p(-sg) - lam + x * std::log(lam) - std::lgamma(x + 1.0);
  }
  Vec score(const Vec& p, double x, std::span<const double>) const override {
    double sg = p[0], lam = p[1];
    Vec g(2);
    if (x < 0.5) {
      double e = std::exp(-lam);
      double D = sg + (1.0 - sg) * e;
      g[0] = (1.0 - e) / D;
      g[1] = -(1.0 - sg) * e / D;
    } else {
      g[0] = -1.0 / (1.0 - sg);
      g[1] = -1.0 + x / lam;
    }
    return g;
  }
  Mat hessian(const Vec& p, double x, std::span<const double>) const override {
    double sg = p[0], lam = p[1];
    Mat h = Mat::Zero(2, 2);
    if (x < 0.5) {
      double e = std::exp(-lam);
      double D = sg + (1.0 - sg) * e;
      double q = (1.0 - sg) * e / D;  // conditional Poisson-zero share
      h(0, 0) = -((1.0 - e) / D) * ((1.0 - e) / D);
      h(0, 1) = h(1, 0) = e / D + q * (1.0 - e) / D;
      h(1, 1) = q * (1.0 - q);
    } else {
      h(0, 0) = -1.0 / ((1.0 - sg) * (1.0 - sg));
      h(1, 1) = -x / (lam * lam);
    }
    return h;
  }
  double sample(const Vec& p, std::span<const double>, RngStream& rng) const override {
    if (rng.uniform() < p[0]) return 0.0;
    return rng.poisson(p[1]);
  }
  Mat fisher_info(const Vec& p) const override {
    // numerical expectation over the support, truncated far into the
    // Poisson tail
    double lam = p[1];
    int cap = static_cast<int>(lam + 20.0 * std::sqrt(lam) + 40.0);
    Mat acc = Mat::Zero(2, 2);
    for (int x = 0; x <= cap; ++x) {
      double w = std::exp(log_density(p, x, {}));
      Vec g = score(p, x, {});
      acc += w * (g * g.transpose());
    }
    return acc;
  }
  std::pair<double, double> mean_variance(const Vec& p) const override {
    double sg = p[0], lam = p[1];
    double mu = (1.0 - sg) * lam;
    return {mu, mu * (1.0 + sg * lam)};
  }
  std::optional<FitResult> params_from_moments(double mu, double s2) const override {
    // invert mu = (1-sg) lam, s2 = mu (1 + sg lam)
    FitResult r;
    r.param = Vec(2);
    auto box = param_box();
    if (mu <= 0.0) {
      r.param[0] = box[0].clip(0.5);
      r.param[1] = box[1].clip(box[1].lo);
      r.degenerate = true;
      return r;
    }
    double excess = s2 / mu - 1.0;  // = sg lam
    if (excess <= 0.0) {
      r.param[0] = box[0].clip(box[0].lo);
      r.param[1] = box[1].clip(mu);
      r.degenerate = true;
      return r;
    }
    double lam = mu + excess;
    double sg = excess / lam;
    r.param[0] = box[0].clip(sg);
    r.param[1] = box[1].clip(lam);
    r.degenerate = !(box[0].contains(sg) && box[1].contains(lam));
    return r;
  }

  std::size_t stat_dim() const override { return 3; }
  void stats(double x, double* out) const override {
    out[0] = x < 0.5 ? 1.0 : 0.0;
    out[1] = x;
    out[2] = x < 0.5 ? 0.0 : std::lgamma(x + 1.0);
  }
  double loglik_from_stats(const Vec& p, const double* s, double len) const override {
    double sg = p[0], lam = p[1];
    double n0 = s[0], S = s[1], G = s[2];
    double npos = len - n0;
    return n0 * std::log(sg + (1.0 - sg) * std::exp(-lam)) +
           npos * (std::log1p(-sg) - lam) + S * std::log(lam) - G;
  }
  FitResult mle_from_stats(const double* s, double len) const override {
    return stat_newton(s, len, std::nullopt);
  }

  // Newton in (sigma, lambda) on the sufficient statistics; O(1) per step.
  FitResult stat_newton(const double* s, double len,
                        std::optional<Vec> warm) const {
    auto box = param_box();
    const double n0 = s[0], S = s[1];
    const double npos = len - n0;
    FitResult r;
    if (S <= 0.0) {  // all-zero segment: lambda unidentified
      r.param = Vec(2);
      r.param[0] = box[0].clip(1.0 - c1_);
      r.param[1] = box[1].clip(c2_);
      r.degenerate = true;
      return r;
    }

    auto at_edge = [&](const Vec& p, int j) {
      double margin = 4e-9 * std::min(box[static_cast<std::size_t>(j)].hi -
                                          box[static_cast<std::size_t>(j)].lo,
                                      1.0);
      int out = 0;
      if (p[j] <= box[static_cast<std::size_t>(j)].lo + margin) out = -1;
      if (p[j] >= box[static_cast<std::size_t>(j)].hi - margin) out = 1;
      return out;
    };

    Vec theta = warm ? *warm : moment_init(n0, S, len);
    double ll = loglik_from_stats(theta, s, len) / len;
    bool converged = false;
    double score_norm = 0.0;
    int iter = 0;
    for (; iter < 100; ++iter) {
      double sg = theta[0], lam = theta[1];
      double e = std::exp(-lam);
      double D = sg + (1.0 - sg) * e;
      double q = (1.0 - sg) * e / D;
      Vec g(2);
      g[0] = (n0 * (1.0 - e) / D - npos / (1.0 - sg)) / len;
      g[1] = (-n0 * q - npos + S / lam) / len;
      score_norm = g.lpNorm<Eigen::Infinity>();
      Mat H(2, 2);
      H(0, 0) = (-n0 * ((1.0 - e) / D) * ((1.0 - e) / D) -
                 npos / ((1.0 - sg) * (1.0 - sg))) / len;
      H(0, 1) = H(1, 0) = n0 * (e / D + q * (1.0 - e) / D) / len;
      H(1, 1) = (n0 * q * (1.0 - q) - S / (lam * lam)) / len;

      // drop box-pinned coordinates whose score points outward
      bool pin0 = (at_edge(theta, 0) < 0 && g[0] < 0) ||
                  (at_edge(theta, 0) > 0 && g[0] > 0);
      bool pin1 = (at_edge(theta, 1) < 0 && g[1] < 0) ||
                  (at_edge(theta, 1) > 0 && g[1] > 0);
      double free_score =
          std::max(pin0 ? 0.0 : std::abs(g[0]), pin1 ? 0.0 : std::abs(g[1]));
      if (free_score < 1e-11) {
        converged = true;
        break;
      }

      Vec step = Vec::Zero(2);
      if (!pin0 && !pin1) {
        Eigen::LLT<Mat> llt(-H);
        if (llt.info() == Eigen::Success)
          step = llt.solve(g);
        else
          step = g;
      } else if (!pin0) {
        step[0] = H(0, 0) < 0 ? -g[0] / H(0, 0) : g[0];
      } else {
        step[1] = H(1, 1) < 0 ? -g[1] / H(1, 1) : g[1];
      }

      double scale = 1.0;
      Vec cand = theta;
      double ll_cand = ll;
      for (int half = 0; half < 40; ++half) {
        cand = theta + scale * step;
        cand[0] = box[0].clip(cand[0]);
        cand[1] = box[1].clip(cand[1]);
        ll_cand = loglik_from_stats(cand, s, len) / len;
        if (ll_cand >= ll - 1e-14) break;
        scale *= 0.5;
      }
      double moved = (cand - theta).lpNorm<Eigen::Infinity>();
      theta = cand;
      ll = ll_cand;
      if (moved < 1e-12) {
        converged = true;
        break;
      }
    }
    if (!converged)
      throw NoConvergenceError("zip: segment solver failed to converge");
    r.param = theta;
    r.iterations = iter;
    if ((at_edge(theta, 0) != 0 || at_edge(theta, 1) != 0) && score_norm > 1e-8)
      r.degenerate = true;
    return r;
  }

private:
  Vec moment_init(double n0, double S, double len) const {
    auto box = param_box();
    double mbar = S / len;
    double p0 = n0 / len;
    Vec v(2);
    if (p0 <= std::exp(-mbar) + 1e-12) {  // no visible zero inflation
      v[0] = box[0].clip(2.0 * c1_);
      v[1] = box[1].clip(mbar);
      return v;
    }
    // solve p0 = 1 - (mbar/lam)(1 - exp(-lam)) by bisection
    double lo = std::max(mbar, box[1].lo), hi = box[1].hi;
    for (int i = 0; i < 60; ++i) {
      double mid = 0.5 * (lo + hi);
      double val = 1.0 - (mbar / mid) * (1.0 - std::exp(-mid)) - p0;
      if (val < 0.0)
        lo = mid;
      else
        hi = mid;
    }
    double lam = 0.5 * (lo + hi);
    v[1] = box[1].clip(lam);
    v[0] = box[0].clip(1.0 - mbar / v[1]);
    return v;
  }

  double c1_, c2_, c3_;
};

// ---------------------------------------------------------------------------
// Probit, P(X=1) = Phi(y' beta)
// ---------------------------------------------------------------------------

class ProbitFamily final : public ModelFamily {
public:
  ProbitFamily(std::size_t dim, double b) : dim_(dim), b_(b) {
    if (dim < 1) throw ConfigError("probit: covariate dimension must be >= 1");
  }
  std::string name() const override { return "probit"; }
  std::size_t param_dim() const override { return dim_; }
  std::vector<Interval> param_box() const override {
    return std::vector<Interval>(dim_, Interval{-b_, b_});
  }
  bool uses_covariates() const override { return true; }
  bool discrete_support() const override { return true; }

  double log_density(const Vec& p, double x, std::span<const double> y) const override {
    if (!is_nonneg_int(x) || x > 1.5)
      throw OutOfSupportError("probit response must be 0 or 1");
    double z = dot(p, y);
    return x > 0.5 ? norm_log_cdf(z) : norm_log_cdf(-z);
  }
  Vec score(const Vec& p, double x, std::span<const double> y) const override {
    double z = dot(p, y);
    double g = x > 0.5 ? mills_ratio(z) : -mills_ratio(-z);
    Vec out(dim_);
    for (std::size_t j = 0; j < dim_; ++j) out[j] = g * y[j];
    return out;
  }
  Mat hessian(const Vec& p, double x, std::span<const double> y) const override {
    double z = dot(p, y);
    double w;
    if (x > 0.5) {
      double r = mills_ratio(z);
      w = -r * (r + z);
    } else {
      double s = mills_ratio(-z);
      w = -s * (s - z);
    }
    Mat h(dim_, dim_);
    for (std::size_t a = 0; a < dim_; ++a)
      for (std::size_t b = 0; b < dim_; ++b) h(a, b) = w * y[a] * y[b];
    return h;
  }
  double sample(const Vec& p, std::span<const double> y, RngStream& rng) const override {
    return rng.bernoulli(norm_cdf(dot(p, y)));
  }
  Mat fisher_info(const Vec&) const override {
    throw ConfigError("probit Fisher information requires covariates");
  }
  Mat fisher_info(const Vec& p, const SegmentView& seg) const override {
    Mat acc = Mat::Zero(dim_, dim_);
    for (std::size_t i = 0; i < seg.size(); ++i) {
      auto y = seg.cov(i);
      double z = dot(p, y);
      double w = mills_ratio(z) * mills_ratio(-z);  // phi^2 / (Phi (1-Phi))
      for (std::size_t a = 0; a < dim_; ++a)
        for (std::size_t b = 0; b < dim_; ++b) acc(a, b) += w * y[a] * y[b];
    }
    return acc / static_cast<double>(seg.size());
  }
  std::pair<double, double> mean_variance(const Vec&) const override {
    throw ConfigError("probit moments are covariate-conditional");
  }
  std::pair<double, double> mean_variance(const Vec& p,
                                          std::span<const double> y) const override {
    double q = norm_cdf(dot(p, y));
    return {q, q * (1.0 - q)};
  }

protected:
  Vec initial_guess(const SegmentView&) const override { return Vec::Zero(dim_); }

private:
  std::size_t dim_;
  double b_;
};

// ---------------------------------------------------------------------------
// Tobit, X = max(0, y' beta + eps), eps ~ N(0,1)
// ---------------------------------------------------------------------------

class TobitFamily final : public ModelFamily {
public:
  TobitFamily(std::size_t dim, double b) : dim_(dim), b_(b) {
    if (dim < 1) throw ConfigError("tobit: covariate dimension must be >= 1");
  }
  std::string name() const override { return "tobit"; }
  std::size_t param_dim() const override { return dim_; }
  std::vector<Interval> param_box() const override {
    return std::vector<Interval>(dim_, Interval{-b_, b_});
  }
  bool uses_covariates() const override { return true; }
  bool discrete_support() const override { return false; }

  double log_density(const Vec& p, double x, std::span<const double> y) const override {
    if (x < -1e-12) throw OutOfSupportError("tobit response must be nonnegative");
    double z = dot(p, y);
    if (x <= 0.0) return norm_log_cdf(-z);
    double r = x - z;
    return -0.5 * r * r - 0.5 * std::log(2.0 * M_PI);
  }
  Vec score(const Vec& p, double x, std::span<const double> y) const override {
    double z = dot(p, y);
    double g = x <= 0.0 ? -mills_ratio(-z) : (x - z);
    Vec out(dim_);
    for (std::size_t j = 0; j < dim_; ++j) out[j] = g * y[j];
    return out;
  }
  Mat hessian(const Vec& p, double x, std::span<const double> y) const override {
    double z = dot(p, y);
    double w;
    if (x <= 0.0) {
      double s = mills_ratio(-z);
      w = -s * (s - z);
    } else {
      w = -1.0;
    }
    Mat h(dim_, dim_);
    for (std::size_t a = 0; a < dim_; ++a)
      for (std::size_t b = 0; b < dim_; ++b) h(a, b) = w * y[a] * y[b];
    return h;
  }
  double sample(const Vec& p, std::span<const double> y, RngStream& rng) const override {
    double v = dot(p, y) + rng.normal();
    return v > 0.0 ? v : 0.0;
  }
  Mat fisher_info(const Vec&) const override {
    throw ConfigError("tobit Fisher information requires covariates");
  }
  Mat fisher_info(const Vec& p, const SegmentView& seg) const override {
    Mat acc = Mat::Zero(dim_, dim_);
    for (std::size_t i = 0; i < seg.size(); ++i) {
      auto y = seg.cov(i);
      double z = dot(p, y);
      double phi = norm_pdf(z), Phi = norm_cdf(z);
      double w = phi * phi / std::max(1.0 - Phi, 1e-300) + Phi - z * phi;
      for (std::size_t a = 0; a < dim_; ++a)
        for (std::size_t b = 0; b < dim_; ++b) acc(a, b) += w * y[a] * y[b];
    }
    return acc / static_cast<double>(seg.size());
  }
  std::pair<double, double> mean_variance(const Vec&) const override {
    throw ConfigError("tobit moments are covariate-conditional");
  }
  std::pair<double, double> mean_variance(const Vec& p,
                                          std::span<const double> y) const override {
    double z = dot(p, y);
    double m = z * norm_cdf(z) + norm_pdf(z);
    double ex2 = (1.0 + z * z) * norm_cdf(z) + z * norm_pdf(z);
    return {m, ex2 - m * m};
  }

  FitResult segment_mle(const SegmentView& seg,
                        const SolveOptions& opts = {}) const override {
    // Amemiya (T2): the covariate Gram matrix must be well conditioned
    if (seg.size() >= dim_ + 1) {
      Mat gram = Mat::Zero(dim_, dim_);
      for (std::size_t i = 0; i < seg.size(); ++i) {
        auto y = seg.cov(i);
        for (std::size_t a = 0; a < dim_; ++a)
          for (std::size_t b = 0; b < dim_; ++b) gram(a, b) += y[a] * y[b];
      }
      gram /= static_cast<double>(seg.size());
      Eigen::SelfAdjointEigenSolver<Mat> es(gram);
      if (es.eigenvalues().minCoeff() < 1e-8)
        throw DegenerateSegmentError(
            "tobit: covariate Gram matrix is rank deficient on this segment");
    }
    return ModelFamily::segment_mle(seg, opts);
  }

protected:
  Vec initial_guess(const SegmentView& seg) const override {
    // least squares on the uncensored subsample, ridge-stabilized
    Mat xtx = Mat::Identity(dim_, dim_) * 1e-8;
    Vec xty = Vec::Zero(dim_);
    std::size_t used = 0;
    for (std::size_t i = 0; i < seg.size(); ++i) {
      if (seg.xs[i] <= 0.0) continue;
      auto y = seg.cov(i);
      for (std::size_t a = 0; a < dim_; ++a) {
        xty[a] += y[a] * seg.xs[i];
        for (std::size_t b = 0; b < dim_; ++b) xtx(a, b) += y[a] * y[b];
      }
      ++used;
    }
    if (used < dim_) return Vec::Zero(dim_);
    return xtx.ldlt().solve(xty);
  }

private:
  std::size_t dim_;
  double b_;
};

// ---------------------------------------------------------------------------
// One-parameter natural exponential family, f(x) = exp(lambda x - beta(lambda) + h(x))
// ---------------------------------------------------------------------------

class NefFamily final : public ModelFamily {
public:
  struct Spec {
    std::string name;
    std::function<double(double)> beta;
    std::function<double(double)> beta_prime;
    std::function<double(double)> beta_second;
    std::function<double(double)> beta_prime_inv;
    std::function<double(double)> log_base;  // h(x)
    std::function<bool(double)> in_support;
    std::function<double(double, RngStream&)> sampler;
    Interval box;
    bool discrete = true;
  };

  explicit NefFamily(Spec spec) : s_(std::move(spec)) {}

  std::string name() const override { return s_.name; }
  std::size_t param_dim() const override { return 1; }
  std::vector<Interval> param_box() const override { return {s_.box}; }
  bool discrete_support() const override { return s_.discrete; }

  double log_density(const Vec& p, double x, std::span<const double>) const override {
    if (!s_.in_support(x)) throw OutOfSupportError(s_.name + ": observation outside support");
    return p[0] * x - s_.beta(p[0]) + s_.log_base(x);
  }
  Vec score(const Vec& p, double x, std::span<const double>) const override {
    Vec g(1);
    g[0] = x - s_.beta_prime(p[0]);
    return g;
  }
  Mat hessian(const Vec& p, double, std::span<const double>) const override {
    Mat h(1, 1);
    h(0, 0) = -s_.beta_second(p[0]);
    return h;
  }
  double sample(const Vec& p, std::span<const double>, RngStream& rng) const override {
    return s_.sampler(p[0], rng);
  }
  Mat fisher_info(const Vec& p) const override {
    Mat i(1, 1);
    i(0, 0) = s_.beta_second(p[0]);
    return i;
  }
  std::pair<double, double> mean_variance(const Vec& p) const override {
    return {s_.beta_prime(p[0]), s_.beta_second(p[0])};
  }
  std::optional<FitResult> params_from_moments(double mu, double) const override {
    return fit_mean(mu);
  }

  std::size_t stat_dim() const override { return 2; }
  void stats(double x, double* out) const override {
    out[0] = x;
    out[1] = s_.log_base(x);
  }
  FitResult mle_from_stats(const double* s, double len) const override {
    return *fit_mean(s[0] / len);
  }
  double loglik_from_stats(const Vec& p, const double* s, double len) const override {
    return p[0] * s[0] - len * s_.beta(p[0]) + s[1];
  }

private:
  std::optional<FitResult> fit_mean(double mbar) const {
    FitResult r;
    r.param = Vec(1);
    // mean range attainable inside the box
    double lo_mean = s_.beta_prime(s_.box.lo + 1e-12 * (s_.box.hi - s_.box.lo));
    double hi_mean = s_.beta_prime(s_.box.hi - 1e-12 * (s_.box.hi - s_.box.lo));
    if (mbar <= lo_mean) {
      r.param[0] = s_.box.clip(s_.box.lo);
      r.degenerate = true;
      return r;
    }
    if (mbar >= hi_mean) {
      r.param[0] = s_.box.clip(s_.box.hi);
      r.degenerate = true;
      return r;
    }
    r.param[0] = s_.box.clip(s_.beta_prime_inv(mbar));
    return r;
  }

  Spec s_;
};

// ---------------------------------------------------------------------------
// Curved Normal N(lambda, lambda^2), solver parameterization delta = 1/lambda
// ---------------------------------------------------------------------------

class CurvedNormalFamily final : public ModelFamily {
public:
  CurvedNormalFamily(double lo, double hi) : box_{lo, hi} {
    if (!(lo > 0 && hi > lo)) throw ConfigError("curved-normal: invalid box");
  }
  std::string name() const override { return "curved-normal"; }
  std::size_t param_dim() const override { return 1; }
  std::vector<Interval> param_box() const override { return {box_}; }
  bool discrete_support() const override { return false; }

  double log_density(const Vec& p, double x, std::span<const double>) const override {
    double d = p[0];
    double r = x * d - 1.0;
    return std::log(d) - 0.5 * r * r - 0.5 * std::log(2.0 * M_PI);
  }
  Vec score(const Vec& p, double x, std::span<const double>) const override {
    Vec g(1);
    g[0] = 1.0 / p[0] - x * x * p[0] + x;
    return g;
  }
  Mat hessian(const Vec& p, double x, std::span<const double>) const override {
    Mat h(1, 1);
    h(0, 0) = -1.0 / (p[0] * p[0]) - x * x;
    return h;
  }
  double sample(const Vec& p, std::span<const double>, RngStream& rng) const override {
    double lam = 1.0 / p[0];
    return rng.normal(lam, std::abs(lam));
  }
  Mat fisher_info(const Vec& p) const override {
    Mat i(1, 1);
    i(0, 0) = 3.0 / (p[0] * p[0]);
    return i;
  }
  std::pair<double, double> mean_variance(const Vec& p) const override {
    double lam = 1.0 / p[0];
    return {lam, lam * lam};
  }
  std::optional<FitResult> params_from_moments(double mu, double) const override {
    FitResult r;
    r.param = Vec(1);
    if (mu <= 0.0) {
      r.param[0] = box_.clip(box_.hi);
      r.degenerate = true;
      return r;
    }
    r.param[0] = box_.clip(1.0 / mu);
    r.degenerate = !box_.contains(1.0 / mu);
    return r;
  }

  std::size_t stat_dim() const override { return 2; }
  void stats(double x, double* out) const override {
    out[0] = x;
    out[1] = x * x;
  }
  FitResult mle_from_stats(const double* s, double len) const override {
    FitResult r;
    r.param = Vec(1);
    double S = s[0], Q = s[1];
    if (Q <= 0.0) {
      r.param[0] = box_.clip(box_.hi);
      r.degenerate = true;
      return r;
    }
    // positive root of delta^2 Q - delta S - len = 0
    double d = (S + std::sqrt(S * S + 4.0 * len * Q)) / (2.0 * Q);
    r.param[0] = box_.clip(d);
    r.degenerate = !box_.contains(d);
    return r;
  }
  double loglik_from_stats(const Vec& p, const double* s, double len) const override {
    double d = p[0];
    return len * std::log(d) - 0.5 * (s[1] * d * d + len - 2.0 * s[0] * d) -
           0.5 * len * std::log(2.0 * M_PI);
  }

private:
  Interval box_;
};

// ---------------------------------------------------------------------------

FamilyPtr make_family(const std::string& name,
                      const std::map<std::string, double>& opts) {
  if (name == "normal-known")
    return std::make_shared<NormalKnownVar>(opt_or(opts, "sigma2", 1.0));
  if (name == "normal") return std::make_shared<NormalFamily>();
  if (name == "bernoulli")
    return std::make_shared<BernoulliFamily>(opt_or(opts, "box_c", 1e-6));
  if (name == "poisson")
    return std::make_shared<PoissonFamily>(opt_or(opts, "box_lo", 1e-6),
                                           opt_or(opts, "box_hi", 1e9));
  if (name == "zip")
    return std::make_shared<ZipFamily>(opt_or(opts, "c1", 0.01),
                                       opt_or(opts, "c2", 0.01),
                                       opt_or(opts, "c3", 100.0));
  if (name == "probit")
    return std::make_shared<ProbitFamily>(
        static_cast<std::size_t>(opt_or(opts, "dim", 1.0)),
        opt_or(opts, "box_b", 15.0));
  if (name == "tobit")
    return std::make_shared<TobitFamily>(
        static_cast<std::size_t>(opt_or(opts, "dim", 1.0)),
        opt_or(opts, "box_b", 15.0));
  if (name == "nef-poisson") {
    NefFamily::Spec s;
    s.name = "nef-poisson";
    s.beta = [](double l) { return std::exp(l); };
    s.beta_prime = [](double l) { return std::exp(l); };
    s.beta_second = [](double l) { return std::exp(l); };
    s.beta_prime_inv = [](double m) { return std::log(m); };
    s.log_base = [](double x) { return -std::lgamma(x + 1.0); };
    s.in_support = [](double x) { return is_nonneg_int(x); };
    s.sampler = [](double l, RngStream& rng) {
      return static_cast<double>(rng.poisson(std::exp(l)));
    };
    s.box = {opt_or(opts, "box_lo", std::log(1e-4)),
             opt_or(opts, "box_hi", std::log(1e4))};
    s.discrete = true;
    return std::make_shared<NefFamily>(std::move(s));
  }
  if (name == "curved-normal")
    return std::make_shared<CurvedNormalFamily>(opt_or(opts, "box_lo", 1e-3),
                                                opt_or(opts, "box_hi", 1e3));
  throw ConfigError("unknown model family: " + name);
}

std::vector<std::string> family_names() {
  return {"normal-known", "normal", "bernoulli", "poisson", "zip",
          "probit",       "tobit",  "nef-poisson", "curved-normal"};
}

}  // namespace panelbreak
