#include "panelbreak/mle.hpp"

#include <cmath>
#include <limits>

namespace panelbreak {

namespace {

SegmentView pre_segment(const PanelData& panel, std::size_t k, std::size_t b) {
  SegmentView v;
  v.xs = {panel.values.data() + k * panel.n, b};
  if (panel.has_covariates()) {
    v.covs = panel.covariates.data() + k * panel.n * panel.d;
    v.d = panel.d;
  }
  return v;
}

SegmentView post_segment(const PanelData& panel, std::size_t k, std::size_t b) {
  SegmentView v;
  v.xs = {panel.values.data() + k * panel.n + b, panel.n - b};
  if (panel.has_covariates()) {
    v.covs = panel.covariates.data() + (k * panel.n + b) * panel.d;
    v.d = panel.d;
  }
  return v;
}

double segment_loglik(const ModelFamily& family, const Vec& param,
                      const SegmentView& seg) {
  double s = 0.0;
  for (std::size_t i = 0; i < seg.size(); ++i)
    s += family.log_density(param, seg.xs[i],
                            seg.has_covs() ? seg.cov(i) : std::span<const double>{});
  return s;
}

Vec box_center_param(const ModelFamily& family) {
  auto box = family.param_box();
  Vec v(box.size());
  for (std::size_t j = 0; j < box.size(); ++j)
    v[static_cast<Eigen::Index>(j)] = box[j].center();
  return v;
}

// Prefix sums of the family's sufficient statistics, [k][t*p + j], t = 0..n.
struct StatPrefix {
  std::vector<std::vector<double>> acc;
  std::size_t p = 0;

  void seg(std::size_t k, std::size_t lo, std::size_t hi, double* out) const {
    for (std::size_t j = 0; j < p; ++j)
      out[j] = acc[k][hi * p + j] - acc[k][lo * p + j];
  }
};

StatPrefix build_stat_prefix(const PanelData& panel, const ModelFamily& family) {
  StatPrefix sp;
  sp.p = family.stat_dim();
  sp.acc.assign(panel.m, std::vector<double>((panel.n + 1) * sp.p, 0.0));
  std::vector<double> buf(sp.p);
  for (std::size_t k = 0; k < panel.m; ++k) {
    for (std::size_t t = 0; t < panel.n; ++t) {
      family.stats(panel.x(k, t), buf.data());
      for (std::size_t j = 0; j < sp.p; ++j)
        sp.acc[k][(t + 1) * sp.p + j] = sp.acc[k][t * sp.p + j] + buf[j];
    }
  }
  return sp;
}

}  // namespace

MleCriterionValue mle_criterion(const PanelData& panel, const ModelFamily& family,
                                std::size_t b_index,
                                const std::vector<Vec>* warm_theta,
                                const std::vector<Vec>* warm_eta) {
  MleCriterionValue out;
  out.theta.resize(panel.m);
  out.eta.resize(panel.m);
  out.theta_degenerate.assign(panel.m, false);
  out.eta_degenerate.assign(panel.m, false);

  double total = 0.0;
  for (std::size_t k = 0; k < panel.m; ++k) {
    SegmentView pre = pre_segment(panel, k, b_index);
    SegmentView post = post_segment(panel, k, b_index);
    SolveOptions opts;
    opts.multistart = (warm_theta == nullptr);
    if (warm_theta) opts.warm_start = (*warm_theta)[k];
    FitResult fpre;
    try {
      fpre = family.segment_mle(pre, opts);
    } catch (const DegenerateSegmentError&) {
      fpre.param = warm_theta ? (*warm_theta)[k] : box_center_param(family);
      fpre.degenerate = true;
    } catch (const NoConvergenceError& e) {
      throw NoConvergenceError(std::string(e.what()) + " at series " +
                               std::to_string(k) + ", break " +
                               std::to_string(b_index) + " (pre)");
    }
    SolveOptions opts2;
    opts2.multistart = (warm_eta == nullptr);
    if (warm_eta) opts2.warm_start = (*warm_eta)[k];
    FitResult fpost;
    try {
      fpost = family.segment_mle(post, opts2);
    } catch (const DegenerateSegmentError&) {
      fpost.param = warm_eta ? (*warm_eta)[k] : box_center_param(family);
      fpost.degenerate = true;
    } catch (const NoConvergenceError& e) {
      throw NoConvergenceError(std::string(e.what()) + " at series " +
                               std::to_string(k) + ", break " +
                               std::to_string(b_index) + " (post)");
    }

    out.theta[k] = fpre.param;
    out.eta[k] = fpost.param;
    out.theta_degenerate[k] = fpre.degenerate;
    out.eta_degenerate[k] = fpost.degenerate;
    total += segment_loglik(family, fpre.param, pre) +
             segment_loglik(family, fpost.param, post);
  }
  out.value = total / static_cast<double>(panel.n);
  return out;
}

MleProfile mle_profile(const PanelData& panel, const ModelFamily& family,
                       const TrimWindow& window, bool warm_starts) {
  AdmissibleRange range = validate_panel(panel, window);
  if (family.uses_covariates() && !panel.has_covariates())
    throw ConfigError(family.name() + " requires panel covariates");

  MleProfile prof;
  prof.lo = range.lo;
  prof.values.reserve(range.count());
  prof.theta_at.reserve(range.count());
  prof.eta_at.reserve(range.count());

  if (family.stat_dim() > 0) {
    // O(1) per (k, b) via prefix sums of sufficient statistics
    StatPrefix sp = build_stat_prefix(panel, family);
    std::vector<double> pre(sp.p), post(sp.p);
    for (std::size_t b = range.lo; b <= range.hi; ++b) {
      double total = 0.0;
      std::vector<Vec> th(panel.m), et(panel.m);
      for (std::size_t k = 0; k < panel.m; ++k) {
        sp.seg(k, 0, b, pre.data());
        sp.seg(k, b, panel.n, post.data());
        double len1 = static_cast<double>(b);
        double len2 = static_cast<double>(panel.n - b);
        FitResult f1 = family.mle_from_stats(pre.data(), len1);
        FitResult f2 = family.mle_from_stats(post.data(), len2);
        if (f1.degenerate) prof.degenerate_flags.push_back({k, b, true});
        if (f2.degenerate) prof.degenerate_flags.push_back({k, b, false});
        total += family.loglik_from_stats(f1.param, pre.data(), len1) +
                 family.loglik_from_stats(f2.param, post.data(), len2);
        th[k] = std::move(f1.param);
        et[k] = std::move(f2.param);
      }
      prof.values.push_back(total / static_cast<double>(panel.n));
      prof.theta_at.push_back(std::move(th));
      prof.eta_at.push_back(std::move(et));
    }
    return prof;
  }

  std::vector<Vec> warm_theta, warm_eta;
  const std::vector<Vec>* wt = nullptr;
  const std::vector<Vec>* we = nullptr;
  for (std::size_t b = range.lo; b <= range.hi; ++b) {
    MleCriterionValue v = mle_criterion(panel, family, b, wt, we);
    for (std::size_t k = 0; k < panel.m; ++k) {
      if (v.theta_degenerate[k]) prof.degenerate_flags.push_back({k, b, true});
      if (v.eta_degenerate[k]) prof.degenerate_flags.push_back({k, b, false});
    }
    prof.values.push_back(v.value);
    prof.theta_at.push_back(v.theta);
    prof.eta_at.push_back(v.eta);
    if (warm_starts) {
      warm_theta = prof.theta_at.back();
      warm_eta = prof.eta_at.back();
      wt = &warm_theta;
      we = &warm_eta;
    }
  }
  return prof;
}

BreakEstimate estimate_mle(const PanelData& panel, const ModelFamily& family,
                           const TrimWindow& window) {
  MleProfile prof = mle_profile(panel, family, window);

  std::size_t best = 0;
  double best_v = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < prof.values.size(); ++i) {
    if (prof.values[i] > best_v) {
      best_v = prof.values[i];
      best = i;
    }
  }

  BreakEstimate est;
  est.method = Method::MLE;
  est.profile_lo = prof.lo;
  est.profile = prof.values;
  est.b_index = prof.lo + best;
  est.tau_hat = static_cast<double>(est.b_index) / static_cast<double>(panel.n);
  est.segment_params.theta.resize(panel.m);
  est.segment_params.eta.resize(panel.m);
  est.segment_params.theta_degenerate.assign(panel.m, false);
  est.segment_params.eta_degenerate.assign(panel.m, false);
  for (std::size_t k = 0; k < panel.m; ++k) {
    const Vec& t = prof.theta_at[best][k];
    const Vec& e = prof.eta_at[best][k];
    est.segment_params.theta[k].assign(t.data(), t.data() + t.size());
    est.segment_params.eta[k].assign(e.data(), e.data() + e.size());
  }
  for (const auto& f : prof.degenerate_flags) {
    if (f.b != est.b_index) continue;
    if (f.pre)
      est.segment_params.theta_degenerate[f.k] = true;
    else
      est.segment_params.eta_degenerate[f.k] = true;
  }
  return est;
}

GammaMle gamma_mle_estimate(const PanelData& panel, const ModelFamily& family,
                            const BreakEstimate& est) {
  if (est.method != Method::MLE)
    throw ConfigError("gamma_mle_estimate expects a maximum likelihood estimate");
  double num = 0.0, denom = 0.0;
  for (std::size_t k = 0; k < panel.m; ++k) {
    const auto& tv = est.segment_params.theta[k];
    const auto& ev = est.segment_params.eta[k];
    Vec diff(tv.size());
    for (std::size_t j = 0; j < tv.size(); ++j) diff[j] = tv[j] - ev[j];
    Vec theta = Eigen::Map<const Vec>(tv.data(), static_cast<Eigen::Index>(tv.size()));
    Mat info;
    if (family.uses_covariates()) {
      SegmentView pre;
      pre.xs = {panel.values.data() + k * panel.n, est.b_index};
      pre.covs = panel.covariates.data() + k * panel.n * panel.d;
      pre.d = panel.d;
      info = family.fisher_info(theta, pre);
    } else {
      info = family.fisher_info(theta);
    }
    num += diff.dot(info * diff);
    denom += diff.squaredNorm();
  }
  if (denom <= 0.0)
    throw ZeroSignalError("gamma_mle undefined: all parameter gaps are zero");
  return {num / denom, num};
}

}  // namespace panelbreak
