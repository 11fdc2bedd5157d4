#include "panelbreak/limit.hpp"

#include <algorithm>
#include <cmath>

#include "panelbreak/stats.hpp"

namespace panelbreak {

namespace {

// Argmax bookkeeping with the pinned tie rule: smallest |h| first, then the
// negative side.
struct ArgmaxTracker {
  double best_v = 0.0;
  double best_h = 0.0;

  void consider(double v, double h) {
    if (v > best_v) {
      best_v = v;
      best_h = h;
      return;
    }
    if (v == best_v) {
      double ah = std::abs(h), ab = std::abs(best_h);
      if (ah < ab || (ah == ab && h < best_h)) best_h = h;
    }
  }
};

void check_regime_b(const LimitLawSpec& spec) {
  if (!(spec.gamma_L > 0.0 && spec.gamma_R > 0.0))
    throw ConfigError("regime b requires gamma_L, gamma_R > 0");
}

void check_regime_c(const LimitLawSpec& spec) {
  if (!(spec.c1_sq > 0.0) && spec.k0.empty())
    throw ConfigError("regime c requires c1_sq > 0 or a nonempty K0 component");
  if (spec.c1_sq < 0.0 || spec.gamma_L_star < 0.0 || spec.gamma_R_star < 0.0)
    throw ConfigError("regime c scales must be nonnegative");
}

// One reclassified observation's criterion increment for a K0 series. The
// drift is negative on both sides: the increment compares the fit under the
// segment the observation now joins ("far" parameters) against its own law.
double k0_increment(const LimitLawSpec& spec, bool right_side, RngStream& rng) {
  double total = 0.0;
  for (const auto& comp : spec.k0) {
    const ModelFamily& near_fam = right_side ? *comp.post_family : *comp.pre_family;
    const Vec& near_par = right_side ? comp.post_param : comp.pre_param;
    const ModelFamily& far_fam = right_side ? *comp.pre_family : *comp.post_family;
    const Vec& far_par = right_side ? comp.pre_param : comp.post_param;
    double z = near_fam.sample(near_par, {}, rng);
    if (spec.form == CriterionForm::LSE) {
      double mu_near = near_fam.mean_variance(near_par).first;
      double mu_far = far_fam.mean_variance(far_par).first;
      total += (z - mu_near) * (z - mu_near) - (z - mu_far) * (z - mu_far);
    } else {
      total += far_fam.log_density(far_par, z, {}) -
               near_fam.log_density(near_par, z, {});
    }
  }
  return total;
}

}  // namespace

RegimeBDraw sim_regime_b(const LimitLawSpec& spec, double step, double horizon,
                         RngStream& rng) {
  check_regime_b(spec);
  if (!(step > 0.0) || !(horizon > 0.0))
    throw ConfigError("regime b simulation needs step > 0 and horizon > 0");

  const double sd_l = spec.gamma_L * std::sqrt(step);
  const double sd_r = spec.gamma_R * std::sqrt(step);
  ArgmaxTracker arg;
  double cum_l = 0.0, cum_r = 0.0;
  std::size_t steps = 0;
  auto target = static_cast<std::size_t>(std::llround(horizon / step));
  if (target < 1) target = 1;

  RegimeBDraw out;
  for (;;) {
    for (std::size_t j = steps + 1; j <= target; ++j) {
      double h = static_cast<double>(j) * step;
      cum_l += sd_l * rng.normal();
      arg.consider(cum_l - 0.5 * h, -h);
      cum_r += sd_r * rng.normal();
      arg.consider(cum_r - 0.5 * h, h);
    }
    steps = target;
    double extent = static_cast<double>(steps) * step;
    if (std::abs(arg.best_h) < 0.95 * extent) break;
    if (out.doublings >= 10)
      throw HorizonOverflowError("regime b argmax pinned to the horizon after 10 doublings");
    ++out.doublings;
    target *= 2;
  }
  out.h = arg.best_h;
  return out;
}

CoupledDraw sim_regime_b_coupled(const LimitLawSpec& spec, double step,
                                 double horizon, RngStream& rng) {
  check_regime_b(spec);
  const double fine = 0.5 * step;
  const double sd_l = spec.gamma_L * std::sqrt(fine);
  const double sd_r = spec.gamma_R * std::sqrt(fine);
  ArgmaxTracker arg_f, arg_c;
  double cum_l = 0.0, cum_r = 0.0;
  std::size_t steps = 0;
  auto target = static_cast<std::size_t>(std::llround(horizon / fine));
  int doublings = 0;

  for (;;) {
    for (std::size_t j = steps + 1; j <= target; ++j) {
      double h = static_cast<double>(j) * fine;
      cum_l += sd_l * rng.normal();
      cum_r += sd_r * rng.normal();
      double vl = cum_l - 0.5 * h, vr = cum_r - 0.5 * h;
      arg_f.consider(vl, -h);
      arg_f.consider(vr, h);
      if (j % 2 == 0) {
        arg_c.consider(vl, -h);
        arg_c.consider(vr, h);
      }
    }
    steps = target;
    double extent = static_cast<double>(steps) * fine;
    if (std::max(std::abs(arg_f.best_h), std::abs(arg_c.best_h)) < 0.95 * extent)
      break;
    if (doublings >= 10)
      throw HorizonOverflowError("regime b refinement pinned to the horizon");
    ++doublings;
    target *= 2;
  }
  return {arg_f.best_h, arg_c.best_h};
}

RegimeCDraw sim_regime_c(const LimitLawSpec& spec, long long horizon,
                         RngStream& rng) {
  check_regime_c(spec);
  if (horizon < 1) throw ConfigError("regime c horizon must be >= 1");

  ArgmaxTracker arg;
  double cum_l = 0.0, cum_r = 0.0;
  long long steps = 0;
  long long target = horizon;
  RegimeCDraw out;

  for (;;) {
    for (long long j = steps + 1; j <= target; ++j) {
      double drift = -0.5 * spec.c1_sq * static_cast<double>(j);
      double incr_l = spec.gamma_L_star > 0.0 ? spec.gamma_L_star * rng.normal() : 0.0;
      if (!spec.k0.empty()) incr_l += k0_increment(spec, false, rng);
      cum_l += incr_l;
      arg.consider(cum_l + drift, static_cast<double>(-j));

      double incr_r = spec.gamma_R_star > 0.0 ? spec.gamma_R_star * rng.normal() : 0.0;
      if (!spec.k0.empty()) incr_r += k0_increment(spec, true, rng);
      cum_r += incr_r;
      arg.consider(cum_r + drift, static_cast<double>(j));
    }
    steps = target;
    if (std::llabs(static_cast<long long>(arg.best_h)) * 20 < steps * 19) break;
    if (out.doublings >= 10)
      throw HorizonOverflowError("regime c argmax pinned to the horizon after 10 doublings");
    ++out.doublings;
    target *= 2;
  }
  out.h = static_cast<long long>(arg.best_h);
  return out;
}

RegimeBDependentSampler::RegimeBDependentSampler(const LimitLawSpec& spec,
                                                 double step, double horizon) {
  if (!spec.dep_cov) throw ConfigError("dependent regime b needs dep_cov");
  if (!(step > 0.0) || !(horizon > 0.0))
    throw ConfigError("dependent regime b needs step > 0 and horizon > 0");
  auto K = static_cast<long long>(std::llround(horizon / step));
  if (K < 1) K = 1;
  grid_.reserve(2 * static_cast<std::size_t>(K));
  for (long long j = -K; j <= K; ++j) {
    if (j == 0) continue;  // origin has value 0 by definition
    grid_.push_back(static_cast<double>(j) * step);
  }

  const auto g = static_cast<Eigen::Index>(grid_.size());
  Mat c(g, g);
  double max_diag = 0.0;
  for (Eigen::Index i = 0; i < g; ++i) {
    for (Eigen::Index j = 0; j < g; ++j)
      c(i, j) = spec.dep_cov(grid_[static_cast<std::size_t>(i)],
                             grid_[static_cast<std::size_t>(j)]);
    max_diag = std::max(max_diag, c(i, i));
  }
  double sym_tol = 1e-8 * (1.0 + max_diag);
  for (Eigen::Index i = 0; i < g; ++i)
    for (Eigen::Index j = i + 1; j < g; ++j) {
      if (std::abs(c(i, j) - c(j, i)) > sym_tol)
        throw CovNotPSDError("dep_cov is not symmetric on the grid");
      double avg = 0.5 * (c(i, j) + c(j, i));
      c(i, j) = c(j, i) = avg;
    }

  double scale = std::max(max_diag, 1.0);
  double jitter = 1e-12 * scale;
  for (int attempt = 0; attempt < 4; ++attempt) {
    Mat work = c + jitter * Mat::Identity(g, g);
    Eigen::LLT<Mat> llt(work);
    if (llt.info() == Eigen::Success) {
      chol_ = llt.matrixL();
      return;
    }
    jitter *= 100.0;
  }
  throw CovNotPSDError("dep_cov grid covariance is not PSD after flooring");
}

double RegimeBDependentSampler::draw(RngStream& rng) const {
  const auto g = static_cast<Eigen::Index>(grid_.size());
  Vec z(g);
  for (Eigen::Index i = 0; i < g; ++i) z[i] = rng.normal();
  Vec y = chol_ * z;
  ArgmaxTracker arg;  // origin value 0 at h = 0
  for (Eigen::Index i = 0; i < g; ++i) {
    double h = grid_[static_cast<std::size_t>(i)];
    arg.consider(y[i] - 0.5 * std::abs(h), h);
  }
  return arg.best_h;
}

double sim_regime_b_dependent(const LimitLawSpec& spec, double step,
                              double horizon, RngStream& rng) {
  RegimeBDependentSampler sampler(spec, step, horizon);
  return sampler.draw(rng);
}

QuantileTable quantile_table(const LimitLawSpec& spec,
                             const std::vector<double>& levels,
                             std::size_t replicates, RngStream& rng,
                             double step, double horizon) {
  if (replicates < 100)
    throw ConfigError("quantile table needs at least 100 replicates");

  QuantileTable table;
  table.seed = rng.seed();
  table.levels = levels;
  table.replicate_count = replicates;
  table.draws.resize(replicates);

  std::size_t doubled = 0;
  if (spec.regime == Regime::A) {
    std::fill(table.draws.begin(), table.draws.end(), 0.0);
    table.step = 0.0;
    table.horizon = 0.0;
  } else if (spec.regime == Regime::B && spec.dep_cov) {
    double st = step > 0.0 ? step : spec.default_step();
    double hz = horizon > 0.0 ? horizon : 8.0 * spec.max_gamma_sq();
    RegimeBDependentSampler sampler(spec, st, hz);
    for (std::size_t r = 0; r < replicates; ++r) {
      RngStream rr = rng.substream(r);
      table.draws[r] = sampler.draw(rr);
    }
    table.step = st;
    table.horizon = hz;
  } else if (spec.regime == Regime::B) {
    double st = step > 0.0 ? step : spec.default_step();
    double hz = horizon > 0.0 ? horizon : spec.default_horizon();
    for (std::size_t r = 0; r < replicates; ++r) {
      RngStream rr = rng.substream(r);
      RegimeBDraw d = sim_regime_b(spec, st, hz, rr);
      table.draws[r] = d.h;
      if (d.doublings > 0) ++doubled;
    }
    table.step = st;
    table.horizon = hz;
  } else {
    double gs = std::max(spec.gamma_L_star, spec.gamma_R_star);
    long long hz = horizon > 0.0 ? static_cast<long long>(horizon) : 64;
    if (horizon <= 0.0 && spec.c1_sq > 0.0)
      hz = std::max<long long>(
          64, static_cast<long long>(std::ceil(300.0 * gs * gs /
                                               (spec.c1_sq * spec.c1_sq))));
    for (std::size_t r = 0; r < replicates; ++r) {
      RngStream rr = rng.substream(r);
      RegimeCDraw d = sim_regime_c(spec, hz, rr);
      table.draws[r] = static_cast<double>(d.h);
      if (d.doublings > 0) ++doubled;
    }
    table.step = 1.0;
    table.horizon = static_cast<double>(hz);
  }

  std::sort(table.draws.begin(), table.draws.end());
  table.quantiles.reserve(levels.size());
  for (double p : levels) table.quantiles.push_back(quantile_sorted(table.draws, p));
  table.doubling_fraction =
      static_cast<double>(doubled) / static_cast<double>(replicates);
  return table;
}

}  // namespace panelbreak
