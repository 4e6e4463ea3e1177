#include "tcsampler/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "tcsampler/errors.hpp"
#include "tcsampler/parallel.hpp"
#include "tcsampler/quadrature.hpp"
#include "tcsampler/zigzag.hpp"

namespace tcs {

double EstimatorReport::standard_error() const {
  if (!(horizon > 0.0)) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return std::sqrt(batch_means_variance / horizon);
}

namespace {

constexpr int kFixedRuleDepth = 12;

double checked(double value) {
  if (!std::isfinite(value)) {
    throw NonFiniteRate("estimator: observable is not finite along the path");
  }
  return value;
}

double segment_integral(const Observable& f, const Vec& x, const Vec& v, double a, double b,
                        PathQuadrature rule, double tol) {
  Vec y(x.size());
  auto g = [&](double s) {
    y = x + s * v;
    return checked(f(y));
  };
  if (rule == PathQuadrature::gauss_legendre_8) {
    return capped_gauss_legendre(g, a, b, 8, tol, kFixedRuleDepth);
  }
  return adaptive_gauss_legendre(g, a, b, tol).value;
}

}  // namespace

double path_integral(const PathSkeleton& path, const Observable& f, double t0, double t1,
                     PathQuadrature rule, double tol) {
  if (!(t0 >= 0.0) || t1 > path.horizon() || t1 < t0) {
    throw OutOfRange("path_integral: interval outside the path horizon");
  }
  if (t1 == t0) {
    return 0.0;
  }
  if (path.dynamics() == Dynamics::speed_scaled && rule == PathQuadrature::gauss_legendre_8) {
    // Fixed-order rules cannot resolve a discontinuous f along the curved
    // X-segments without bias, so integrate f/s over the linear base segments.
    if (const auto* warp = dynamic_cast<const WarpTable*>(path.time_map().get())) {
      const auto& speed = warp->speed();
      const double u0 = warp->base_time(t0);
      const double u1 = std::min(warp->base_time(t1), warp->base_horizon());
      return path_integral(
          *path.base(), [&](const Vec& y) { return f(y) / speed.value(y); }, u0,
          std::max(u0, u1), rule, tol);
    }
  }
  double total = 0.0;
  std::size_t i = path.segment_index(t0);
  const std::size_t n = path.size();
  for (; i < n && path.time(i) < t1; ++i) {
    const double a = std::max(t0, path.time(i));
    const double b = i + 1 < n ? std::min(t1, path.time(i + 1)) : t1;
    if (!(b > a)) {
      continue;
    }
    switch (path.dynamics()) {
      case Dynamics::piecewise_constant_state:
      case Dynamics::discretized:
        total += checked(f(path.position_after(i))) * (b - a);
        break;
      case Dynamics::constant_velocity: {
        const Vec x = path.position_after(i);
        const Vec v = path.velocity_after(i);
        total += segment_integral(f, x, v, a - path.time(i), b - path.time(i), rule, tol);
        break;
      }
      case Dynamics::speed_scaled: {
        auto g = [&](double t) { return checked(f(path.state_at(t).position)); };
        total += rule == PathQuadrature::gauss_legendre_8
                     ? capped_gauss_legendre(g, a, b, 8, tol, kFixedRuleDepth)
                     : adaptive_gauss_legendre(g, a, b, tol).value;
        break;
      }
    }
  }
  return total;
}

double batch_means_avar(const std::vector<double>& increments, std::size_t n_batches,
                        double spacing) {
  if (n_batches < 10) {
    throw InvalidArgument("batch_means_avar: need at least 10 batches");
  }
  if (increments.size() < n_batches) {
    throw InvalidArgument("batch_means_avar: series shorter than the number of batches");
  }
  if (!(spacing > 0.0)) {
    throw InvalidArgument("batch_means_avar: spacing must be positive");
  }
  const std::size_t m = increments.size() / n_batches;
  const double batch_length = static_cast<double>(m) * spacing;
  std::vector<double> means(n_batches);
  for (std::size_t b = 0; b < n_batches; ++b) {
    double acc = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      acc += increments[b * m + k];
    }
    means[b] = acc / batch_length;
  }
  const double mean = std::accumulate(means.begin(), means.end(), 0.0) / n_batches;
  double ss = 0.0;
  for (double x : means) {
    ss += (x - mean) * (x - mean);
  }
  return batch_length * ss / static_cast<double>(n_batches - 1);
}

namespace {

std::uint64_t events_before(const PathSkeleton& path, double horizon) {
  std::uint64_t n = 0;
  for (std::size_t i = 0; i < path.size() && path.time(i) <= horizon; ++i) {
    const auto k = path.kind(i);
    if (k != EventKind::start && k != EventKind::horizon) {
      ++n;
    }
  }
  return n;
}

// T var / avar. In continuous time this may exceed T (antithetic dynamics).
double ess(double horizon, double variance, double avar) {
  if (!(avar > 0.0)) {
    return horizon;
  }
  return horizon * std::max(0.0, variance) / avar;
}

std::vector<double> batch_integrals(const PathSkeleton& path, const Observable& f, double horizon,
                                    std::size_t n_batches, PathQuadrature rule) {
  std::vector<double> out(n_batches);
  for (std::size_t b = 0; b < n_batches; ++b) {
    const double a = horizon * static_cast<double>(b) / n_batches;
    const double c = b + 1 == n_batches ? horizon : horizon * static_cast<double>(b + 1) / n_batches;
    out[b] = path_integral(path, f, a, c, rule);
  }
  return out;
}

void check_horizon(const PathSkeleton& path, double horizon) {
  if (!(horizon > 0.0) || horizon > path.horizon()) {
    throw InvalidArgument("estimator: horizon must lie in (0, path horizon]");
  }
}

}  // namespace

EstimatorReport direct_average(const PathSkeleton& path, const Observable& f, double horizon,
                               std::size_t n_batches, PathQuadrature rule) {
  check_horizon(path, horizon);
  const auto inc = batch_integrals(path, f, horizon, n_batches, rule);
  const auto sq = batch_integrals(
      path, [&f](const Vec& x) { const double v = f(x); return v * v; }, horizon, n_batches, rule);
  EstimatorReport r;
  r.strategy = "direct";
  r.estimate = std::accumulate(inc.begin(), inc.end(), 0.0) / horizon;
  r.batch_means_variance = batch_means_avar(inc, n_batches, horizon / n_batches);
  const double second = std::accumulate(sq.begin(), sq.end(), 0.0) / horizon;
  r.effective_sample_size = ess(horizon, second - r.estimate * r.estimate, r.batch_means_variance);
  r.n_events = events_before(path, horizon);
  r.horizon = horizon;
  r.n_batches = n_batches;
  return r;
}

EstimatorReport reweighted_average(const PathSkeleton& path_y, const Observable& f,
                                   const SpeedFunction& speed, double horizon,
                                   std::size_t n_batches, PathQuadrature rule) {
  check_horizon(path_y, horizon);
  const auto num = batch_integrals(
      path_y, [&](const Vec& x) { return f(x) / speed.value(x); }, horizon, n_batches, rule);
  const auto den = batch_integrals(
      path_y, [&](const Vec& x) { return 1.0 / speed.value(x); }, horizon, n_batches, rule);
  const auto sq = batch_integrals(
      path_y, [&](const Vec& x) { const double v = f(x); return v * v / speed.value(x); },
      horizon, n_batches, rule);
  const double num_total = std::accumulate(num.begin(), num.end(), 0.0);
  const double den_total = std::accumulate(den.begin(), den.end(), 0.0);
  const double sq_total = std::accumulate(sq.begin(), sq.end(), 0.0);
  EstimatorReport r;
  r.strategy = "reweighted";
  r.estimate = num_total / den_total;
  // Delta method: linearised increments num - estimate * den.
  std::vector<double> z(n_batches);
  for (std::size_t b = 0; b < n_batches; ++b) {
    z[b] = num[b] - r.estimate * den[b];
  }
  const double mean_den = den_total / horizon;
  r.batch_means_variance =
      batch_means_avar(z, n_batches, horizon / n_batches) / (mean_den * mean_den);
  const double variance = sq_total / den_total - r.estimate * r.estimate;
  r.effective_sample_size = ess(horizon, variance, r.batch_means_variance);
  r.n_events = events_before(path_y, horizon);
  r.horizon = horizon;
  r.n_batches = n_batches;
  return r;
}

EstimatorReport discretized_average(const PathSkeleton& path, const Observable& f, double delta,
                                    std::size_t n_batches) {
  if (!(delta > 0.0)) {
    throw InvalidArgument("discretized_average: delta must be positive");
  }
  const double horizon = path.horizon();
  const auto n = static_cast<std::size_t>(std::floor(horizon / delta * (1.0 + 1e-15)));
  if (n < 1) {
    throw InvalidArgument("discretized_average: horizon shorter than one step");
  }
  std::vector<double> inc(n);
  double sum = 0.0;
  double sum2 = 0.0;
  SkeletonCursor cursor(path);
  for (std::size_t k = 1; k <= n; ++k) {
    const double t = std::min(static_cast<double>(k) * delta, horizon);
    const double v = checked(f(cursor.position_at(t)));
    inc[k - 1] = v * delta;
    sum += v;
    sum2 += v * v;
  }
  EstimatorReport r;
  r.strategy = "discretized";
  const double nn = static_cast<double>(n);
  r.estimate = sum / nn;
  r.horizon = nn * delta;
  r.n_events = events_before(path, horizon);
  if (n >= n_batches) {
    r.batch_means_variance = batch_means_avar(inc, n_batches, delta);
    r.n_batches = n_batches;
    r.effective_sample_size =
        std::min(ess(r.horizon, sum2 / nn - r.estimate * r.estimate, r.batch_means_variance) /
                     delta,
                 nn);
  } else {
    r.batch_means_variance = std::numeric_limits<double>::quiet_NaN();
    r.effective_sample_size = std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

double mu_s_estimate(const WarpTable& warp, double horizon) {
  if (horizon < 0.0) {
    return warp.base_horizon() / warp.changed_horizon();
  }
  if (!(horizon > 0.0)) {
    throw InvalidArgument("mu_s_estimate: horizon must be positive");
  }
  return warp.base_time(horizon) / horizon;
}

double normalizing_constant(const WarpTable& warp, double integral_s, double horizon) {
  if (!(integral_s > 0.0) || !std::isfinite(integral_s)) {
    throw InvalidArgument("normalizing_constant: integral of s exp(-U) must be positive");
  }
  if (horizon < 0.0) {
    horizon = warp.base_horizon();
  }
  if (!(horizon > 0.0)) {
    throw InvalidArgument("normalizing_constant: horizon must be positive");
  }
  return integral_s * warp.changed_time(horizon) / horizon;
}

std::vector<double> changed_time_increments(const TimeChangedPath& run, const Observable& f,
                                            const SpeedFunction& speed,
                                            const std::vector<double>& breakpoints) {
  if (breakpoints.size() < 2) {
    throw InvalidArgument("changed_time_increments: need at least two breakpoints");
  }
  std::vector<double> u(breakpoints.size());
  for (std::size_t k = 0; k < breakpoints.size(); ++k) {
    u[k] = std::min(run.warp->base_time(breakpoints[k]), run.base->horizon());
  }
  const Observable h = [&](const Vec& y) { return f(y) / speed.value(y); };
  std::vector<double> out(breakpoints.size() - 1);
  for (std::size_t k = 0; k + 1 < breakpoints.size(); ++k) {
    out[k] = path_integral(*run.base, h, u[k], u[k + 1]);
  }
  return out;
}

FcltResult fclt_identity_check(const FcltConfig& config, RngStream& rng) {
  if (config.target.dim != 1) {
    throw DimensionMismatch("fclt_identity_check: one-dimensional targets only");
  }
  if (!(config.horizon > 0.0)) {
    throw InvalidArgument("fclt_identity_check: horizon must be positive");
  }
  FcltResult out;
  out.n_batches = config.n_batches != 0
                      ? config.n_batches
                      : static_cast<std::size_t>(std::floor(std::sqrt(config.horizon)));
  const std::size_t nb = out.n_batches;
  const double spacing = config.horizon / static_cast<double>(nb);
  RngStream rng_x(rng.next_u64(), 0);
  RngStream rng_y(rng.next_u64(), 1);

  ZigZagConfig zz;
  zz.target = config.target;
  zz.speed = config.speed;
  zz.refresh = {config.refresh};
  zz.x0 = Vec::Constant(1, config.x0);
  zz.v0 = Vec::Ones(1);
  zz.horizon = config.horizon;

  // Time-changed process with observable g.
  const auto run_x = simulate_timechanged_zigzag(zz, rng_x);
  std::vector<double> breaks(nb + 1);
  for (std::size_t k = 0; k <= nb; ++k) {
    breaks[k] = k == nb ? run_x.warp->changed_horizon() : spacing * static_cast<double>(k);
  }
  const auto inc_x = changed_time_increments(run_x, config.g, config.speed, breaks);
  out.mu_g = std::accumulate(inc_x.begin(), inc_x.end(), 0.0) / run_x.warp->changed_horizon();
  out.mu_s = mu_s_estimate(*run_x.warp);
  out.avar_x = batch_means_avar(inc_x, nb, spacing);

  // Base process with observable g~.
  const auto run_y = simulate_zigzag(zz, rng_y);
  const double root_mu_s = std::sqrt(out.mu_s);
  const double mu_g = out.mu_g;
  const Observable g_tilde = [&](const Vec& y) {
    return root_mu_s * (config.g(y) - mu_g) / config.speed.value(y);
  };
  const auto inc_y = batch_integrals(run_y.skeleton, g_tilde, config.horizon, nb,
                                     PathQuadrature::gauss_legendre_8);
  out.avar_y = batch_means_avar(inc_y, nb, spacing);
  out.ratio = out.avar_x / out.avar_y;
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) {
    throw InvalidArgument("median: empty sample");
  }
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid),
                   values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) {
    return upper;
  }
  const double lower =
      *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

std::vector<MseRow> mse_harness(const BudgetEstimator& estimator, double truth,
                                const std::vector<std::uint64_t>& budgets,
                                std::size_t replications, std::uint64_t seed,
                                std::size_t threads) {
  if (!(truth != 0.0) || !std::isfinite(truth)) {
    throw InvalidArgument("mse_harness: truth must be finite and non-zero");
  }
  if (budgets.empty() || replications == 0) {
    throw InvalidArgument("mse_harness: need budgets and replications");
  }
  std::vector<std::vector<double>> estimates(replications);
  parallel_for(replications, threads, [&](std::size_t r) {
    RngStream rng(seed, r);
    estimates[r] = estimator(budgets, rng);
    if (estimates[r].size() != budgets.size()) {
      throw InvalidArgument("mse_harness: estimator returned the wrong number of values");
    }
  });
  std::vector<MseRow> rows(budgets.size());
  for (std::size_t b = 0; b < budgets.size(); ++b) {
    std::vector<double> rse(replications);
    double mean = 0.0;
    for (std::size_t r = 0; r < replications; ++r) {
      const double rel = (estimates[r][b] - truth) / truth;
      rse[r] = rel * rel;
      mean += estimates[r][b];
    }
    rows[b].budget = budgets[b];
    rows[b].median_relative_square_error = median(std::move(rse));
    rows[b].mean_estimate = mean / static_cast<double>(replications);
    rows[b].replications = replications;
  }
  return rows;
}

}  // namespace tcs
