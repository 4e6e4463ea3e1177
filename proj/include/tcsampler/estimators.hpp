#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tcsampler/rng.hpp"
#include "tcsampler/skeleton.hpp"
#include "tcsampler/target.hpp"
#include "tcsampler/warp.hpp"

namespace tcs {

using Observable = std::function<double(const Vec&)>;

struct EstimatorReport {
  std::string strategy;
  double estimate = 0.0;
  /// Batch-means estimate of the asymptotic variance.
  double batch_means_variance = 0.0;
  double effective_sample_size = 0.0;
  std::uint64_t n_events = 0;
  double horizon = 0.0;
  std::uint64_t seed = 0;
  std::size_t n_batches = 0;

  /// Standard error implied by the asymptotic variance over the horizon.
  double standard_error() const;
};

inline constexpr std::size_t kDefaultBatches = 30;

enum class PathQuadrature {
  /// Order-8 Gauss-Legendre per segment, bisected until the halves agree to
  /// tol and capped at depth 12 without failing (safe for indicators).
  gauss_legendre_8,
  /// Adaptive order-16 Gauss-Legendre per segment.
  adaptive,
};

/// int_{t0}^{t1} f(X_t) dt along the path. Piecewise-constant and discretized
/// paths use exact holding-time sums. Speed-scaled paths: the fixed rule
/// integrates f/s over the base segments between r(t0) and r(t1); the
/// adaptive rule integrates in the path's own time through state_at.
double path_integral(const PathSkeleton& path, const Observable& f, double t0, double t1,
                     PathQuadrature rule = PathQuadrature::gauss_legendre_8, double tol = 1e-10);

/// (1/T) int_0^T f(X_t) dt with batch-means variance.
EstimatorReport direct_average(const PathSkeleton& path, const Observable& f, double horizon,
                               std::size_t n_batches = kDefaultBatches,
                               PathQuadrature rule = PathQuadrature::gauss_legendre_8);

/// int f/s(Y) / int 1/s(Y) over [0, T] of the base path.
EstimatorReport reweighted_average(const PathSkeleton& path_y, const Observable& f,
                                   const SpeedFunction& speed, double horizon,
                                   std::size_t n_batches = kDefaultBatches,
                                   PathQuadrature rule = PathQuadrature::gauss_legendre_8);

/// (1/N) sum_{n=1}^{N} f(X_{n delta}), N = floor(T / delta).
EstimatorReport discretized_average(const PathSkeleton& path, const Observable& f, double delta,
                                    std::size_t n_batches = kDefaultBatches);

/// r(T) / T for the time-changed horizon T (defaults to the full table).
double mu_s_estimate(const WarpTable& warp, double horizon = -1.0);

/// Z = I_s * r^{-1}(T) / T for the base horizon T (defaults to the full table),
/// where I_s = int s exp(-U).
double normalizing_constant(const WarpTable& warp, double integral_s, double horizon = -1.0);

/// Batch-means asymptotic variance of a series of path-integral increments
/// over intervals of length `spacing`.
double batch_means_avar(const std::vector<double>& increments, std::size_t n_batches,
                        double spacing = 1.0);

struct FcltConfig {
  TargetDensity target;
  SpeedFunction speed;
  Observable g;
  double horizon = 1e6;
  double refresh = 0.1;
  /// 0 selects floor(sqrt(horizon)) batches.
  std::size_t n_batches = 0;
  double x0 = 0.0;
};

struct FcltResult {
  double avar_x = 0.0;  // time-changed process, observable g
  double avar_y = 0.0;  // base process, observable g~
  double ratio = 0.0;
  double mu_g = 0.0;
  double mu_s = 0.0;
  std::size_t n_batches = 0;
};

/// Compares the asymptotic variance of g under the time-changed Zig-Zag with
/// that of g~ = sqrt(mu(s)) (g - mu(g)) / s under the base Zig-Zag, using
/// two independent runs of length T. 1-d targets.
FcltResult fclt_identity_check(const FcltConfig& config, RngStream& rng);

/// Per-budget integrals of the time-changed path computed on the base path:
/// int_{t_k}^{t_{k+1}} f(X) dt = int_{r(t_k)}^{r(t_{k+1})} f(Y)/s(Y) du.
std::vector<double> changed_time_increments(const TimeChangedPath& run, const Observable& f,
                                            const SpeedFunction& speed,
                                            const std::vector<double>& breakpoints);

struct MseRow {
  std::uint64_t budget = 0;
  double median_relative_square_error = 0.0;
  double mean_estimate = 0.0;
  std::size_t replications = 0;
};

/// Estimator returning one estimate per budget point from a single replicate.
using BudgetEstimator =
    std::function<std::vector<double>(const std::vector<std::uint64_t>& budgets, RngStream& rng)>;

/// Median over replicates of ((estimate - truth) / truth)^2 per budget.
/// Replicate r uses RngStream(seed, r).
std::vector<MseRow> mse_harness(const BudgetEstimator& estimator, double truth,
                                const std::vector<std::uint64_t>& budgets,
                                std::size_t replications, std::uint64_t seed,
                                std::size_t threads = 1);

/// Median of a sample (copies and partially sorts).
double median(std::vector<double> values);

}  // namespace tcs
