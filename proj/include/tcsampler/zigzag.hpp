#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

#include "tcsampler/pdmp.hpp"
#include "tcsampler/rng.hpp"
#include "tcsampler/target.hpp"
#include "tcsampler/warp.hpp"

namespace tcs {

struct ZigZagConfig {
  TargetDensity target;
  SpeedFunction speed;
  /// Constant refreshment rates per coordinate; empty means zero.
  std::vector<double> refresh;
  /// Optional state-dependent refreshment rates (overrides `refresh`).
  std::function<Vec(const Vec&)> refresh_fn;
  Vec x0;
  Vec v0;
  /// Simulated time: base time for simulate_zigzag, time-changed time for
  /// simulate_timechanged_zigzag.
  double horizon = 0.0;
  double envelope_horizon = 1.0;
  double kappa = 1.5;
  double warp_tol = 1e-10;
  SimulationOptions options;
};

/// lambda_i = max(0, w_i d_i U~(x)) + gamma_i for every coordinate.
std::vector<double> zz_rates(const Vec& x, const Vec& w, const TiltedPotential& tilted,
                             const std::vector<double>& gamma = {});

/// Characteristics of the base Zig-Zag process targeting mu~: one flip
/// mechanism per coordinate plus one refresh mechanism per coordinate with
/// non-zero refreshment. Both kinds flip coordinate i.
std::shared_ptr<const PdmpCharacteristics> zigzag_characteristics(
    const TiltedPotential& tilted, const std::vector<double>& refresh = {},
    std::function<Vec(const Vec&)> refresh_fn = {});

/// Exact affine envelopes when grad U~ is affine along lines, grid bounds otherwise.
EnvelopeProvider zigzag_envelope(const TiltedPotential& tilted,
                                 std::shared_ptr<const PdmpCharacteristics> chars,
                                 double horizon = 1.0, double kappa = 1.5);

/// Base process Y targeting mu~ proportional to s * mu.
PdmpRun simulate_zigzag(const ZigZagConfig& config, RngStream& rng);

/// X_t = Y_{r(t)}, run until the time-changed clock reaches config.horizon.
TimeChangedPath simulate_timechanged_zigzag(const ZigZagConfig& config, RngStream& rng);

/// Probability that the 1-d process started at x0 towards x1 reaches x1
/// before its first flip: (s(x1)/s(x0)) exp(-(U(x1) - U(x0))).
/// Checks on a grid that U~' and U' share their sign on (x0, x1).
double crossing_probability(const TargetDensity& target, const SpeedFunction& speed, double x0,
                            double x1);

/// Probability of travelling from x0 along v for distance c without any flip:
/// s(x0 + v c / sqrt(d)) / s(x0) exp(-(U(x0 + v c / sqrt(d)) - U(x0))).
/// Checks on a grid that every rate v_i d_i U~ is positive along the ray.
double tail_escape_probability(const TargetDensity& target, const SpeedFunction& speed,
                               const Vec& x0, const Vec& v, double c);

/// The same closed form evaluated without the precondition check.
double tail_escape_formula(const TargetDensity& target, const SpeedFunction& speed, const Vec& x0,
                           const Vec& v, double c);

/// One first-excursion trial: start at x0 with velocity v and report whether
/// the base process covers `distance` (in time units) before its first event.
bool first_excursion_trial(const TiltedPotential& tilted, const Vec& x0, const Vec& v,
                           double distance, RngStream& rng);

struct EyringKramersRow {
  double epsilon = 0.0;
  double mean_time = 0.0;
  double standard_error = 0.0;
  std::size_t replications = 0;
  std::size_t failures = 0;
};

struct EyringKramersResult {
  double a = 0.0;
  std::vector<EyringKramersRow> rows;
  /// OLS fit of ln E[tau] against 1/epsilon.
  double slope = 0.0;
  double intercept = 0.0;
};

struct EyringKramersOptions {
  double x0 = -1.0;
  double x1 = 0.0;
  double v0 = -1.0;
  /// Base-time budget per replicate; exceeding it counts as a failure.
  double max_base_time = 1e6;
  std::size_t threads = 1;
};

/// Mean hitting time of x1 for the time-changed 1-d Zig-Zag on mu_eps
/// proportional to exp(-U/eps) with s_eps = exp((a/eps) U), started at (x0, v0).
EyringKramersResult eyring_kramers_experiment(const TargetDensity& target, double a,
                                              const std::vector<double>& epsilons,
                                              std::size_t replications, std::uint64_t seed,
                                              const EyringKramersOptions& options = {});

/// Ordinary least squares fit y = intercept + slope * x.
std::pair<double, double> ols_fit(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace tcs
