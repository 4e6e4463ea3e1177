#pragma once

#include <cstdint>

#include "tcsampler/rng.hpp"
#include "tcsampler/skeleton.hpp"
#include "tcsampler/target.hpp"

namespace tcs {

enum class SdeKind { overdamped, underdamped };

/// Euler-Maruyama discretisation of the time-changed Langevin diffusions.
/// Biased baseline: no Metropolis correction.
struct SdeConfig {
  TargetDensity target;
  SpeedFunction speed;
  double step = 1e-3;
  double horizon = 0.0;
  Vec x0;
  /// Initial velocity (underdamped only); zero when empty.
  Vec v0;
  SdeKind kind = SdeKind::overdamped;
  /// Record every n-th step in the output path.
  std::uint64_t record_every = 1;
};

/// x + h (-s grad U + grad s) + sqrt(2 s h) xi.
Vec em_step_overdamped(const Vec& x, double h, const TargetDensity& target,
                       const SpeedFunction& speed, RngStream& rng);
/// Same step with the normal draw xi supplied.
Vec em_step_overdamped(const Vec& x, double h, const TargetDensity& target,
                       const SpeedFunction& speed, const Vec& xi);

/// x' = x + h s v; v' = v - h (s grad U - grad s) - h s v + sqrt(2 s h) xi.
State em_step_underdamped(const Vec& x, const Vec& v, double h, const TargetDensity& target,
                          const SpeedFunction& speed, RngStream& rng);
State em_step_underdamped(const Vec& x, const Vec& v, double h, const TargetDensity& target,
                          const SpeedFunction& speed, const Vec& xi);

/// Discretized path with step h * record_every.
PathSkeleton simulate_sde(const SdeConfig& config, RngStream& rng);

}  // namespace tcs
