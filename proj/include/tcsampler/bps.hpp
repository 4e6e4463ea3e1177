#pragma once

#include <memory>

#include "tcsampler/pdmp.hpp"
#include "tcsampler/rng.hpp"
#include "tcsampler/target.hpp"
#include "tcsampler/warp.hpp"

namespace tcs {

struct BpsConfig {
  TargetDensity target;
  SpeedFunction speed;
  double refresh_rate = 1.0;
  Vec x0;
  Vec v0;
  /// Base time for simulate_bps, time-changed time for simulate_timechanged_bps.
  double horizon = 0.0;
  double envelope_horizon = 1.0;
  double kappa = 1.5;
  double warp_tol = 1e-10;
  SimulationOptions options;
};

/// Elastic reflection w - 2 <w, g> g / |g|^2. Throws ReflectAtCriticalPoint when g = 0.
Vec bps_reflect(const Vec& w, const Vec& g);

/// Bounce mechanism <w, grad U~>_+ with reflection, plus refreshment at
/// rate refresh_rate redrawing the velocity from N(0, I).
std::shared_ptr<const PdmpCharacteristics> bps_characteristics(const TiltedPotential& tilted,
                                                               double refresh_rate);

EnvelopeProvider bps_envelope(const TiltedPotential& tilted,
                              std::shared_ptr<const PdmpCharacteristics> chars,
                              double horizon = 1.0, double kappa = 1.5);

PdmpRun simulate_bps(const BpsConfig& config, RngStream& rng);

TimeChangedPath simulate_timechanged_bps(const BpsConfig& config, RngStream& rng);

}  // namespace tcs
