#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tcsampler/rng.hpp"
#include "tcsampler/skeleton.hpp"
#include "tcsampler/target.hpp"

namespace tcs {

enum class FlowKind {
  constant_velocity,
  /// Position frozen between events.
  stationary,
  /// s(x) * constant velocity; realised through build_warp / warp_path only.
  speed_scaled_constant_velocity,
  /// s(x) * stationary flow, which is still stationary.
  speed_scaled_stationary,
};

using RateFn = std::function<double(const Vec& x, const Vec& v)>;

/// Jump map Q_i. Applied in place to (x, v).
struct JumpKernel {
  std::function<void(Vec& x, Vec& v, RngStream& rng)> apply;
  EventKind kind = EventKind::jump;
  /// Coordinate recorded in the skeleton (flip events), -1 otherwise.
  int coordinate = -1;
  /// Velocity-jump kernels must leave the position untouched; checked by the engine.
  bool moves_position = false;
  std::string label;
};

struct JumpMechanism {
  RateFn rate;
  std::shared_ptr<const JumpKernel> kernel;
  /// Set when the rate is the same constant at every state.
  std::optional<double> constant_rate;
};

struct PdmpCharacteristics {
  std::size_t dim = 0;
  FlowKind flow = FlowKind::constant_velocity;
  std::vector<JumpMechanism> jumps;
  /// Optional: all rates at once (cheaper than calling each rate separately).
  std::function<void(const Vec& x, const Vec& v, std::vector<double>& out)> all_rates;

  void rates(const Vec& x, const Vec& v, std::vector<double>& out) const;
};

/// Dominating intensity (a + b t)_+ valid for t in [0, horizon].
struct RateEnvelope {
  double horizon = std::numeric_limits<double>::infinity();
  double intercept = 0.0;
  double slope = 0.0;
  /// True when the bound equals the rate on [0, horizon].
  bool exact = false;

  double bound(double t) const;
  /// First arrival time of a Poisson process with this intensity, given a
  /// unit-exponential draw; +inf when no arrival occurs within the horizon.
  double first_arrival(double unit_exponential) const;
};

/// Fills one envelope per jump mechanism at the state (x, v).
using EnvelopeProvider =
    std::function<void(const Vec& x, const Vec& v, std::vector<RateEnvelope>& out)>;

/// Generic envelope: constant bound kappa * max of each rate over a 16-point grid on [0, h].
EnvelopeProvider grid_envelope(std::shared_ptr<const PdmpCharacteristics> chars,
                               double horizon = 1.0, double kappa = 1.5);

/// Envelopes for mechanisms with constant rate, exact and unbounded in time.
RateEnvelope constant_envelope(double rate);

struct ThinningStats {
  std::uint64_t proposals = 0;
  std::uint64_t accepted = 0;
  std::uint64_t exact_proposals = 0;
  std::uint64_t exact_accepted = 0;
  std::uint64_t envelope_expiries = 0;
  std::uint64_t envelope_violations = 0;
};

/// Stop rule inspected on every deterministic segment. Receives the state at
/// the segment start and the segment length; returns the time offset at which
/// the simulation should stop, if inside the segment.
using SegmentStopRule = std::function<std::optional<double>(const Vec& x, const Vec& v,
                                                            double t0, double duration)>;

struct SimulationOptions {
  std::uint64_t max_events = std::numeric_limits<std::uint64_t>::max();
  SegmentStopRule stop_rule;
  /// Relative slack allowed before a rate counts as exceeding its envelope.
  double violation_slack = 1e-9;
};

struct PdmpRun {
  PathSkeleton skeleton;
  ThinningStats stats;
  bool stopped_early = false;
  /// Final state and time.
  Vec x;
  Vec v;
  double time = 0.0;
};

/// Time change of characteristics: flow s*Phi, rates s*lambda,
/// kernels shared with the input.
PdmpCharacteristics time_change_characteristics(const PdmpCharacteristics& chars,
                                                const SpeedFunction& speed);

/// Simulates a PDMP by Poisson thinning of clipped-affine envelopes.
/// Throws EnvelopeViolation or NonFiniteRate; never returns a biased path.
PdmpRun simulate_pdmp(const PdmpCharacteristics& chars, const Vec& x0, const Vec& v0,
                      double horizon, const EnvelopeProvider& envelopes, RngStream& rng,
                      const SimulationOptions& options = {});

}  // namespace tcs
