#include "tcsampler/bps.hpp"

#include <cmath>
#include <utility>

#include "tcsampler/errors.hpp"

namespace tcs {

Vec bps_reflect(const Vec& w, const Vec& g) {
  if (w.size() != g.size()) {
    throw DimensionMismatch("bps_reflect: velocity and gradient dimensions differ");
  }
  const double gg = g.squaredNorm();
  if (!(gg > 0.0)) {
    throw ReflectAtCriticalPoint("bps_reflect: gradient vanishes");
  }
  return w - (2.0 * w.dot(g) / gg) * g;
}

std::shared_ptr<const PdmpCharacteristics> bps_characteristics(const TiltedPotential& tilted,
                                                               double refresh_rate) {
  if (!(refresh_rate > 0.0) || !std::isfinite(refresh_rate)) {
    throw InvalidArgument("bps: refresh rate must be positive");
  }
  auto tilted_ptr = std::make_shared<const TiltedPotential>(tilted);
  auto chars = std::make_shared<PdmpCharacteristics>();
  chars->dim = tilted.dim();
  chars->flow = FlowKind::constant_velocity;

  auto gradient = [tilted_ptr](const Vec& x) {
    Vec g = tilted_ptr->gradient(x);
    if (!g.allFinite()) {
      throw NonFiniteRate("bps: gradient of the tilted potential is not finite");
    }
    return g;
  };

  JumpMechanism bounce;
  bounce.rate = [gradient](const Vec& x, const Vec& v) {
    return std::max(0.0, v.dot(gradient(x)));
  };
  auto reflect = std::make_shared<JumpKernel>();
  reflect->apply = [gradient](Vec& x, Vec& v, RngStream&) { v = bps_reflect(v, gradient(x)); };
  reflect->kind = EventKind::reflect;
  reflect->label = "reflect";
  bounce.kernel = reflect;
  chars->jumps.push_back(std::move(bounce));

  JumpMechanism refresh;
  refresh.rate = [refresh_rate](const Vec&, const Vec&) { return refresh_rate; };
  refresh.constant_rate = refresh_rate;
  auto redraw = std::make_shared<JumpKernel>();
  redraw->apply = [](Vec&, Vec& v, RngStream& rng) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      v[i] = rng.normal();
    }
  };
  redraw->kind = EventKind::refresh;
  redraw->label = "gaussian_refresh";
  refresh.kernel = redraw;
  chars->jumps.push_back(std::move(refresh));

  chars->all_rates = [gradient, refresh_rate](const Vec& x, const Vec& v,
                                              std::vector<double>& out) {
    out[0] = std::max(0.0, v.dot(gradient(x)));
    out[1] = refresh_rate;
  };
  return chars;
}

EnvelopeProvider bps_envelope(const TiltedPotential& tilted,
                              std::shared_ptr<const PdmpCharacteristics> chars, double horizon,
                              double kappa) {
  if (!tilted.affine_gradient_along_lines()) {
    return grid_envelope(std::move(chars), horizon, kappa);
  }
  auto tilted_ptr = std::make_shared<const TiltedPotential>(tilted);
  const double refresh = *chars->jumps[1].constant_rate;
  return [tilted_ptr, refresh](const Vec& x, const Vec& v, std::vector<RateEnvelope>& out) {
    out.assign(2, RateEnvelope{});
    const Vec g0 = tilted_ptr->gradient(x);
    const Vec g1 = tilted_ptr->gradient(x + v);
    out[0].intercept = v.dot(g0);
    out[0].slope = v.dot(g1 - g0);
    out[0].exact = true;
    out[1] = constant_envelope(refresh);
  };
}

PdmpRun simulate_bps(const BpsConfig& config, RngStream& rng) {
  const auto tilted = make_tilted(config.target, config.speed);
  auto chars = bps_characteristics(tilted, config.refresh_rate);
  auto env = bps_envelope(tilted, chars, config.envelope_horizon, config.kappa);
  return simulate_pdmp(*chars, config.x0, config.v0, config.horizon, env, rng, config.options);
}

TimeChangedPath simulate_timechanged_bps(const BpsConfig& config, RngStream& rng) {
  BpsConfig base = config;
  base.options.stop_rule = earliest_stop(
      config.options.stop_rule,
      changed_time_horizon_rule(config.speed, config.horizon, true, config.warp_tol));
  base.horizon = std::numeric_limits<double>::infinity();
  return time_change_run(simulate_bps(base, rng), config.speed, config.warp_tol);
}

}  // namespace tcs
