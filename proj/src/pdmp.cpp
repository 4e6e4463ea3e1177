#include "tcsampler/pdmp.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "tcsampler/errors.hpp"

namespace tcs {

void PdmpCharacteristics::rates(const Vec& x, const Vec& v, std::vector<double>& out) const {
  out.resize(jumps.size());
  if (all_rates) {
    all_rates(x, v, out);
    return;
  }
  for (std::size_t i = 0; i < jumps.size(); ++i) {
    out[i] = jumps[i].rate(x, v);
  }
}

double RateEnvelope::bound(double t) const { return std::max(0.0, intercept + slope * t); }

double RateEnvelope::first_arrival(double e) const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  double t0 = 0.0;
  if (intercept <= 0.0) {
    if (slope <= 0.0) {
      return inf;
    }
    t0 = -intercept / slope;
  }
  if (t0 >= horizon) {
    return inf;
  }
  const double a0 = std::max(0.0, intercept + slope * t0);
  const double disc = a0 * a0 + 2.0 * slope * e;
  if (disc < 0.0) {
    return inf;  // decreasing intensity runs out of mass
  }
  const double denom = a0 + std::sqrt(disc);
  if (!(denom > 0.0)) {
    return inf;
  }
  const double t = t0 + 2.0 * e / denom;
  return t <= horizon ? t : inf;
}

RateEnvelope constant_envelope(double rate) {
  if (!(rate >= 0.0) || !std::isfinite(rate)) {
    throw NonFiniteRate("constant envelope: rate must be finite and non-negative");
  }
  RateEnvelope env;
  env.intercept = rate;
  env.exact = true;
  return env;
}

EnvelopeProvider grid_envelope(std::shared_ptr<const PdmpCharacteristics> chars, double horizon,
                               double kappa) {
  if (!chars) {
    throw InvalidArgument("grid_envelope: null characteristics");
  }
  if (!(horizon > 0.0) || !std::isfinite(horizon) || !(kappa >= 1.0)) {
    throw InvalidArgument("grid_envelope: need finite horizon > 0 and kappa >= 1");
  }
  constexpr int kGrid = 16;
  return [chars, horizon, kappa](const Vec& x, const Vec& v, std::vector<RateEnvelope>& out) {
    const auto& c = *chars;
    const std::size_t m = c.jumps.size();
    out.assign(m, RateEnvelope{});
    std::vector<double> best(m, 0.0);
    std::vector<double> r;
    const bool moving = c.flow == FlowKind::constant_velocity;
    Vec y = x;
    for (int k = 0; k < (moving ? kGrid : 1); ++k) {
      const double t = horizon * k / (kGrid - 1);
      y = x + t * v;
      c.rates(y, v, r);
      for (std::size_t i = 0; i < m; ++i) {
        if (!std::isfinite(r[i])) {
          throw NonFiniteRate("grid envelope: rate " + std::to_string(i) + " is not finite");
        }
        best[i] = std::max(best[i], r[i]);
      }
    }
    for (std::size_t i = 0; i < m; ++i) {
      if (c.jumps[i].constant_rate) {
        out[i] = constant_envelope(*c.jumps[i].constant_rate);
      } else if (!moving) {
        out[i].intercept = best[i];
        out[i].exact = true;
      } else {
        out[i].intercept = kappa * best[i];
        out[i].horizon = horizon;
      }
    }
  };
}

PdmpCharacteristics time_change_characteristics(const PdmpCharacteristics& chars,
                                                const SpeedFunction& speed) {
  if (speed.dim != 0 && speed.dim != chars.dim) {
    throw DimensionMismatch("time_change_characteristics: speed and process dimensions differ");
  }
  if (speed.form == SpeedForm::constant && speed.parameter == 1.0) {
    return chars;
  }
  PdmpCharacteristics out;
  out.dim = chars.dim;
  switch (chars.flow) {
    case FlowKind::constant_velocity:
    case FlowKind::speed_scaled_constant_velocity:
      out.flow = FlowKind::speed_scaled_constant_velocity;
      break;
    case FlowKind::stationary:
    case FlowKind::speed_scaled_stationary:
      out.flow = FlowKind::speed_scaled_stationary;
      break;
  }
  const auto s = speed.value;
  const bool constant = speed.form == SpeedForm::constant;
  for (const auto& j : chars.jumps) {
    JumpMechanism m;
    m.kernel = j.kernel;
    m.rate = [s, rate = j.rate](const Vec& x, const Vec& v) { return s(x) * rate(x, v); };
    if (constant && j.constant_rate) {
      m.constant_rate = speed.parameter * *j.constant_rate;
    }
    out.jumps.push_back(std::move(m));
  }
  if (chars.all_rates) {
    out.all_rates = [s, inner = chars.all_rates](const Vec& x, const Vec& v,
                                                 std::vector<double>& r) {
      inner(x, v, r);
      const double sx = s(x);
      for (auto& value : r) {
        value *= sx;
      }
    };
  }
  return out;
}

PdmpRun simulate_pdmp(const PdmpCharacteristics& chars, const Vec& x0, const Vec& v0,
                      double horizon, const EnvelopeProvider& envelopes, RngStream& rng,
                      const SimulationOptions& options) {
  if (chars.flow == FlowKind::speed_scaled_constant_velocity) {
    throw InvalidArgument(
        "simulate_pdmp: speed-scaled constant-velocity flows are realised by warping a base path");
  }
  if (static_cast<std::size_t>(x0.size()) != chars.dim ||
      static_cast<std::size_t>(v0.size()) != chars.dim) {
    throw DimensionMismatch("simulate_pdmp: initial state dimension differs from process");
  }
  if (!(horizon >= 0.0)) {
    throw InvalidArgument("simulate_pdmp: horizon must be non-negative");
  }
  const bool moving = chars.flow == FlowKind::constant_velocity;
  const std::size_t m = chars.jumps.size();

  PdmpRun run;
  run.skeleton = PathSkeleton(chars.dim, moving ? Dynamics::constant_velocity
                                                : Dynamics::piecewise_constant_state);
  run.skeleton.start(x0, v0);
  Vec x = x0;
  Vec v = v0;
  double t = 0.0;
  std::uint64_t events = 0;
  std::vector<RateEnvelope> env;
  auto& stats = run.stats;

  auto finish = [&](double t_end) {
    run.skeleton.close(t_end, x, v);
    run.x = x;
    run.v = v;
    run.time = t_end;
  };

  while (true) {
    if (events >= options.max_events) {
      run.stopped_early = true;
      finish(t);
      return run;
    }
    envelopes(x, v, env);
    if (env.size() != m) {
      throw InvalidArgument("simulate_pdmp: envelope provider returned wrong count");
    }
    double best = std::numeric_limits<double>::infinity();
    double expiry = std::numeric_limits<double>::infinity();
    std::size_t idx = m;
    for (std::size_t i = 0; i < m; ++i) {
      const auto& e = env[i];
      if (!std::isfinite(e.intercept) || !std::isfinite(e.slope) || std::isnan(e.horizon) ||
          !(e.horizon > 0.0)) {
        throw NonFiniteRate("simulate_pdmp: invalid envelope for mechanism " + std::to_string(i));
      }
      expiry = std::min(expiry, e.horizon);
      const double c = e.first_arrival(rng.exponential());
      if (c < best) {
        best = c;
        idx = i;
      }
    }
    const double remaining = horizon - t;
    double step = std::min({best, expiry, remaining});
    if (options.stop_rule) {
      if (auto hit = options.stop_rule(x, v, t, step)) {
        const double dt = std::clamp(*hit, 0.0, step);
        if (moving) {
          x += dt * v;
        }
        run.stopped_early = true;
        finish(t + dt);
        return run;
      }
    }
    if (!std::isfinite(step)) {
      throw InvalidArgument("simulate_pdmp: infinite horizon with no further events");
    }
    if (moving) {
      x += step * v;
    }
    if (step >= remaining) {
      finish(horizon);
      return run;
    }
    t += step;
    if (best > expiry) {
      ++stats.envelope_expiries;
      continue;
    }
    const auto& mech = chars.jumps[idx];
    const double lambda = mech.rate(x, v);
    if (!std::isfinite(lambda) || lambda < 0.0) {
      throw NonFiniteRate("simulate_pdmp: rate " + std::to_string(idx) + " evaluated to " +
                          std::to_string(lambda));
    }
    const double bound = env[idx].bound(best);
    ++stats.proposals;
    if (lambda > bound * (1.0 + options.violation_slack) + 1e-14) {
      ++stats.envelope_violations;
      throw EnvelopeViolation("simulate_pdmp: rate " + std::to_string(lambda) +
                              " exceeds envelope " + std::to_string(bound) + " for mechanism " +
                              std::to_string(idx) + " at t=" + std::to_string(t));
    }
    bool accept = false;
    if (env[idx].exact) {
      ++stats.exact_proposals;
      accept = lambda > 0.0;
      if (accept) {
        ++stats.exact_accepted;
      }
    } else {
      accept = rng.uniform() * bound < lambda;
    }
    if (!accept) {
      continue;
    }
    ++stats.accepted;
    const double last = run.skeleton.time(run.skeleton.size() - 1);
    if (t <= last) {
      t = std::nextafter(last, std::numeric_limits<double>::infinity());
    }
    const Vec xb = x;
    const Vec vb = v;
    mech.kernel->apply(x, v, rng);
    if (!mech.kernel->moves_position && x != xb) {
      throw InvalidArgument("simulate_pdmp: velocity kernel '" + mech.kernel->label +
                            "' moved the position");
    }
    run.skeleton.push(t, mech.kernel->kind, mech.kernel->coordinate, xb, vb, x, v);
    ++events;
  }
}

}  // namespace tcs
