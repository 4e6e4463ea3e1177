#include "tcsampler/zigzag.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "tcsampler/errors.hpp"
#include "tcsampler/parallel.hpp"
#include "tcsampler/quadrature.hpp"

namespace tcs {

namespace {

void check_velocity(const Vec& w) {
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w[i] != 1.0 && w[i] != -1.0) {
      throw InvalidArgument("zig-zag: velocity components must be +1 or -1");
    }
  }
}

Vec finite_gradient(const TiltedPotential& tilted, const Vec& x) {
  Vec g = tilted.gradient(x);
  if (!g.allFinite()) {
    throw NonFiniteRate("zig-zag: gradient of the tilted potential is not finite");
  }
  return g;
}

std::shared_ptr<const JumpKernel> flip_kernel(int i, EventKind kind) {
  auto k = std::make_shared<JumpKernel>();
  k->apply = [i](Vec&, Vec& v, RngStream&) { v[i] = -v[i]; };
  k->kind = kind;
  k->coordinate = i;
  k->label = kind == EventKind::flip ? "flip" : "refresh_flip";
  return k;
}

double sign_of(double x) { return (x > 0.0) - (x < 0.0); }

}  // namespace

std::vector<double> zz_rates(const Vec& x, const Vec& w, const TiltedPotential& tilted,
                             const std::vector<double>& gamma) {
  const std::size_t d = tilted.dim();
  if (static_cast<std::size_t>(x.size()) != d || static_cast<std::size_t>(w.size()) != d) {
    throw DimensionMismatch("zz_rates: state dimension differs from target");
  }
  if (!gamma.empty() && gamma.size() != d) {
    throw DimensionMismatch("zz_rates: refreshment rates must have one entry per coordinate");
  }
  check_velocity(w);
  const Vec g = finite_gradient(tilted, x);
  std::vector<double> out(d);
  for (std::size_t i = 0; i < d; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    out[i] = std::max(0.0, w[ii] * g[ii]) + (gamma.empty() ? 0.0 : gamma[i]);
  }
  return out;
}

std::shared_ptr<const PdmpCharacteristics> zigzag_characteristics(
    const TiltedPotential& tilted, const std::vector<double>& refresh,
    std::function<Vec(const Vec&)> refresh_fn) {
  const std::size_t d = tilted.dim();
  if (!refresh.empty() && refresh.size() != d) {
    throw DimensionMismatch("zig-zag: refreshment rates must have one entry per coordinate");
  }
  for (double g : refresh) {
    if (!(g >= 0.0) || !std::isfinite(g)) {
      throw InvalidArgument("zig-zag: refreshment rates must be finite and non-negative");
    }
  }
  auto chars = std::make_shared<PdmpCharacteristics>();
  chars->dim = d;
  chars->flow = FlowKind::constant_velocity;
  auto tilted_ptr = std::make_shared<const TiltedPotential>(tilted);
  for (std::size_t i = 0; i < d; ++i) {
    JumpMechanism m;
    const auto ii = static_cast<Eigen::Index>(i);
    m.rate = [tilted_ptr, ii](const Vec& x, const Vec& v) {
      return std::max(0.0, v[ii] * finite_gradient(*tilted_ptr, x)[ii]);
    };
    m.kernel = flip_kernel(static_cast<int>(i), EventKind::flip);
    chars->jumps.push_back(std::move(m));
  }
  // Refresh mechanisms, one per coordinate with positive refreshment.
  std::vector<std::size_t> refresh_coords;
  for (std::size_t i = 0; i < d; ++i) {
    const bool active = refresh_fn ? true : (!refresh.empty() && refresh[i] > 0.0);
    if (!active) {
      continue;
    }
    refresh_coords.push_back(i);
    JumpMechanism m;
    const auto ii = static_cast<Eigen::Index>(i);
    if (refresh_fn) {
      m.rate = [refresh_fn, ii](const Vec& x, const Vec&) { return refresh_fn(x)[ii]; };
    } else {
      const double g = refresh[i];
      m.rate = [g](const Vec&, const Vec&) { return g; };
      m.constant_rate = g;
    }
    m.kernel = flip_kernel(static_cast<int>(i), EventKind::refresh);
    chars->jumps.push_back(std::move(m));
  }
  chars->all_rates = [tilted_ptr, d, refresh, refresh_fn, refresh_coords](
                         const Vec& x, const Vec& v, std::vector<double>& out) {
    const Vec g = finite_gradient(*tilted_ptr, x);
    for (std::size_t i = 0; i < d; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      out[i] = std::max(0.0, v[ii] * g[ii]);
    }
    if (refresh_coords.empty()) {
      return;
    }
    Vec gam;
    if (refresh_fn) {
      gam = refresh_fn(x);
    }
    for (std::size_t j = 0; j < refresh_coords.size(); ++j) {
      const std::size_t i = refresh_coords[j];
      out[d + j] = refresh_fn ? gam[static_cast<Eigen::Index>(i)] : refresh[i];
    }
  };
  return chars;
}

EnvelopeProvider zigzag_envelope(const TiltedPotential& tilted,
                                 std::shared_ptr<const PdmpCharacteristics> chars, double horizon,
                                 double kappa) {
  bool constant_refresh = true;
  for (std::size_t i = chars->dim; i < chars->jumps.size(); ++i) {
    constant_refresh = constant_refresh && chars->jumps[i].constant_rate.has_value();
  }
  if (!tilted.affine_gradient_along_lines() || !constant_refresh) {
    return grid_envelope(std::move(chars), horizon, kappa);
  }
  auto tilted_ptr = std::make_shared<const TiltedPotential>(tilted);
  return [tilted_ptr, chars](const Vec& x, const Vec& v, std::vector<RateEnvelope>& out) {
    const std::size_t d = chars->dim;
    out.assign(chars->jumps.size(), RateEnvelope{});
    // grad U~ is affine along x + t v, so its slope is g(x + v) - g(x).
    const Vec g0 = finite_gradient(*tilted_ptr, x);
    const Vec g1 = finite_gradient(*tilted_ptr, x + v);
    for (std::size_t i = 0; i < d; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      out[i].intercept = v[ii] * g0[ii];
      out[i].slope = v[ii] * (g1[ii] - g0[ii]);
      out[i].exact = true;
    }
    for (std::size_t i = d; i < out.size(); ++i) {
      out[i] = constant_envelope(*chars->jumps[i].constant_rate);
    }
  };
}

PdmpRun simulate_zigzag(const ZigZagConfig& config, RngStream& rng) {
  const auto tilted = make_tilted(config.target, config.speed);
  check_velocity(config.v0);
  auto chars = zigzag_characteristics(tilted, config.refresh, config.refresh_fn);
  auto env = zigzag_envelope(tilted, chars, config.envelope_horizon, config.kappa);
  return simulate_pdmp(*chars, config.x0, config.v0, config.horizon, env, rng, config.options);
}

TimeChangedPath simulate_timechanged_zigzag(const ZigZagConfig& config, RngStream& rng) {
  ZigZagConfig base = config;
  base.options.stop_rule = earliest_stop(
      config.options.stop_rule,
      changed_time_horizon_rule(config.speed, config.horizon, true, config.warp_tol));
  base.horizon = std::numeric_limits<double>::infinity();
  return time_change_run(simulate_zigzag(base, rng), config.speed, config.warp_tol);
}

double crossing_probability(const TargetDensity& target, const SpeedFunction& speed, double x0,
                            double x1) {
  if (target.dim != 1) {
    throw DimensionMismatch("crossing_probability: target must be one-dimensional");
  }
  const auto tilted = make_tilted(target, speed);
  constexpr int kGrid = 1000;
  Vec y(1);
  for (int k = 1; k < kGrid; ++k) {
    y[0] = x0 + (x1 - x0) * k / kGrid;
    const double du = target.gradient(y)[0];
    const double dut = tilted.gradient(y)[0];
    if (sign_of(du) != sign_of(dut)) {
      throw PreconditionViolation("crossing_probability: sign of U~' differs from sign of U' at x=" +
                                  std::to_string(y[0]));
    }
  }
  Vec a(1);
  Vec b(1);
  a[0] = x0;
  b[0] = x1;
  return std::exp(speed.log_value(b) - speed.log_value(a) -
                  (target.potential(b) - target.potential(a)));
}

double tail_escape_formula(const TargetDensity& target, const SpeedFunction& speed, const Vec& x0,
                           const Vec& v, double c) {
  if (static_cast<std::size_t>(x0.size()) != target.dim || v.size() != x0.size()) {
    throw DimensionMismatch("tail_escape: state dimension differs from target");
  }
  check_velocity(v);
  if (!(c >= 0.0)) {
    throw InvalidArgument("tail_escape: distance must be non-negative");
  }
  const Vec xc = x0 + v * (c / std::sqrt(static_cast<double>(x0.size())));
  return std::exp(speed.log_value(xc) - speed.log_value(x0) -
                  (target.potential(xc) - target.potential(x0)));
}

double tail_escape_probability(const TargetDensity& target, const SpeedFunction& speed,
                               const Vec& x0, const Vec& v, double c) {
  const double p = tail_escape_formula(target, speed, x0, v, c);
  if (c == 0.0) {
    return 1.0;
  }
  const auto tilted = make_tilted(target, speed);
  const double duration = c / std::sqrt(static_cast<double>(x0.size()));
  constexpr int kGrid = 1000;
  for (int k = 1; k <= kGrid; ++k) {
    const Vec y = x0 + v * (duration * k / kGrid);
    const Vec g = tilted.gradient(y);
    double total = 0.0;
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      const double r = v[i] * g[i];
      if (r < 0.0) {
        throw PreconditionViolation("tail_escape_probability: rate of coordinate " +
                                    std::to_string(i) + " is negative along the ray");
      }
      total += r;
    }
    if (!(total > 0.0)) {
      throw PreconditionViolation("tail_escape_probability: rate vanishes along the ray");
    }
  }
  return p;
}

bool first_excursion_trial(const TiltedPotential& tilted, const Vec& x0, const Vec& v,
                           double distance, RngStream& rng) {
  auto chars = zigzag_characteristics(tilted);
  auto env = zigzag_envelope(tilted, chars);
  SimulationOptions opts;
  opts.max_events = 1;
  const auto run = simulate_pdmp(*chars, x0, v, distance, env, rng, opts);
  return run.skeleton.event_count() == 0;
}

std::pair<double, double> ols_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw InvalidArgument("ols_fit: need at least two paired points");
  }
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (!(sxx > 0.0)) {
    throw InvalidArgument("ols_fit: x values are all equal");
  }
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

EyringKramersResult eyring_kramers_experiment(const TargetDensity& target, double a,
                                              const std::vector<double>& epsilons,
                                              std::size_t replications, std::uint64_t seed,
                                              const EyringKramersOptions& options) {
  if (target.dim != 1) {
    throw DimensionMismatch("eyring_kramers_experiment: target must be one-dimensional");
  }
  if (!(a >= 0.0) || !(a < 1.0)) {
    throw InvalidArgument("eyring_kramers_experiment: a must lie in [0, 1)");
  }
  if (replications == 0 || epsilons.empty()) {
    throw InvalidArgument("eyring_kramers_experiment: need replications and epsilon values");
  }
  EyringKramersResult result;
  result.a = a;
  std::size_t stream_base = 0;
  for (double eps : epsilons) {
    if (!(eps > 0.0)) {
      throw InvalidArgument("eyring_kramers_experiment: epsilon must be positive");
    }
    const auto scaled = scale_potential(target, 1.0 / eps);
    const auto speed = exp_alpha_potential(scaled, a);
    const auto tilted = make_tilted(scaled, speed);
    auto chars = zigzag_characteristics(tilted);
    auto env = zigzag_envelope(tilted, chars);
    const double beta = a / eps;
    const auto potential = target.potential;

    std::vector<double> times(replications, 0.0);
    std::vector<char> failed(replications, 0);
    parallel_for(replications, options.threads, [&](std::size_t r) {
      RngStream rng(seed, stream_base + r);
      // Time-changed clock: int exp(-(a/eps) U(Y)) du along each base segment.
      auto clock = std::make_shared<double>(0.0);
      SimulationOptions opts;
      const double x1 = options.x1;
      opts.stop_rule = [clock, x1, beta, potential](const Vec& x, const Vec& v, double,
                                                    double duration) -> std::optional<double> {
        double len = duration;
        bool hit = false;
        const double off = (x1 - x[0]) / v[0];
        if (off >= 0.0 && off <= duration) {
          len = off;
          hit = true;
        }
        if (beta == 0.0) {
          *clock += len;
        } else if (len > 0.0) {
          Vec y(1);
          auto inv_s = [&](double u) {
            y[0] = x[0] + u * v[0];
            return std::exp(-beta * potential(y));
          };
          *clock += adaptive_gauss_legendre(inv_s, 0.0, len, 1e-10).value;
        }
        return hit ? std::optional<double>(len) : std::nullopt;
      };
      Vec x0(1);
      Vec v0(1);
      x0[0] = options.x0;
      v0[0] = options.v0;
      const auto run = simulate_pdmp(*chars, x0, v0, options.max_base_time, env, rng, opts);
      if (run.stopped_early) {
        times[r] = *clock;
      } else {
        failed[r] = 1;
      }
    });
    stream_base += replications;

    EyringKramersRow row;
    row.epsilon = eps;
    double sum = 0.0;
    double sum2 = 0.0;
    for (std::size_t r = 0; r < replications; ++r) {
      if (failed[r]) {
        ++row.failures;
        continue;
      }
      ++row.replications;
      sum += times[r];
      sum2 += times[r] * times[r];
    }
    if (row.replications > 0) {
      const double n = static_cast<double>(row.replications);
      row.mean_time = sum / n;
      const double var = n > 1 ? (sum2 - n * row.mean_time * row.mean_time) / (n - 1) : 0.0;
      row.standard_error = std::sqrt(std::max(0.0, var) / n);
    }
    result.rows.push_back(row);
  }
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& row : result.rows) {
    if (row.replications > 0 && row.mean_time > 0.0) {
      xs.push_back(1.0 / row.epsilon);
      ys.push_back(std::log(row.mean_time));
    }
  }
  if (xs.size() >= 2) {
    std::tie(result.slope, result.intercept) = ols_fit(xs, ys);
  }
  return result;
}

}  // namespace tcs
