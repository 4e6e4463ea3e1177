#include "tcsampler/jumpchain.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <utility>

#include "tcsampler/errors.hpp"
#include "tcsampler/zigzag.hpp"

namespace tcs {

MarkovKernel rwm_kernel(const TiltedPotential& tilted, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw InvalidArgument("rwm_kernel: proposal scale must be positive");
  }
  auto target = std::make_shared<const TiltedPotential>(tilted);
  MarkovKernel k;
  k.declared_invariant = target;
  k.label = "rwm";
  k.sample = [target, sigma](const Vec& x, RngStream& rng) -> Vec {
    Vec y(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      y[i] = x[i] + sigma * rng.normal();
    }
    const double log_ratio = target->potential(x) - target->potential(y);
    // Always draw the uniform so the stream advances identically per step.
    const double u = rng.uniform_open();
    if (log_ratio >= 0.0 || std::log(u) < log_ratio) {
      return y;
    }
    return x;
  };
  return k;
}

MarkovKernel zz_fixed_time_kernel(const TiltedPotential& tilted, double delta,
                                  double envelope_horizon, double kappa) {
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw InvalidArgument("zz_fixed_time_kernel: mean duration must be positive");
  }
  auto target = std::make_shared<const TiltedPotential>(tilted);
  auto chars = zigzag_characteristics(tilted);
  auto env = std::make_shared<const EnvelopeProvider>(
      zigzag_envelope(tilted, chars, envelope_horizon, kappa));
  MarkovKernel k;
  k.declared_invariant = target;
  k.label = "zz_fixed_time";
  k.sample = [chars, env, delta](const Vec& x, RngStream& rng) -> Vec {
    const double duration = rng.exponential(1.0 / delta);
    Vec v(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      v[i] = rng.sign();
    }
    return simulate_pdmp(*chars, x, v, duration, *env, rng).x;
  };
  return k;
}

MarkovKernel zz_lifted_kernel(const TiltedPotential& tilted, double delta,
                              double envelope_horizon, double kappa) {
  MarkovKernel k = zz_fixed_time_kernel(tilted, delta, envelope_horizon, kappa);
  auto chars = zigzag_characteristics(tilted);
  auto env = std::make_shared<const EnvelopeProvider>(
      zigzag_envelope(tilted, chars, envelope_horizon, kappa));
  k.label = "zz_lifted";
  k.lifted_sample = [chars, env, delta](const Vec& x, Vec& v, RngStream& rng) -> Vec {
    const double duration = rng.exponential(1.0 / delta);
    auto end = simulate_pdmp(*chars, x, v, duration, *env, rng);
    v = std::move(end.v);
    return std::move(end.x);
  };
  return k;
}

namespace {

double holding_rate(const SpeedFunction& speed, const Vec& x) {
  const double s = speed.value(x);
  if (!std::isfinite(s) || !(s > 0.0)) {
    throw NonFiniteRate("algorithm1: speed evaluated to " + std::to_string(s));
  }
  return s;
}

PathSkeleton run_algorithm1(const SpeedFunction& speed, const MarkovKernel& kernel,
                            const Vec& x0, double horizon, std::uint64_t max_jumps,
                            RngStream& rng) {
  if (!kernel.sample && !kernel.lifted_sample) {
    throw InvalidArgument("algorithm1: kernel has no sampler");
  }
  if (speed.dim != 0 && static_cast<std::size_t>(x0.size()) != speed.dim) {
    throw DimensionMismatch("algorithm1: initial state dimension differs from speed");
  }
  const Vec zero = Vec::Zero(x0.size());
  PathSkeleton path(static_cast<std::size_t>(x0.size()), Dynamics::piecewise_constant_state);
  if (max_jumps != std::numeric_limits<std::uint64_t>::max()) {
    path.reserve(max_jumps + 2);
  }
  path.start(x0, zero);
  Vec x = x0;
  Vec v;
  if (kernel.lifted_sample) {
    v.resize(x0.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      v[i] = rng.sign();
    }
  }
  double t = 0.0;
  for (std::uint64_t n = 0; n < max_jumps; ++n) {
    const double tau = rng.exponential(holding_rate(speed, x));
    if (t + tau >= horizon) {
      path.close(horizon, x, zero);
      return path;
    }
    Vec y = kernel.lifted_sample ? kernel.lifted_sample(x, v, rng) : kernel.sample(x, rng);
    if (t + tau > t) {
      t += tau;
      path.push(t, EventKind::jump, -1, x, zero, y, zero);
    } else {
      // Holding time below the resolution of t: the visit to x has no
      // representable duration, so the previous record jumps straight to y.
      path.amend_last(y, zero);
    }
    x = std::move(y);
  }
  path.close(t, x, zero);
  return path;
}

}  // namespace

PathSkeleton algorithm1(const SpeedFunction& speed, const MarkovKernel& kernel, const Vec& x0,
                        double horizon, RngStream& rng) {
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) {
    throw InvalidArgument("algorithm1: horizon must be finite and non-negative");
  }
  return run_algorithm1(speed, kernel, x0, horizon, std::numeric_limits<std::uint64_t>::max(),
                        rng);
}

PathSkeleton algorithm1_jumps(const SpeedFunction& speed, const MarkovKernel& kernel,
                              const Vec& x0, std::uint64_t n_jumps, RngStream& rng) {
  return run_algorithm1(speed, kernel, x0, std::numeric_limits<double>::infinity(), n_jumps, rng);
}

double balance(BalanceFunction g, double t) {
  switch (g) {
    case BalanceFunction::metropolis:
      return std::min(1.0, t);
    case BalanceFunction::barker:
      return t / (1.0 + t);
  }
  return 0.0;
}

void DiscreteChainSpec::validate() const {
  const std::size_t n = weights.size();
  if (n == 0) {
    throw InvalidArgument("discrete spec: no states");
  }
  if (neighbors.size() != n || speed.size() != n) {
    throw InvalidArgument("discrete spec: weights, neighbors and speed must have equal length");
  }
  for (std::size_t x = 0; x < n; ++x) {
    if (!(weights[x] > 0.0) || !std::isfinite(weights[x])) {
      throw InvalidArgument("discrete spec: weights must be positive and finite");
    }
    if (!(speed[x] > 0.0) || !std::isfinite(speed[x])) {
      throw InvalidArgument("discrete spec: speed values must be positive and finite");
    }
    if (neighbors[x].empty()) {
      throw InvalidArgument("discrete spec: state " + std::to_string(x) + " is isolated");
    }
    for (std::size_t z : neighbors[x]) {
      if (z >= n || z == x) {
        throw InvalidArgument("discrete spec: invalid neighbour of state " + std::to_string(x));
      }
      const auto& back = neighbors[z];
      if (std::find(back.begin(), back.end(), x) == back.end()) {
        throw InvalidArgument("discrete spec: adjacency is not symmetric");
      }
    }
  }
}

double DiscreteChainSpec::rate(std::size_t x, std::size_t z) const {
  const double ratio = (speed[z] * weights[z]) / (speed[x] * weights[x]);
  return speed[x] * balance(g, ratio);
}

PathSkeleton discrete_sampler(const DiscreteChainSpec& spec, std::size_t x0, double horizon,
                              RngStream& rng) {
  spec.validate();
  if (x0 >= spec.size()) {
    throw InvalidArgument("discrete_sampler: initial state out of range");
  }
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) {
    throw InvalidArgument("discrete_sampler: horizon must be finite and non-negative");
  }
  const Vec zero = Vec::Zero(1);
  Vec pos(1);
  pos[0] = static_cast<double>(x0);
  PathSkeleton path(1, Dynamics::piecewise_constant_state);
  path.start(pos, zero);
  // Per-state cumulative rates, computed once.
  std::vector<std::vector<double>> cumulative(spec.size());
  for (std::size_t x = 0; x < spec.size(); ++x) {
    double acc = 0.0;
    for (std::size_t z : spec.neighbors[x]) {
      acc += spec.rate(x, z);
      cumulative[x].push_back(acc);
    }
  }
  std::size_t x = x0;
  double t = 0.0;
  while (true) {
    const double total = cumulative[x].back();
    const double tau = rng.exponential(total);
    if (t + tau >= horizon) {
      break;
    }
    t += tau;
    const double u = rng.uniform() * total;
    const auto& cum = cumulative[x];
    auto it = std::upper_bound(cum.begin(), cum.end(), u);
    const std::size_t j = std::min<std::size_t>(static_cast<std::size_t>(it - cum.begin()),
                                                cum.size() - 1);
    const std::size_t z = spec.neighbors[x][j];
    Vec next(1);
    next[0] = static_cast<double>(z);
    path.push(t, EventKind::jump, -1, pos, zero, next, zero);
    pos = next;
    x = z;
  }
  path.close(horizon, pos, zero);
  return path;
}

std::vector<double> exact_stationary(const DiscreteChainSpec& spec) {
  spec.validate();
  const std::size_t n = spec.size();
  if (n > 10000) {
    throw InvalidArgument("exact_stationary: at most 10^4 states supported");
  }
  const auto ni = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd gen = Eigen::MatrixXd::Zero(ni, ni);
  for (std::size_t x = 0; x < n; ++x) {
    double total = 0.0;
    for (std::size_t z : spec.neighbors[x]) {
      const double r = spec.rate(x, z);
      gen(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(z)) += r;
      total += r;
    }
    gen(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(x)) = -total;
  }
  // pi G = 0  <=>  G^T pi^T = 0; replace one equation by the normalisation.
  Eigen::MatrixXd a = gen.transpose();
  a.row(ni - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(ni);
  b[ni - 1] = 1.0;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-14)) {
    throw SingularSystem("exact_stationary: generator system is singular (rcond " +
                         std::to_string(rcond) + ")");
  }
  const Eigen::VectorXd pi = lu.solve(b);
  const double residual = (gen.transpose() * pi).lpNorm<Eigen::Infinity>();
  const double scale = gen.lpNorm<Eigen::Infinity>();
  if (!pi.allFinite() || residual > 1e-9 * std::max(1.0, scale)) {
    throw SingularSystem("exact_stationary: solution residual too large");
  }
  return {pi.data(), pi.data() + n};
}

std::vector<double> occupation_times(const PathSkeleton& path, std::size_t n_states) {
  std::vector<double> occ(n_states, 0.0);
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const auto s = static_cast<std::size_t>(path.position_after(i)[0]);
    if (s >= n_states) {
      throw OutOfRange("occupation_times: state index out of range");
    }
    occ[s] += path.time(i + 1) - path.time(i);
  }
  return occ;
}

}  // namespace tcs
