#include "tcsampler/diffusion.hpp"

#include <cmath>
#include <limits>

#include "tcsampler/errors.hpp"

namespace tcs {

namespace {

struct Drift {
  double s;
  Vec grad_u;
  Vec grad_s;
};

Drift evaluate(const Vec& x, const TargetDensity& target, const SpeedFunction& speed) {
  Drift d{speed.value(x), target.gradient(x), speed.gradient(x)};
  if (!std::isfinite(d.s) || !d.grad_u.allFinite() || !d.grad_s.allFinite()) {
    throw NonFiniteRate("Euler-Maruyama: non-finite drift at the current state");
  }
  return d;
}

Vec normals(Eigen::Index n, RngStream& rng) {
  Vec xi(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    xi[i] = rng.normal();
  }
  return xi;
}

void check_step(double h) {
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw InvalidArgument("Euler-Maruyama: step must be positive");
  }
}

}  // namespace

Vec em_step_overdamped(const Vec& x, double h, const TargetDensity& target,
                       const SpeedFunction& speed, const Vec& xi) {
  check_step(h);
  const auto d = evaluate(x, target, speed);
  return x + h * (d.grad_s - d.s * d.grad_u) + std::sqrt(2.0 * d.s * h) * xi;
}

Vec em_step_overdamped(const Vec& x, double h, const TargetDensity& target,
                       const SpeedFunction& speed, RngStream& rng) {
  return em_step_overdamped(x, h, target, speed, normals(x.size(), rng));
}

State em_step_underdamped(const Vec& x, const Vec& v, double h, const TargetDensity& target,
                          const SpeedFunction& speed, const Vec& xi) {
  check_step(h);
  const auto d = evaluate(x, target, speed);
  State out;
  out.position = x + h * d.s * v;
  out.velocity =
      v - h * (d.s * d.grad_u - d.grad_s) - h * d.s * v + std::sqrt(2.0 * d.s * h) * xi;
  return out;
}

State em_step_underdamped(const Vec& x, const Vec& v, double h, const TargetDensity& target,
                          const SpeedFunction& speed, RngStream& rng) {
  return em_step_underdamped(x, v, h, target, speed, normals(x.size(), rng));
}

PathSkeleton simulate_sde(const SdeConfig& config, RngStream& rng) {
  check_step(config.step);
  if (!(config.horizon >= 0.0)) {
    throw InvalidArgument("simulate_sde: horizon must be non-negative");
  }
  if (static_cast<std::size_t>(config.x0.size()) != config.target.dim) {
    throw DimensionMismatch("simulate_sde: initial state dimension differs from target");
  }
  if (config.record_every == 0) {
    throw InvalidArgument("simulate_sde: record_every must be positive");
  }
  const double steps_real = std::floor(config.horizon / config.step);
  if (steps_real > static_cast<double>(std::numeric_limits<std::int64_t>::max() / 2)) {
    throw InvalidArgument("simulate_sde: horizon / step exceeds the integer range");
  }
  const auto steps = static_cast<std::uint64_t>(steps_real);
  const Eigen::Index d = config.x0.size();
  Vec x = config.x0;
  Vec v = config.v0.size() == 0 ? Vec::Zero(d) : config.v0;
  if (v.size() != d) {
    throw DimensionMismatch("simulate_sde: initial velocity dimension differs from target");
  }
  const double record_step = config.step * static_cast<double>(config.record_every);
  PathSkeleton path(static_cast<std::size_t>(d), Dynamics::discretized, record_step);
  path.reserve(steps / config.record_every + 2);
  path.start(x, v);
  for (std::uint64_t n = 1; n <= steps; ++n) {
    const Vec xb = x;
    const Vec vb = v;
    if (config.kind == SdeKind::overdamped) {
      x = em_step_overdamped(x, config.step, config.target, config.speed, rng);
    } else {
      auto s = em_step_underdamped(x, v, config.step, config.target, config.speed, rng);
      x = std::move(s.position);
      v = std::move(s.velocity);
    }
    if (n % config.record_every == 0) {
      path.push(static_cast<double>(n) * config.step, EventKind::jump, -1, xb, vb, x, v);
    }
  }
  path.close(std::max(path.time(path.size() - 1), config.horizon), x, v);
  return path;
}

}  // namespace tcs
