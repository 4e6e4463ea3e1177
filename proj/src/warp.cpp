#include "tcsampler/warp.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "tcsampler/errors.hpp"
#include "tcsampler/quadrature.hpp"

namespace tcs {

namespace {

double checked_speed(const SpeedFunction& s, const Vec& y) {
  const double value = s.value(y);
  if (!std::isfinite(value) || !(value > 0.0)) {
    throw NonFiniteRate("warp: speed evaluated to " + std::to_string(value));
  }
  return value;
}

}  // namespace

WarpTable::WarpTable(std::shared_ptr<const PathSkeleton> base, SpeedFunction speed, double tol)
    : base_(std::move(base)), speed_(std::move(speed)), tol_(tol) {
  if (!base_) {
    throw InvalidArgument("build_warp: null skeleton");
  }
  if (!(tol > 0.0)) {
    throw InvalidArgument("build_warp: tolerance must be positive");
  }
  if (!base_->closed()) {
    throw InvalidArgument("build_warp: skeleton must be closed at its horizon");
  }
  const auto dyn = base_->dynamics();
  if (dyn != Dynamics::constant_velocity && dyn != Dynamics::piecewise_constant_state) {
    throw InvalidArgument("build_warp: skeleton must be constant-velocity or piecewise-constant");
  }
  if (speed_.dim != 0 && speed_.dim != base_->dim()) {
    throw DimensionMismatch("build_warp: speed and path dimensions differ");
  }
  moving_ = dyn == Dynamics::constant_velocity;
  const std::size_t n = base_->size();
  base_breaks_.resize(n);
  changed_breaks_.resize(n);
  if (!moving_) {
    segment_speed_.resize(n);
  }
  base_breaks_[0] = 0.0;
  changed_breaks_[0] = 0.0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double du = base_->time(k + 1) - base_->time(k);
    double dt = 0.0;
    if (moving_) {
      const Vec x = base_->position_after(k);
      const Vec v = base_->velocity_after(k);
      Vec y(x.size());
      auto inv_s = [&](double u) {
        y = x + u * v;
        return 1.0 / checked_speed(speed_, y);
      };
      const auto res = adaptive_gauss_legendre(inv_s, 0.0, du, tol_);
      max_depth_ = std::max(max_depth_, res.max_depth);
      dt = res.value;
    } else {
      segment_speed_[k] = checked_speed(speed_, base_->position_after(k));
      dt = du / segment_speed_[k];
    }
    base_breaks_[k + 1] = base_->time(k + 1);
    changed_breaks_[k + 1] = changed_breaks_[k] + dt;
  }
  if (!moving_ && n > 0) {
    segment_speed_[n - 1] = checked_speed(speed_, base_->position_after(n - 1));
  }
}

double WarpTable::partial_inverse_clock(std::size_t k, double u) const {
  const double u0 = base_breaks_[k];
  if (u <= u0) {
    return 0.0;
  }
  if (!moving_) {
    return (u - u0) / segment_speed_[k];
  }
  const Vec x = base_->position_after(k);
  const Vec v = base_->velocity_after(k);
  Vec y(x.size());
  auto inv_s = [&](double w) {
    y = x + w * v;
    return 1.0 / checked_speed(speed_, y);
  };
  return adaptive_gauss_legendre(inv_s, 0.0, u - u0, tol_).value;
}

double WarpTable::changed_time(double u) const {
  const double horizon = base_breaks_.back();
  if (!(u >= 0.0) || u > horizon) {
    throw OutOfRange("r^{-1}: base time " + std::to_string(u) + " outside [0, " +
                     std::to_string(horizon) + "]");
  }
  auto it = std::upper_bound(base_breaks_.begin(), base_breaks_.end(), u);
  const std::size_t k = static_cast<std::size_t>(std::distance(base_breaks_.begin(), it)) - 1;
  if (u == base_breaks_[k]) {
    return changed_breaks_[k];
  }
  return changed_breaks_[k] + partial_inverse_clock(k, u);
}

double WarpTable::base_time(double t) const {
  const double horizon = changed_breaks_.back();
  if (!(t >= 0.0) || t > horizon) {
    throw OutOfRange("r: time " + std::to_string(t) + " outside [0, " + std::to_string(horizon) +
                     "]");
  }
  auto it = std::upper_bound(changed_breaks_.begin(), changed_breaks_.end(), t);
  const std::size_t k = static_cast<std::size_t>(std::distance(changed_breaks_.begin(), it)) - 1;
  const double target = t - changed_breaks_[k];
  if (target == 0.0 || k + 1 == changed_breaks_.size()) {
    return base_breaks_[k];
  }
  const double u0 = base_breaks_[k];
  if (!moving_) {
    return std::min(u0 + target * segment_speed_[k], base_breaks_[k + 1]);
  }
  // Newton on F(u) = int_{u0}^{u} 1/s(Y) - target, kept inside a bisection bracket.
  double lo = u0;
  double hi = base_breaks_[k + 1];
  const double seg_dt = changed_breaks_[k + 1] - changed_breaks_[k];
  double u = u0 + (hi - u0) * (target / seg_dt);
  const Vec x = base_->position_after(k);
  const Vec v = base_->velocity_after(k);
  for (int iter = 0; iter < 100; ++iter) {
    const double f = partial_inverse_clock(k, u) - target;
    if (std::abs(f) <= 0.25 * tol_) {
      return u;
    }
    if (f > 0.0) {
      hi = u;
    } else {
      lo = u;
    }
    const Vec y = x + (u - u0) * v;
    const double slope = 1.0 / checked_speed(speed_, y);
    double next = u - f / slope;
    if (!(next > lo && next < hi)) {
      next = 0.5 * (lo + hi);
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(u))) {
      return next;
    }
    u = next;
  }
  return u;
}

std::shared_ptr<const WarpTable> build_warp(std::shared_ptr<const PathSkeleton> skeleton_y,
                                            const SpeedFunction& speed, double tol) {
  return std::make_shared<const WarpTable>(std::move(skeleton_y), speed, tol);
}

PathSkeleton warp_path(std::shared_ptr<const PathSkeleton> skeleton_y,
                       std::shared_ptr<const WarpTable> warp) {
  if (!skeleton_y || !warp || &warp->base() != skeleton_y.get()) {
    throw InvalidArgument("warp_path: warp was not built from this skeleton");
  }
  const auto& y = *skeleton_y;
  PathSkeleton x(y.dim(), y.dynamics());
  x.reserve(y.size());
  const auto& t = warp->changed_breakpoints();
  x.start(y.position_after(0), y.velocity_after(0));
  const std::size_t n = y.size();
  for (std::size_t k = 1; k < n; ++k) {
    if (k + 1 == n && y.kind(k) == EventKind::horizon) {
      break;
    }
    x.push(t[k], y.kind(k), y.coordinate(k), y.position_before(k), y.velocity_before(k),
           y.position_after(k), y.velocity_after(k));
  }
  x.close(t[n - 1], y.position_after(n - 1), y.velocity_after(n - 1));
  x.attach_warp(std::move(skeleton_y), std::move(warp));
  return x;
}

}  // namespace tcs

namespace tcs {

TimeChangedPath time_change_run(PdmpRun base, const SpeedFunction& speed, double tol) {
  TimeChangedPath out;
  out.stats = base.stats;
  out.stopped_early = base.stopped_early;
  out.base = std::make_shared<const PathSkeleton>(std::move(base.skeleton));
  out.warp = build_warp(out.base, speed, tol);
  out.path = warp_path(out.base, out.warp);
  return out;
}

SegmentStopRule changed_time_horizon_rule(const SpeedFunction& speed, double horizon, bool moving,
                                          double tol) {
  if (!(horizon >= 0.0)) {
    throw InvalidArgument("changed_time_horizon_rule: horizon must be non-negative");
  }
  auto accumulated = std::make_shared<double>(0.0);
  return [speed, horizon, moving, tol, accumulated](const Vec& x, const Vec& v, double,
                                                    double duration) -> std::optional<double> {
    const double need = horizon - *accumulated;
    if (!moving) {
      const double s = checked_speed(speed, x);
      if (duration / s >= need) {
        return need * s;
      }
      *accumulated += duration / s;
      return std::nullopt;
    }
    Vec y(x.size());
    auto inv_s = [&](double u) {
      y = x + u * v;
      return 1.0 / checked_speed(speed, y);
    };
    if (!std::isfinite(duration)) {
      // Open-ended segment: 1/s is bounded below on any finite stretch, so
      // step through unit pieces until the target is reached.
      double u = 0.0;
      double acc = 0.0;
      while (true) {
        const double piece = adaptive_gauss_legendre(inv_s, u, u + 1.0, tol).value;
        if (acc + piece >= need) {
          break;
        }
        acc += piece;
        u += 1.0;
      }
      duration = u + 1.0;
    }
    const double total = adaptive_gauss_legendre(inv_s, 0.0, duration, tol).value;
    if (total < need) {
      *accumulated += total;
      return std::nullopt;
    }
    double lo = 0.0;
    double hi = duration;
    double u = duration * (need / total);
    for (int iter = 0; iter < 200; ++iter) {
      const double f = adaptive_gauss_legendre(inv_s, 0.0, u, tol).value - need;
      if (std::abs(f) <= 0.25 * tol) {
        break;
      }
      (f > 0.0 ? hi : lo) = u;
      double next = u - f / inv_s(u);
      if (!(next > lo && next < hi)) {
        next = 0.5 * (lo + hi);
      }
      if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, u)) {
        u = next;
        break;
      }
      u = next;
    }
    *accumulated = horizon;
    return u;
  };
}

SegmentStopRule earliest_stop(SegmentStopRule a, SegmentStopRule b) {
  if (!a) {
    return b;
  }
  if (!b) {
    return a;
  }
  return [a = std::move(a), b = std::move(b)](const Vec& x, const Vec& v, double t0,
                                              double duration) -> std::optional<double> {
    auto ha = a(x, v, t0, duration);
    auto hb = b(x, v, t0, duration);
    if (ha && hb) {
      return std::min(*ha, *hb);
    }
    return ha ? ha : hb;
  };
}

}  // namespace tcs
