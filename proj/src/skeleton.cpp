#include "tcsampler/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "tcsampler/errors.hpp"

namespace tcs {

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::start:
      return "start";
    case EventKind::flip:
      return "flip";
    case EventKind::reflect:
      return "reflect";
    case EventKind::refresh:
      return "refresh";
    case EventKind::jump:
      return "jump";
    case EventKind::horizon:
      return "horizon";
  }
  return "unknown";
}

EventKind event_kind_from_string(std::string_view name) {
  for (auto k : {EventKind::start, EventKind::flip, EventKind::reflect, EventKind::refresh,
                 EventKind::jump, EventKind::horizon}) {
    if (to_string(k) == name) {
      return k;
    }
  }
  throw InvalidArgument("unknown event kind '" + std::string(name) + "'");
}

std::string_view to_string(Dynamics dynamics) {
  switch (dynamics) {
    case Dynamics::constant_velocity:
      return "constant_velocity";
    case Dynamics::piecewise_constant_state:
      return "piecewise_constant_state";
    case Dynamics::discretized:
      return "discretized";
    case Dynamics::speed_scaled:
      return "speed_scaled";
  }
  return "unknown";
}

PathSkeleton::PathSkeleton(std::size_t dim, Dynamics dynamics, double step)
    : dim_(dim), dynamics_(dynamics), step_(step) {
  if (dim == 0) {
    throw InvalidArgument("path skeleton: dimension must be positive");
  }
  if (dynamics == Dynamics::discretized && !(step > 0.0)) {
    throw InvalidArgument("path skeleton: discretized dynamics need a positive step");
  }
}

namespace {

Eigen::Map<const Vec> row(const std::vector<double>& flat, std::size_t i, std::size_t d) {
  return {flat.data() + i * d, static_cast<Eigen::Index>(d)};
}

void append(std::vector<double>& flat, const Vec& v, std::size_t d) {
  if (static_cast<std::size_t>(v.size()) != d) {
    throw DimensionMismatch("path skeleton: state of dimension " + std::to_string(v.size()) +
                            ", expected " + std::to_string(d));
  }
  flat.insert(flat.end(), v.data(), v.data() + d);
}

}  // namespace

Eigen::Map<const Vec> PathSkeleton::position_before(std::size_t i) const { return row(xb_, i, dim_); }
Eigen::Map<const Vec> PathSkeleton::velocity_before(std::size_t i) const { return row(vb_, i, dim_); }
Eigen::Map<const Vec> PathSkeleton::position_after(std::size_t i) const { return row(xa_, i, dim_); }
Eigen::Map<const Vec> PathSkeleton::velocity_after(std::size_t i) const { return row(va_, i, dim_); }

EventView PathSkeleton::event(std::size_t i) const {
  if (i >= times_.size()) {
    throw OutOfRange("path skeleton: event index out of range");
  }
  return {times_[i],          kinds_[i],          coords_[i],         position_before(i),
          velocity_before(i), position_after(i), velocity_after(i)};
}

std::size_t PathSkeleton::event_count() const {
  std::size_t n = 0;
  for (auto k : kinds_) {
    if (k != EventKind::start && k != EventKind::horizon) {
      ++n;
    }
  }
  return n;
}

void PathSkeleton::reserve(std::size_t n) {
  times_.reserve(n);
  kinds_.reserve(n);
  coords_.reserve(n);
  xb_.reserve(n * dim_);
  vb_.reserve(n * dim_);
  xa_.reserve(n * dim_);
  va_.reserve(n * dim_);
}

void PathSkeleton::start(const Vec& x, const Vec& v) {
  if (!times_.empty()) {
    throw InvalidArgument("path skeleton: already started");
  }
  times_.push_back(0.0);
  kinds_.push_back(EventKind::start);
  coords_.push_back(-1);
  append(xb_, x, dim_);
  append(vb_, v, dim_);
  append(xa_, x, dim_);
  append(va_, v, dim_);
}

void PathSkeleton::push(double t, EventKind kind, int coordinate, const Vec& x_before,
                        const Vec& v_before, const Vec& x_after, const Vec& v_after) {
  if (times_.empty()) {
    throw InvalidArgument("path skeleton: push before start");
  }
  if (closed_) {
    throw InvalidArgument("path skeleton: push after close");
  }
  if (!(t > times_.back())) {
    throw InvalidArgument("path skeleton: event times must be strictly increasing");
  }
  times_.push_back(t);
  kinds_.push_back(kind);
  coords_.push_back(coordinate);
  append(xb_, x_before, dim_);
  append(vb_, v_before, dim_);
  append(xa_, x_after, dim_);
  append(va_, v_after, dim_);
}

void PathSkeleton::amend_last(const Vec& x_after, const Vec& v_after) {
  if (times_.empty() || closed_) {
    throw InvalidArgument("path skeleton: amend needs an open, started path");
  }
  if (static_cast<std::size_t>(x_after.size()) != dim_ || static_cast<std::size_t>(v_after.size()) != dim_) {
    throw DimensionMismatch("path skeleton: state dimension differs from the path");
  }
  const std::size_t off = (times_.size() - 1) * dim_;
  std::copy(x_after.data(), x_after.data() + dim_, xa_.begin() + static_cast<std::ptrdiff_t>(off));
  std::copy(v_after.data(), v_after.data() + dim_, va_.begin() + static_cast<std::ptrdiff_t>(off));
}

void PathSkeleton::close(double t, const Vec& x, const Vec& v) {
  if (times_.empty()) {
    throw InvalidArgument("path skeleton: close before start");
  }
  if (t < times_.back()) {
    throw InvalidArgument("path skeleton: horizon precedes the last event");
  }
  if (t > times_.back()) {
    push(t, EventKind::horizon, -1, x, v, x, v);
  }
  horizon_ = t;
  closed_ = true;
}

std::size_t PathSkeleton::segment_index(double t) const {
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  return static_cast<std::size_t>(std::distance(times_.begin(), it)) - 1;
}

State PathSkeleton::state_at(double t) const {
  if (times_.empty() || !(t >= 0.0) || t > horizon_) {
    throw OutOfRange("state_at: time " + std::to_string(t) + " outside [0, " +
                     std::to_string(horizon_) + "]");
  }
  if (dynamics_ == Dynamics::speed_scaled) {
    const double u = std::min(map_->base_time(t), base_->horizon());
    return base_->state_at(u);
  }
  const std::size_t i = segment_index(t);
  State s{Vec(position_after(i)), Vec(velocity_after(i))};
  if (dynamics_ == Dynamics::constant_velocity) {
    s.position += (t - times_[i]) * s.velocity;
  }
  return s;
}

Vec PathSkeleton::position_at(double t) const { return state_at(t).position; }

void PathSkeleton::attach_warp(std::shared_ptr<const PathSkeleton> base,
                               std::shared_ptr<const TimeMap> map) {
  if (!base || !map) {
    throw InvalidArgument("attach_warp: null base or map");
  }
  if (base->dynamics() != Dynamics::constant_velocity &&
      base->dynamics() != Dynamics::piecewise_constant_state) {
    throw InvalidArgument("attach_warp: base must be constant-velocity or piecewise-constant");
  }
  // A time-changed piecewise-constant path is still piecewise constant.
  if (base->dynamics() == Dynamics::constant_velocity) {
    dynamics_ = Dynamics::speed_scaled;
  }
  base_ = std::move(base);
  map_ = std::move(map);
}

void PathSkeleton::validate(double tol) const {
  if (times_.empty() || times_.front() != 0.0) {
    throw InvalidArgument("skeleton invalid: first event must be at time 0");
  }
  for (std::size_t i = 1; i < times_.size(); ++i) {
    if (!(times_[i] > times_[i - 1])) {
      throw InvalidArgument("skeleton invalid: times not strictly increasing at " +
                            std::to_string(i));
    }
  }
  if (closed_ && times_.back() > horizon_) {
    throw InvalidArgument("skeleton invalid: last event after horizon");
  }
  for (std::size_t i = 1; i < times_.size(); ++i) {
    const double dt = times_[i] - times_[i - 1];
    Vec expected = position_after(i - 1);
    if (dynamics_ == Dynamics::constant_velocity) {
      expected += dt * velocity_after(i - 1);
    } else if (dynamics_ != Dynamics::piecewise_constant_state) {
      continue;
    }
    const double err = (expected - position_before(i)).lpNorm<Eigen::Infinity>();
    if (err > tol * std::max(1.0, expected.lpNorm<Eigen::Infinity>())) {
      throw InvalidArgument("skeleton invalid: state continuity broken at event " +
                            std::to_string(i));
    }
  }
}

State SkeletonCursor::state_at(double t) {
  const auto& p = *path_;
  if (p.dynamics() == Dynamics::speed_scaled) {
    return p.state_at(t);
  }
  if (p.empty() || !(t >= 0.0) || t > p.horizon()) {
    throw OutOfRange("cursor: time outside path range");
  }
  if (t < p.time(index_)) {
    index_ = p.segment_index(t);
  }
  while (index_ + 1 < p.size() && p.time(index_ + 1) <= t) {
    ++index_;
  }
  State s{Vec(p.position_after(index_)), Vec(p.velocity_after(index_))};
  if (p.dynamics() == Dynamics::constant_velocity) {
    s.position += (t - p.time(index_)) * s.velocity;
  }
  return s;
}

Vec SkeletonCursor::position_at(double t) { return state_at(t).position; }

}  // namespace tcs
