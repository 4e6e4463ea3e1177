#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "tcsampler/target.hpp"

namespace tcs {

enum class EventKind { start, flip, reflect, refresh, jump, horizon };

std::string_view to_string(EventKind kind);
EventKind event_kind_from_string(std::string_view name);

enum class Dynamics {
  constant_velocity,
  piecewise_constant_state,
  discretized,
  /// X_t = Y_{r(t)} for a constant-velocity base path Y.
  speed_scaled,
};

std::string_view to_string(Dynamics dynamics);

struct State {
  Vec position;
  Vec velocity;
};

/// Monotone clock between a base path (time u) and a time-changed path (time t).
class TimeMap {
 public:
  virtual ~TimeMap() = default;
  /// r(t): base time reached after time-changed time t.
  virtual double base_time(double t) const = 0;
  /// r^{-1}(u): time-changed time at which the base path reaches u.
  virtual double changed_time(double u) const = 0;
  virtual double base_horizon() const = 0;
  virtual double changed_horizon() const = 0;
};

class PathSkeleton;

/// View of one event, pointing into the skeleton's flat storage.
struct EventView {
  double time;
  EventKind kind;
  int coordinate;  // flipped coordinate for flip events, -1 otherwise
  Eigen::Map<const Vec> position_before;
  Eigen::Map<const Vec> velocity_before;
  Eigen::Map<const Vec> position_after;
  Eigen::Map<const Vec> velocity_after;
};

/// Ordered event records of a path plus the dynamics between them.
///
/// The first record is a start event at time 0; closing the path appends a
/// horizon record. Positions and velocities are stored contiguously.
class PathSkeleton {
 public:
  PathSkeleton() = default;
  PathSkeleton(std::size_t dim, Dynamics dynamics, double step = 0.0);

  std::size_t dim() const noexcept { return dim_; }
  Dynamics dynamics() const noexcept { return dynamics_; }
  /// Grid spacing for discretized paths, 0 otherwise.
  double step() const noexcept { return step_; }
  std::size_t size() const noexcept { return times_.size(); }
  bool empty() const noexcept { return times_.empty(); }
  double horizon() const noexcept { return horizon_; }
  bool closed() const noexcept { return closed_; }

  double time(std::size_t i) const { return times_[i]; }
  EventKind kind(std::size_t i) const { return kinds_[i]; }
  int coordinate(std::size_t i) const { return coords_[i]; }
  Eigen::Map<const Vec> position_before(std::size_t i) const;
  Eigen::Map<const Vec> velocity_before(std::size_t i) const;
  Eigen::Map<const Vec> position_after(std::size_t i) const;
  Eigen::Map<const Vec> velocity_after(std::size_t i) const;
  EventView event(std::size_t i) const;
  const std::vector<double>& times() const noexcept { return times_; }

  /// Number of events other than start and horizon records.
  std::size_t event_count() const;

  void reserve(std::size_t n);
  void start(const Vec& x, const Vec& v);
  void push(double t, EventKind kind, int coordinate, const Vec& x_before, const Vec& v_before,
            const Vec& x_after, const Vec& v_after);
  /// Replaces the post-event state of the last record (open paths only).
  void amend_last(const Vec& x_after, const Vec& v_after);
  /// Appends the horizon record (state advanced to t) and freezes the path.
  void close(double t, const Vec& x, const Vec& v);

  /// Right-continuous state at time t in [0, horizon].
  State state_at(double t) const;
  Vec position_at(double t) const;
  /// Index of the last event with time <= t.
  std::size_t segment_index(double t) const;

  /// Attaches a time map, turning this into the X-path of a time change of
  /// `base`. Event times must already be the mapped times.
  void attach_warp(std::shared_ptr<const PathSkeleton> base, std::shared_ptr<const TimeMap> map);
  const std::shared_ptr<const PathSkeleton>& base() const noexcept { return base_; }
  const std::shared_ptr<const TimeMap>& time_map() const noexcept { return map_; }

  /// Checks the structural invariants; throws InvalidArgument on failure.
  void validate(double tol = 1e-10) const;

 private:
  std::size_t dim_ = 0;
  Dynamics dynamics_ = Dynamics::constant_velocity;
  double step_ = 0.0;
  double horizon_ = 0.0;
  bool closed_ = false;
  std::vector<double> times_;
  std::vector<EventKind> kinds_;
  std::vector<int> coords_;
  std::vector<double> xb_, vb_, xa_, va_;
  std::shared_ptr<const PathSkeleton> base_;
  std::shared_ptr<const TimeMap> map_;
};

/// Sequential reader for monotone queries; O(1) amortised per call.
class SkeletonCursor {
 public:
  explicit SkeletonCursor(const PathSkeleton& path) : path_(&path) {}
  State state_at(double t);
  Vec position_at(double t);

 private:
  const PathSkeleton* path_;
  std::size_t index_ = 0;
};

}  // namespace tcs
