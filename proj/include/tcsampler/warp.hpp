#pragma once

#include <memory>
#include <vector>

#include "tcsampler/pdmp.hpp"
#include "tcsampler/skeleton.hpp"
#include "tcsampler/target.hpp"

namespace tcs {

/// Piecewise table of the clock between a base path Y (time u) and the
/// time-changed path X (time t): t = r^{-1}(u) = int_0^u 1/s(Y).
class WarpTable final : public TimeMap {
 public:
  WarpTable(std::shared_ptr<const PathSkeleton> base, SpeedFunction speed, double tol);

  double base_time(double t) const override;     // r(t)
  double changed_time(double u) const override;  // r^{-1}(u)
  double base_horizon() const override { return base_breaks_.back(); }
  double changed_horizon() const override { return changed_breaks_.back(); }

  const std::vector<double>& base_breakpoints() const noexcept { return base_breaks_; }
  const std::vector<double>& changed_breakpoints() const noexcept { return changed_breaks_; }
  double tolerance() const noexcept { return tol_; }
  /// Deepest bisection level used while building the table.
  int max_depth() const noexcept { return max_depth_; }
  const PathSkeleton& base() const noexcept { return *base_; }
  const SpeedFunction& speed() const noexcept { return speed_; }

  /// int_{u_k}^{u} 1/s(Y) within segment k (u_k <= u <= u_{k+1}).
  double partial_inverse_clock(std::size_t k, double u) const;

 private:
  std::shared_ptr<const PathSkeleton> base_;
  SpeedFunction speed_;
  double tol_;
  int max_depth_ = 0;
  bool moving_ = false;
  std::vector<double> base_breaks_;
  std::vector<double> changed_breaks_;
  std::vector<double> segment_speed_;  // s(state) for piecewise-constant segments
};

/// Builds r and r^{-1} for the base path; throws QuadratureFailure past the depth cap.
std::shared_ptr<const WarpTable> build_warp(std::shared_ptr<const PathSkeleton> skeleton_y,
                                            const SpeedFunction& speed, double tol = 1e-10);

/// Path of X_t = Y_{r(t)}: the same event states with timestamps r^{-1}(u_k).
PathSkeleton warp_path(std::shared_ptr<const PathSkeleton> skeleton_y,
                       std::shared_ptr<const WarpTable> warp);

/// Base path, clock and time-changed path of one run.
struct TimeChangedPath {
  std::shared_ptr<const PathSkeleton> base;
  std::shared_ptr<const WarpTable> warp;
  PathSkeleton path;
  ThinningStats stats;
  bool stopped_early = false;
};

/// Warps a finished base run into its time-changed path.
TimeChangedPath time_change_run(PdmpRun base, const SpeedFunction& speed, double tol = 1e-10);

/// Stop rule ending a base simulation once int 1/s(Y) reaches `horizon`,
/// i.e. once the time-changed path has run for `horizon` units.
SegmentStopRule changed_time_horizon_rule(const SpeedFunction& speed, double horizon, bool moving,
                                          double tol = 1e-10);

/// Earliest of two stop rules; either may be empty.
SegmentStopRule earliest_stop(SegmentStopRule a, SegmentStopRule b);

}  // namespace tcs
