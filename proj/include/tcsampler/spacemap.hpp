#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "tcsampler/rng.hpp"
#include "tcsampler/skeleton.hpp"
#include "tcsampler/target.hpp"

namespace tcs {

/// Diffeomorphism H from the open unit ball onto R^d.
struct Diffeomorphism {
  std::size_t dim = 0;
  std::function<Vec(const Vec&)> forward;   // H, throws OutOfRange for |y| >= 1
  std::function<Vec(const Vec&)> inverse;   // H^{-1}
  std::function<double(const Vec&)> jacobian_det_forward;
  /// s(x) = |det J_H(H^{-1}(x))|.
  std::function<double(const Vec&)> induced_speed;
};

/// H(y) = y / sqrt(1 - |y|^2), H^{-1}(x) = x / sqrt(1 + |x|^2),
/// jacobian_det_forward(y) = (1 - |y|^2)^{-(d+1)/2}, induced_speed(x) = (1 + |x|^2)^{(d+1)/2}.
/// Both closed forms are kept as documented here. The true determinant of this H
/// carries exponent (d+2)/2, see ball_map_exact_jacobian_det.
Diffeomorphism ball_map(std::size_t d);

/// det J_H(y) = (1 - |y|^2)^{-(d+2)/2} for the H of ball_map.
double ball_map_exact_jacobian_det(const Vec& y);

/// The induced speed of ball_map as a SpeedFunction.
SpeedFunction ball_jacobian_speed(std::size_t d);

/// s(x) = (1 + |x|^2)^d.
SpeedFunction stereographic_speed(std::size_t d);

struct TransformedPath {
  PathSkeleton path;           // discretized
  std::vector<double> speed;   // |Delta X| / Delta t per grid step (first entry 0)
};

/// Images of the path sampled on a uniform grid of the given step.
TransformedPath transform_skeleton(const PathSkeleton& path, const std::function<Vec(const Vec&)>& map,
                                   double step);
/// Forward ball map applied to a path on the ball.
TransformedPath transform_skeleton(const PathSkeleton& path_on_ball, const Diffeomorphism& h,
                                   double step);

/// Exact draws on the ball from mu~(y) proportional to mu(H(y)) |det J_H(y)|
/// for standard normal mu, by rejection from the uniform law on the ball.
/// Uses the exact determinant, so H maps the draws to N(0, I_d).
std::vector<Vec> ball_rejection_samples(std::size_t d, std::size_t n, RngStream& rng);

/// Numerical Jacobian determinant of a map by central differences.
double numerical_jacobian_det(const std::function<Vec(const Vec&)>& map, const Vec& y,
                              double h = 1e-6);

}  // namespace tcs
