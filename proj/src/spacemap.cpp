#include "tcsampler/spacemap.hpp"

#include <Eigen/LU>

#include <cmath>

#include "tcsampler/errors.hpp"

namespace tcs {

namespace {

void check_dim(std::size_t d) {
  if (d == 0) {
    throw InvalidArgument("ball map: dimension must be at least 1");
  }
}

}  // namespace

Diffeomorphism ball_map(std::size_t d) {
  check_dim(d);
  const double p = 0.5 * static_cast<double>(d + 1);
  Diffeomorphism h;
  h.dim = d;
  h.forward = [](const Vec& y) -> Vec {
    const double q = 1.0 - y.squaredNorm();
    if (!(q > 0.0)) {
      throw OutOfRange("ball map: point on or outside the unit sphere");
    }
    return y / std::sqrt(q);
  };
  h.inverse = [](const Vec& x) -> Vec { return x / std::sqrt(1.0 + x.squaredNorm()); };
  h.jacobian_det_forward = [p](const Vec& y) {
    const double q = 1.0 - y.squaredNorm();
    if (!(q > 0.0)) {
      throw OutOfRange("ball map: point on or outside the unit sphere");
    }
    return std::pow(q, -p);
  };
  h.induced_speed = [p](const Vec& x) { return std::pow(1.0 + x.squaredNorm(), p); };
  return h;
}

double ball_map_exact_jacobian_det(const Vec& y) {
  const double q = 1.0 - y.squaredNorm();
  if (!(q > 0.0)) {
    throw OutOfRange("ball map: point on or outside the unit sphere");
  }
  // J = q^{-1/2} I + q^{-3/2} y y^T, so det J = q^{-d/2} (1 + |y|^2 / q).
  return std::pow(q, -0.5 * (static_cast<double>(y.size()) + 2.0));
}

SpeedFunction ball_jacobian_speed(std::size_t d) {
  check_dim(d);
  auto s = one_plus_norm_sq_pow(0.5 * static_cast<double>(d + 1));
  s.dim = d;
  s.label = "jacobian_ball";
  return s;
}

SpeedFunction stereographic_speed(std::size_t d) {
  check_dim(d);
  auto s = one_plus_norm_sq_pow(static_cast<double>(d));
  s.dim = d;
  s.label = "stereographic";
  return s;
}

TransformedPath transform_skeleton(const PathSkeleton& path,
                                   const std::function<Vec(const Vec&)>& map, double step) {
  if (!(step > 0.0)) {
    throw InvalidArgument("transform_skeleton: step must be positive");
  }
  const double horizon = path.horizon();
  const auto n = static_cast<std::size_t>(std::floor(horizon / step));
  SkeletonCursor cursor(path);
  Vec x = map(cursor.position_at(0.0));
  TransformedPath out{PathSkeleton(static_cast<std::size_t>(x.size()), Dynamics::discretized, step),
                      {}};
  const Vec zero = Vec::Zero(x.size());
  out.path.reserve(n + 2);
  out.path.start(x, zero);
  out.speed.reserve(n + 1);
  out.speed.push_back(0.0);
  for (std::size_t k = 1; k <= n; ++k) {
    const double t = static_cast<double>(k) * step;
    if (t <= out.path.time(out.path.size() - 1)) {
      continue;
    }
    Vec next = map(cursor.position_at(std::min(t, horizon)));
    out.speed.push_back((next - x).norm() / step);
    out.path.push(t, EventKind::jump, -1, x, zero, next, zero);
    x = std::move(next);
  }
  out.path.close(std::max(horizon, out.path.time(out.path.size() - 1)), x, zero);
  return out;
}

TransformedPath transform_skeleton(const PathSkeleton& path_on_ball, const Diffeomorphism& h,
                                   double step) {
  return transform_skeleton(path_on_ball, h.forward, step);
}

std::vector<Vec> ball_rejection_samples(std::size_t d, std::size_t n, RngStream& rng) {
  check_dim(d);
  const double dd = static_cast<double>(d);
  const double p = 0.5 * (dd + 2.0);
  // sup over q in (0, 1] of exp(-(1-q)/(2q)) q^{-p}, attained at q = 1/(2p) = 1/(d+2).
  const double log_bound = 0.5 - p + p * std::log(2.0 * p);
  std::vector<Vec> out;
  out.reserve(n);
  Vec y(static_cast<Eigen::Index>(d));
  while (out.size() < n) {
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      y[i] = rng.normal();
    }
    y *= std::pow(rng.uniform(), 1.0 / dd) / y.norm();
    const double q = 1.0 - y.squaredNorm();
    if (!(q > 0.0)) {
      continue;
    }
    const double log_density = -(1.0 - q) / (2.0 * q) - p * std::log(q);
    if (std::log(rng.uniform_open()) < log_density - log_bound) {
      out.push_back(y);
    }
  }
  return out;
}

double numerical_jacobian_det(const std::function<Vec(const Vec&)>& map, const Vec& y, double h) {
  const Eigen::Index d = y.size();
  Eigen::MatrixXd jac(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    Vec yp = y;
    Vec ym = y;
    yp[j] += h;
    ym[j] -= h;
    jac.col(j) = (map(yp) - map(ym)) / (2.0 * h);
  }
  return jac.determinant();
}

}  // namespace tcs
