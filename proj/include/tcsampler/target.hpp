#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace tcs {

using Vec = Eigen::VectorXd;

/// Un-normalised target density mu(x) proportional to exp(-U(x)).
struct TargetDensity {
  std::size_t dim = 0;
  std::function<double(const Vec&)> potential;
  std::function<Vec(const Vec&)> gradient;
  /// ln Z when known; only oracles read it.
  std::optional<double> log_normalizer;
  /// True iff t -> grad U(x + t v) is affine for every x, v (Gaussians).
  bool affine_gradient_along_lines = false;
  /// Certified lower bound of U, used to certify speed lower bounds.
  double potential_infimum = -std::numeric_limits<double>::infinity();
  std::string label;
};

enum class SpeedForm {
  constant,       // s(x) = c
  exp_potential,  // s(x) = exp(alpha * U(x)) for the target it was built from
  general,
};

/// Speed function s driving the time change, with certified lower bound.
struct SpeedFunction {
  /// 0 means the function accepts any dimension.
  std::size_t dim = 0;
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
  std::function<double(const Vec&)> log_value;
  /// grad ln s; optional, falls back to gradient / value.
  std::function<Vec(const Vec&)> log_gradient;
  double lower_bound = 0.0;
  SpeedForm form = SpeedForm::general;
  /// Constant value for SpeedForm::constant, alpha for SpeedForm::exp_potential.
  double parameter = 0.0;
  std::string label;

  Vec grad_log(const Vec& x) const;
};

/// Potential of the base process target mu~ proportional to s * mu:
/// U~ = U - ln s, grad U~ = grad U - grad s / s.
class TiltedPotential {
 public:
  TiltedPotential(TargetDensity base, SpeedFunction speed);

  std::size_t dim() const noexcept { return base_.dim; }
  const TargetDensity& base() const noexcept { return base_; }
  const SpeedFunction& speed() const noexcept { return speed_; }
  bool affine_gradient_along_lines() const noexcept { return affine_; }

  double potential(const Vec& y) const;
  Vec gradient(const Vec& y) const;

 private:
  TargetDensity base_;
  SpeedFunction speed_;
  bool affine_ = false;
};

/// Builds the tilted potential; throws DimensionMismatch if dimensions disagree.
TiltedPotential make_tilted(const TargetDensity& target, const SpeedFunction& speed);

// ---------------------------------------------------------------------------
// Built-in targets.

TargetDensity gaussian(const Vec& mean, const Vec& variance);
/// Equal-weight mixture of unit-covariance Gaussians, U = -ln mean_k exp(-|x-m_k|^2/2).
TargetDensity gaussian_mixture(const std::vector<Vec>& means);
/// Density proportional to (1 + |x|^2)^{-3/2} on R^2.
TargetDensity student_t_2d_1dof();
/// U(x) = (x^2 - 1)^2 on R.
TargetDensity double_well_1d();

/// Potential beta * U (density mu^beta); used for temperature scans.
TargetDensity scale_potential(const TargetDensity& target, double beta);

/// Thirteen-mode layout: the origin plus twelve modes on a circle of radius 10.
std::vector<Vec> mixture13_means();

/// Description of a built-in target, as used by configuration files.
struct TargetSpec {
  std::string name;  // gaussian | gaussian_mixture | mixture13 | bimodal1d | student_t_2d_1dof | double_well_1d
  std::size_t dim = 1;
  std::vector<double> mean;
  std::vector<double> variance;
  std::vector<std::vector<double>> means;
};

TargetDensity builtin_target(const TargetSpec& spec);

// ---------------------------------------------------------------------------
// Built-in speed functions.

SpeedFunction constant_speed(double c);
/// s(x) = exp(alpha * U(x)), i.e. mu^{-alpha} up to a constant.
SpeedFunction exp_alpha_potential(const TargetDensity& target, double alpha);
/// s(x) = (1 + |x|^2)^p.
SpeedFunction one_plus_norm_sq_pow(double p);

}  // namespace tcs
