#include "tcsampler/target.hpp"

#include <cmath>
#include <numbers>
#include <utility>

#include "tcsampler/errors.hpp"

namespace tcs {

Vec SpeedFunction::grad_log(const Vec& x) const {
  if (log_gradient) {
    return log_gradient(x);
  }
  return gradient(x) / value(x);
}

TiltedPotential::TiltedPotential(TargetDensity base, SpeedFunction speed)
    : base_(std::move(base)), speed_(std::move(speed)) {
  if (speed_.dim != 0 && speed_.dim != base_.dim) {
    throw DimensionMismatch("tilted potential: speed dimension " + std::to_string(speed_.dim) +
                            " differs from target dimension " + std::to_string(base_.dim));
  }
  affine_ = base_.affine_gradient_along_lines && speed_.form != SpeedForm::general;
}

double TiltedPotential::potential(const Vec& y) const {
  switch (speed_.form) {
    case SpeedForm::constant:
      return base_.potential(y) - std::log(speed_.parameter);
    case SpeedForm::exp_potential:
      return (1.0 - speed_.parameter) * base_.potential(y);
    case SpeedForm::general:
      break;
  }
  return base_.potential(y) - speed_.log_value(y);
}

Vec TiltedPotential::gradient(const Vec& y) const {
  switch (speed_.form) {
    case SpeedForm::constant:
      return base_.gradient(y);
    case SpeedForm::exp_potential:
      return (1.0 - speed_.parameter) * base_.gradient(y);
    case SpeedForm::general:
      break;
  }
  return base_.gradient(y) - speed_.grad_log(y);
}

TiltedPotential make_tilted(const TargetDensity& target, const SpeedFunction& speed) {
  return TiltedPotential(target, speed);
}

// ---------------------------------------------------------------------------

TargetDensity gaussian(const Vec& mean, const Vec& variance) {
  if (mean.size() == 0 || mean.size() != variance.size()) {
    throw InvalidArgument("gaussian: mean and variance must be non-empty and of equal size");
  }
  for (Eigen::Index i = 0; i < variance.size(); ++i) {
    if (!(variance[i] > 0.0) || !std::isfinite(variance[i])) {
      throw InvalidArgument("gaussian: variance must be positive");
    }
  }
  const Vec precision = variance.cwiseInverse();
  TargetDensity t;
  t.dim = static_cast<std::size_t>(mean.size());
  t.potential = [mean, precision](const Vec& x) {
    return 0.5 * (x - mean).cwiseAbs2().dot(precision);
  };
  t.gradient = [mean, precision](const Vec& x) -> Vec {
    return (x - mean).cwiseProduct(precision);
  };
  t.log_normalizer = 0.5 * (2.0 * std::numbers::pi * variance.array()).log().sum();
  t.affine_gradient_along_lines = true;
  t.potential_infimum = 0.0;
  t.label = "gaussian";
  return t;
}

TargetDensity gaussian_mixture(const std::vector<Vec>& means) {
  if (means.empty()) {
    throw InvalidArgument("gaussian_mixture: need at least one mean");
  }
  const auto d = means.front().size();
  if (d == 0) {
    throw InvalidArgument("gaussian_mixture: zero-dimensional mean");
  }
  for (const auto& m : means) {
    if (m.size() != d) {
      throw InvalidArgument("gaussian_mixture: means of differing dimension");
    }
  }
  const double log_k = std::log(static_cast<double>(means.size()));
  TargetDensity t;
  t.dim = static_cast<std::size_t>(d);
  t.potential = [means, log_k](const Vec& x) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& m : means) {
      best = std::min(best, 0.5 * (x - m).squaredNorm());
    }
    double acc = 0.0;
    for (const auto& m : means) {
      acc += std::exp(best - 0.5 * (x - m).squaredNorm());
    }
    return best - std::log(acc) + log_k;
  };
  t.gradient = [means](const Vec& x) -> Vec {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& m : means) {
      best = std::min(best, 0.5 * (x - m).squaredNorm());
    }
    Vec num = Vec::Zero(x.size());
    double den = 0.0;
    for (const auto& m : means) {
      const double w = std::exp(best - 0.5 * (x - m).squaredNorm());
      num += w * (x - m);
      den += w;
    }
    return num / den;
  };
  t.log_normalizer = 0.5 * static_cast<double>(d) * std::log(2.0 * std::numbers::pi);
  t.affine_gradient_along_lines = means.size() == 1;
  t.potential_infimum = 0.0;
  t.label = "gaussian_mixture";
  return t;
}

TargetDensity student_t_2d_1dof() {
  TargetDensity t;
  t.dim = 2;
  t.potential = [](const Vec& x) { return 1.5 * std::log1p(x.squaredNorm()); };
  t.gradient = [](const Vec& x) -> Vec { return (3.0 / (1.0 + x.squaredNorm())) * x; };
  t.log_normalizer = std::log(2.0 * std::numbers::pi);
  t.potential_infimum = 0.0;
  t.label = "student_t_2d_1dof";
  return t;
}

TargetDensity double_well_1d() {
  TargetDensity t;
  t.dim = 1;
  t.potential = [](const Vec& x) {
    const double q = x[0] * x[0] - 1.0;
    return q * q;
  };
  t.gradient = [](const Vec& x) -> Vec {
    Vec g(1);
    g[0] = 4.0 * x[0] * (x[0] * x[0] - 1.0);
    return g;
  };
  t.potential_infimum = 0.0;
  t.label = "double_well_1d";
  return t;
}

TargetDensity scale_potential(const TargetDensity& target, double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw InvalidArgument("scale_potential: factor must be positive and finite");
  }
  TargetDensity t = target;
  t.potential = [u = target.potential, beta](const Vec& x) { return beta * u(x); };
  t.gradient = [g = target.gradient, beta](const Vec& x) -> Vec { return beta * g(x); };
  t.log_normalizer.reset();
  t.potential_infimum = beta * target.potential_infimum;
  return t;
}

std::vector<Vec> mixture13_means() {
  std::vector<Vec> means;
  means.emplace_back(Vec::Zero(2));
  for (int k = 0; k < 12; ++k) {
    const double angle = 2.0 * std::numbers::pi * k / 12.0;
    Vec m(2);
    m << 10.0 * std::cos(angle), 10.0 * std::sin(angle);
    means.push_back(m);
  }
  return means;
}

namespace {

Vec to_vec(const std::vector<double>& v) {
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

TargetDensity builtin_target(const TargetSpec& spec) {
  if (spec.name == "gaussian") {
    const auto d = spec.dim;
    if (d == 0) {
      throw InvalidArgument("gaussian: dimension must be positive");
    }
    Vec mean = spec.mean.empty() ? Vec::Zero(static_cast<Eigen::Index>(d)) : to_vec(spec.mean);
    Vec var = spec.variance.empty() ? Vec::Ones(static_cast<Eigen::Index>(d)) : to_vec(spec.variance);
    if (static_cast<std::size_t>(mean.size()) != d || static_cast<std::size_t>(var.size()) != d) {
      throw InvalidArgument("gaussian: mean/variance length must equal dim");
    }
    return gaussian(mean, var);
  }
  if (spec.name == "gaussian_mixture") {
    std::vector<Vec> means;
    for (const auto& m : spec.means) {
      means.push_back(to_vec(m));
    }
    return gaussian_mixture(means);
  }
  if (spec.name == "mixture13") {
    auto t = gaussian_mixture(mixture13_means());
    t.label = "mixture13";
    return t;
  }
  if (spec.name == "bimodal1d") {
    Vec a(1);
    Vec b(1);
    a << -10.0;
    b << 10.0;
    auto t = gaussian_mixture({a, b});
    t.label = "bimodal1d";
    return t;
  }
  if (spec.name == "student_t_2d_1dof") {
    return student_t_2d_1dof();
  }
  if (spec.name == "double_well_1d") {
    return double_well_1d();
  }
  throw InvalidArgument("unknown target '" + spec.name + "'");
}

// ---------------------------------------------------------------------------

SpeedFunction constant_speed(double c) {
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw InvalidArgument("constant_speed: value must be positive and finite");
  }
  SpeedFunction s;
  s.value = [c](const Vec&) { return c; };
  s.gradient = [](const Vec& x) -> Vec { return Vec::Zero(x.size()); };
  s.log_value = [lc = std::log(c)](const Vec&) { return lc; };
  s.log_gradient = [](const Vec& x) -> Vec { return Vec::Zero(x.size()); };
  s.lower_bound = c;
  s.form = SpeedForm::constant;
  s.parameter = c;
  s.label = "constant";
  return s;
}

SpeedFunction exp_alpha_potential(const TargetDensity& target, double alpha) {
  if (!(alpha >= 0.0) || !(alpha < 1.0)) {
    throw InvalidArgument("exp_alpha_potential: alpha must lie in [0, 1)");
  }
  if (!std::isfinite(target.potential_infimum)) {
    throw InvalidArgument("exp_alpha_potential: target has no certified potential lower bound");
  }
  SpeedFunction s;
  s.dim = target.dim;
  auto u = target.potential;
  auto du = target.gradient;
  s.value = [u, alpha](const Vec& x) { return std::exp(alpha * u(x)); };
  s.gradient = [u, du, alpha](const Vec& x) -> Vec {
    return (alpha * std::exp(alpha * u(x))) * du(x);
  };
  s.log_value = [u, alpha](const Vec& x) { return alpha * u(x); };
  s.log_gradient = [du, alpha](const Vec& x) -> Vec { return alpha * du(x); };
  s.lower_bound = std::exp(alpha * target.potential_infimum);
  s.form = SpeedForm::exp_potential;
  s.parameter = alpha;
  s.label = "exp_alpha_U";
  return s;
}

SpeedFunction one_plus_norm_sq_pow(double p) {
  if (!(p >= 0.0) || !std::isfinite(p)) {
    throw InvalidArgument("one_plus_norm_sq_pow: exponent must be non-negative");
  }
  SpeedFunction s;
  s.value = [p](const Vec& x) { return std::pow(1.0 + x.squaredNorm(), p); };
  s.gradient = [p](const Vec& x) -> Vec {
    return (2.0 * p * std::pow(1.0 + x.squaredNorm(), p - 1.0)) * x;
  };
  s.log_value = [p](const Vec& x) { return p * std::log1p(x.squaredNorm()); };
  s.log_gradient = [p](const Vec& x) -> Vec { return (2.0 * p / (1.0 + x.squaredNorm())) * x; };
  s.lower_bound = 1.0;
  s.form = p == 0.0 ? SpeedForm::constant : SpeedForm::general;
  s.parameter = p == 0.0 ? 1.0 : p;
  s.label = "one_plus_norm_sq_pow";
  return s;
}

}  // namespace tcs
