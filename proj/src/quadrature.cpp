#include "tcsampler/quadrature.hpp"

#include <cmath>
#include <limits>

#include "tcsampler/errors.hpp"

namespace tcs {

namespace {

constexpr std::array<double, 8> kNodes8 = {
    -0.96028985649753618, -0.79666647741362673, -0.52553240991632899, -0.18343464249564978,
    0.18343464249564978,  0.52553240991632899,  0.79666647741362673,  0.96028985649753618};
constexpr std::array<double, 8> kWeights8 = {
    0.10122853629037669, 0.22238103445337434, 0.31370664587788705, 0.36268378337836177,
    0.36268378337836177, 0.31370664587788705, 0.22238103445337434, 0.10122853629037669};

constexpr std::array<double, 16> kNodes16 = {
    -0.98940093499164994, -0.9445750230732326,   -0.86563120238783176, -0.755404408355003,
    -0.61787624440264377, -0.45801677765722737,  -0.28160355077925892, -0.095012509837637454,
    0.095012509837637454, 0.28160355077925892,   0.45801677765722737,  0.61787624440264377,
    0.755404408355003,    0.86563120238783176,   0.9445750230732326,   0.98940093499164994};
constexpr std::array<double, 16> kWeights16 = {
    0.027152459411754037, 0.062253523938647706, 0.095158511682492591, 0.12462897125553403,
    0.14959598881657676,  0.16915651939500262,  0.18260341504492361,  0.18945061045506859,
    0.18945061045506859,  0.18260341504492361,  0.16915651939500262,  0.14959598881657676,
    0.12462897125553403,  0.095158511682492591, 0.062253523938647706, 0.027152459411754037};

double apply_rule(const std::function<double(double)>& f, double a, double b,
                  const GaussLegendreRule& rule, int& evaluations) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double acc = 0.0;
  for (int k = 0; k < rule.order; ++k) {
    acc += rule.weights[k] * f(mid + half * rule.nodes[k]);
  }
  evaluations += rule.order;
  return half * acc;
}

struct Adaptive {
  const std::function<double(double)>& f;
  GaussLegendreRule rule;
  int max_depth;
  AdaptiveResult result;
  bool fail_at_cap = true;

  double refine(double a, double b, double whole, double tol, int depth) {
    const double mid = 0.5 * (a + b);
    const double left = apply_rule(f, a, mid, rule, result.evaluations);
    const double right = apply_rule(f, mid, b, rule, result.evaluations);
    const double sum = left + right;
    if (!std::isfinite(sum)) {
      throw QuadratureFailure("adaptive quadrature: non-finite integrand");
    }
    result.max_depth = std::max(result.max_depth, depth);
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() *
                         (std::abs(left) + std::abs(right));
    if (std::abs(sum - whole) < std::max(tol, floor)) {
      return sum;
    }
    if (depth >= max_depth) {
      if (!fail_at_cap) {
        return sum;
      }
      throw QuadratureFailure("adaptive quadrature: tolerance not reached at depth " +
                              std::to_string(max_depth));
    }
    return refine(a, mid, left, 0.5 * tol, depth + 1) +
           refine(mid, b, right, 0.5 * tol, depth + 1);
  }
};

}  // namespace

GaussLegendreRule gauss_legendre(int order) {
  if (order == 8) {
    return {kNodes8.data(), kWeights8.data(), 8};
  }
  if (order == 16) {
    return {kNodes16.data(), kWeights16.data(), 16};
  }
  throw InvalidArgument("gauss_legendre: supported orders are 8 and 16");
}

double gauss_legendre_integral(const std::function<double(double)>& f, double a, double b,
                               int order) {
  int evals = 0;
  return apply_rule(f, a, b, gauss_legendre(order), evals);
}

AdaptiveResult adaptive_gauss_legendre(const std::function<double(double)>& f, double a, double b,
                                       double tol, int max_depth) {
  if (!(tol > 0.0)) {
    throw InvalidArgument("adaptive quadrature: tolerance must be positive");
  }
  Adaptive q{f, gauss_legendre(16), max_depth, {}};
  if (a == b) {
    return q.result;
  }
  const double whole = apply_rule(f, a, b, q.rule, q.result.evaluations);
  if (!std::isfinite(whole)) {
    throw QuadratureFailure("adaptive quadrature: non-finite integrand");
  }
  q.result.value = q.refine(a, b, whole, tol, 1);
  return q.result;
}

}  // namespace tcs

namespace tcs {

double capped_gauss_legendre(const std::function<double(double)>& f, double a, double b, int order,
                             double tol, int max_depth) {
  if (!(tol > 0.0)) {
    throw InvalidArgument("capped quadrature: tolerance must be positive");
  }
  Adaptive q{f, gauss_legendre(order), max_depth, {}};
  q.fail_at_cap = false;
  if (a == b) {
    return 0.0;
  }
  const double whole = apply_rule(f, a, b, q.rule, q.result.evaluations);
  if (!std::isfinite(whole)) {
    throw QuadratureFailure("capped quadrature: non-finite integrand");
  }
  return q.refine(a, b, whole, tol, 1);
}

}  // namespace tcs
