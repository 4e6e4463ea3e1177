#pragma once

#include <array>
#include <functional>

namespace tcs {

struct GaussLegendreRule {
  const double* nodes;    // on [-1, 1]
  const double* weights;
  int order;
};

/// Gauss-Legendre rule of order 8 or 16.
GaussLegendreRule gauss_legendre(int order);

/// Fixed-order Gauss-Legendre integral of f over [a, b].
double gauss_legendre_integral(const std::function<double(double)>& f, double a, double b,
                               int order);

struct AdaptiveResult {
  double value = 0.0;
  int max_depth = 0;
  int evaluations = 0;
};

/// Order-16 Gauss-Legendre with recursive bisection until the whole-interval
/// value and the sum of the two halves differ by less than tol (relaxed to
/// round-off for large values). Throws QuadratureFailure past max_depth.
AdaptiveResult adaptive_gauss_legendre(const std::function<double(double)>& f, double a, double b,
                                       double tol, int max_depth = 40);

/// Same bisection with a fixed-order rule, but at max_depth the current
/// refinement is returned instead of failing. Smooth integrands converge to
/// tol; a jump discontinuity costs at most its size times (b - a) / 2^max_depth.
double capped_gauss_legendre(const std::function<double(double)>& f, double a, double b, int order,
                             double tol, int max_depth);

}  // namespace tcs
