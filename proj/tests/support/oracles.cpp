#include "oracles.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace tcs::testing {

DiscreteChainSpec random_discrete_spec(RngStream& rng, std::size_t n, BalanceFunction g) {
  if (n < 3) {
    throw std::invalid_argument("random_discrete_spec: need at least 3 states");
  }
  DiscreteChainSpec spec;
  spec.g = g;
  spec.weights.resize(n);
  spec.speed.resize(n);
  spec.neighbors.assign(n, {});
  auto link = [&](std::size_t a, std::size_t b) {
    if (a == b) {
      return;
    }
    auto& na = spec.neighbors[a];
    if (std::find(na.begin(), na.end(), b) != na.end()) {
      return;
    }
    na.push_back(b);
    spec.neighbors[b].push_back(a);
  };
  for (std::size_t x = 0; x < n; ++x) {
    spec.weights[x] = 0.1 + 9.9 * rng.uniform();
    spec.speed[x] = 1.0 + 9.0 * rng.uniform();
    link(x, (x + 1) % n);
  }
  const std::size_t chords = n / 2;
  for (std::size_t k = 0; k < chords; ++k) {
    link(rng.index(n), rng.index(n));
  }
  return spec;
}

std::vector<double> power_iteration_stationary(const DiscreteChainSpec& spec, double tol,
                                               std::size_t max_iter) {
  const std::size_t n = spec.size();
  std::vector<std::vector<double>> rates(n);
  double q = 0.0;
  for (std::size_t x = 0; x < n; ++x) {
    double total = 0.0;
    for (std::size_t z : spec.neighbors[x]) {
      rates[x].push_back(spec.rate(x, z));
      total += rates[x].back();
    }
    q = std::max(q, total);
  }
  q *= 1.05;
  std::vector<double> pi(n, 1.0 / static_cast<double>(n));
  std::vector<double> next(n);
  for (std::size_t it = 0; it < max_iter; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t x = 0; x < n; ++x) {
      double out = 0.0;
      for (std::size_t j = 0; j < rates[x].size(); ++j) {
        const double p = rates[x][j] / q;
        next[spec.neighbors[x][j]] += pi[x] * p;
        out += p;
      }
      next[x] += pi[x] * (1.0 - out);
    }
    double diff = 0.0;
    for (std::size_t x = 0; x < n; ++x) {
      diff = std::max(diff, std::abs(next[x] - pi[x]));
    }
    pi.swap(next);
    if (diff < tol) {
      break;
    }
  }
  const double sum = std::accumulate(pi.begin(), pi.end(), 0.0);
  for (auto& p : pi) {
    p /= sum;
  }
  return pi;
}

double eyring_mean_hitting_time(double eps, double a) {
  using boost::math::quadrature::gauss_kronrod;
  auto u = [](double x) { return (x * x - 1.0) * (x * x - 1.0); };
  auto du = [](double x) { return 4.0 * x * (x * x - 1.0); };
  // Base process targets exp(-Ut) with Ut = (1 - a) U / eps; X-time per unit
  // of base time is 1/s = exp(-a U / eps).
  auto ut = [&](double x) { return (1.0 - a) * u(x) / eps; };
  auto rate = [&](double x) { return std::max(0.0, (1.0 - a) * du(x) / eps); };
  auto inv_s = [&](double x) { return std::exp(-a * u(x) / eps); };
  const double lo = -4.0;
  // m(y) = int_{-inf}^{y} (1/s) exp(-Ut): expected X-time of a leftward
  // excursion from y, times exp(-Ut(y)).
  auto m = [&](double y) {
    return gauss_kronrod<double, 31>::integrate(
        [&](double z) { return inv_s(z) * std::exp(-ut(z)); }, lo, y, 15, 1e-13);
  };
  const double x0 = -1.0;
  const double x1 = 0.0;
  const double climb = gauss_kronrod<double, 31>::integrate(
      [&](double y) { return inv_s(y) + 2.0 * rate(y) * std::exp(ut(y)) * m(y); }, x0, x1, 15,
      1e-12);
  return climb + 2.0 * std::exp(ut(x0)) * m(x0);
}

}  // namespace tcs::testing
