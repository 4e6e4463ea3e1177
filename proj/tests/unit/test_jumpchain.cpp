#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "stats.hpp"
#include "tcsampler/errors.hpp"
#include "tcsampler/estimators.hpp"
#include "tcsampler/jumpchain.hpp"

using namespace tcs;
namespace ts = tcs::testing;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }

std::vector<double> normalized(std::vector<double> w) {
  const double s = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& x : w) {
    x /= s;
  }
  return w;
}

DiscreteChainSpec three_state() {
  DiscreteChainSpec spec;
  spec.weights = {0.5, 0.3, 0.2};
  spec.speed = {1.0, 2.0, 4.0};
  spec.neighbors = {{1, 2}, {0, 2}, {0, 1}};
  spec.g = BalanceFunction::barker;
  return spec;
}

}  // namespace

TEST_CASE("rwm kernel") {
  const auto g = make_tilted(gaussian(v1(0.0), v1(1.0)), constant_speed(1.0));
  SUBCASE("tiny steps are almost always accepted") {
    const auto k = rwm_kernel(g, 1e-6);
    RngStream rng(1, 0);
    int moved = 0;
    Vec x = v1(0.3);
    for (int i = 0; i < 10000; ++i) {
      const Vec y = k.sample(x, rng);
      moved += y[0] != x[0];
      x = y;
    }
    CHECK(moved > 9990);
  }
  SUBCASE("downhill proposals are always accepted") {
    const auto k = rwm_kernel(g, 0.5);
    // Replay the proposals from an identical stream: every proposal with
    // lower U~ than x = 8 must be returned.
    RngStream a(2, 1);
    RngStream b(2, 1);
    for (int i = 0; i < 1000; ++i) {
      const double prop = 8.0 + 0.5 * a.normal();
      (void)a.uniform_open();
      const Vec y = k.sample(v1(8.0), b);
      if (std::abs(prop) < 8.0) {
        CHECK(y[0] == prop);
      }
    }
  }
  SUBCASE("chain mean on N(0,1)") {
    const auto k = rwm_kernel(g, 2.4);
    RngStream rng(3, 0);
    Vec x = v1(0.0);
    std::vector<double> xs;
    for (int i = 0; i < 100000; ++i) {
      x = k.sample(x, rng);
      xs.push_back(x[0]);
    }
    // Batch means standard error.
    std::vector<double> batches;
    for (int b = 0; b < 100; ++b) {
      batches.push_back(std::accumulate(xs.begin() + b * 1000, xs.begin() + (b + 1) * 1000, 0.0) /
                        1000.0);
    }
    const double se = std::sqrt(ts::sample_variance(batches) / 100.0);
    CHECK(std::abs(ts::mean(xs)) < 3.0 * se);
  }
  CHECK_THROWS_AS(rwm_kernel(g, 0.0), InvalidArgument);
}

TEST_CASE("fixed-time zig-zag kernel") {
  const auto g = make_tilted(gaussian(v1(0.0), v1(1.0)), constant_speed(1.0));
  SUBCASE("short durations barely move") {
    const double delta = 1e-3;
    const auto k = zz_fixed_time_kernel(g, delta);
    RngStream rng(4, 0);
    double total = 0.0;
    for (int i = 0; i < 1000; ++i) {
      total += std::abs(k.sample(v1(0.5), rng)[0] - 0.5);
    }
    CHECK(total / 1000.0 < 5.0 * delta);
  }
  SUBCASE("preserves N(0,1)") {
    const auto k = zz_fixed_time_kernel(g, 0.5);
    RngStream in(5, 0);
    RngStream rng(5, 1);
    std::vector<double> out;
    for (int i = 0; i < 10000; ++i) {
      out.push_back(k.sample(v1(in.normal()), rng)[0]);
    }
    CHECK(ts::ks_test(out, ts::normal_cdf).p_value > 0.01);
  }
  SUBCASE("deterministic") {
    const auto k = zz_fixed_time_kernel(g, 0.1);
    RngStream a(6, 0);
    RngStream b(6, 0);
    for (int i = 0; i < 100; ++i) {
      CHECK(k.sample(v1(0.1 * i), a)[0] == k.sample(v1(0.1 * i), b)[0]);
    }
  }
}

TEST_CASE("kernel invariance on a 2-d tilted target") {
  // mu~ = N(0, I) itself via s = 1; inputs are exact draws, outputs are
  // checked on both coordinates and on the (1,1) projection.
  const auto g = make_tilted(gaussian(Vec::Zero(2), Vec::Ones(2)), constant_speed(1.0));
  for (const auto& k : {rwm_kernel(g, 1.0), zz_fixed_time_kernel(g, 0.3)}) {
    CAPTURE(k.label);
    RngStream in(7, 0);
    RngStream rng(7, 1);
    std::vector<double> p0;
    std::vector<double> p1;
    std::vector<double> p2;
    for (int i = 0; i < 10000; ++i) {
      Vec x(2);
      x << in.normal(), in.normal();
      const Vec y = k.sample(x, rng);
      p0.push_back(y[0]);
      p1.push_back(y[1]);
      p2.push_back((y[0] + y[1]) / std::sqrt(2.0));
    }
    CHECK(ts::ks_test(p0, ts::normal_cdf).p_value > 0.01);
    CHECK(ts::ks_test(p1, ts::normal_cdf).p_value > 0.01);
    CHECK(ts::ks_test(p2, ts::normal_cdf).p_value > 0.01);
  }
}

TEST_CASE("lifted zig-zag kernel") {
  const auto g = make_tilted(gaussian(Vec::Zero(2), Vec::Ones(2)), constant_speed(1.0));
  const auto k = zz_lifted_kernel(g, 0.3);
  REQUIRE(k.lifted_sample);
  SUBCASE("preserves N(0, I) x uniform velocity") {
    RngStream in(8, 0);
    RngStream rng(8, 1);
    std::vector<double> p0;
    std::vector<double> p2;
    int positive = 0;
    for (int i = 0; i < 10000; ++i) {
      Vec x(2);
      x << in.normal(), in.normal();
      Vec v(2);
      v << in.sign(), in.sign();
      const Vec y = k.lifted_sample(x, v, rng);
      p0.push_back(y[0]);
      p2.push_back((y[0] - y[1]) / std::sqrt(2.0));
      positive += v[0] > 0.0;
      CHECK(std::abs(v[0]) == 1.0);
    }
    CHECK(ts::ks_test(p0, ts::normal_cdf).p_value > 0.01);
    CHECK(ts::ks_test(p2, ts::normal_cdf).p_value > 0.01);
    CHECK(std::abs(positive - 5000) < 3.0 * 50.0);
  }
  SUBCASE("velocity persists between draws in flat regions") {
    const auto flat = make_tilted(gaussian(Vec::Zero(1), Vec::Constant(1, 1e6)), constant_speed(1.0));
    const auto kf = zz_lifted_kernel(flat, 0.1);
    RngStream rng(9, 0);
    Vec x = Vec::Zero(1);
    Vec v = Vec::Ones(1);
    for (int i = 0; i < 100; ++i) {
      x = kf.lifted_sample(x, v, rng);
    }
    // Ballistic motion: about 100 * 0.1 units, far beyond a refreshed walk.
    CHECK(x[0] > 5.0);
  }
  SUBCASE("jump process occupation under s = 1 + |x|^2") {
    const auto target = gaussian(Vec::Zero(2), Vec::Ones(2));
    SpeedFunction speed = one_plus_norm_sq_pow(1.0);
    const auto kt = zz_lifted_kernel(make_tilted(target, speed), 0.2);
    RngStream rng(10, 0);
    const auto path = algorithm1(speed, kt, Vec::Zero(2), 2000.0, rng);
    // E|x|^2 = 2 under N(0, I).
    const auto r = direct_average(path, [](const Vec& y) { return y.squaredNorm(); }, 2000.0);
    CHECK(r.estimate == doctest::Approx(2.0).epsilon(0.15));
  }
}

TEST_CASE("time-changed jump process") {
  const auto target = gaussian(v1(0.0), v1(1.0));
  SUBCASE("constant speed: holding times are Exp(c)") {
    const auto s = constant_speed(2.5);
    const auto k = rwm_kernel(make_tilted(target, s), 1.0);
    RngStream rng(8, 0);
    const auto path = algorithm1(s, k, v1(0.0), 5000.0, rng);
    path.validate();
    std::vector<double> gaps;
    for (std::size_t i = 1; i + 1 < path.size() && gaps.size() < 10000; ++i) {
      gaps.push_back(path.time(i) - path.time(i - 1));
    }
    REQUIRE(gaps.size() == 10000);
    CHECK(ts::ks_test(gaps, [](double x) { return ts::exponential_cdf(x, 2.5); }).p_value > 0.01);
  }
  SUBCASE("identity kernel stays put") {
    MarkovKernel id;
    id.sample = [](const Vec& x, RngStream&) { return x; };
    id.label = "identity";
    RngStream rng(9, 0);
    const auto path = algorithm1(constant_speed(1.0), id, v1(3.0), 100.0, rng);
    for (std::size_t i = 0; i < path.size(); ++i) {
      CHECK(path.position_after(i)[0] == 3.0);
    }
    CHECK(path.horizon() == 100.0);
  }
  SUBCASE("holding times given the state are Exp(s(x))") {
    const auto s = one_plus_norm_sq_pow(1.0);
    const auto k = rwm_kernel(make_tilted(target, s), 1.0);
    RngStream rng(10, 0);
    const auto path = algorithm1_jumps(s, k, v1(0.0), 20000, rng);
    CHECK(path.event_count() == 20000);
    // Scaled holding times s(x) * tau are Exp(1).
    std::vector<double> scaled;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
      scaled.push_back((path.time(i + 1) - path.time(i)) * s.value(Vec(path.position_after(i))));
    }
    CHECK(ts::ks_test(scaled, [](double x) { return ts::exponential_cdf(x, 1.0); }).p_value > 0.01);
  }
  SUBCASE("occupation-weighted mean with s = 1 + x^2") {
    const auto s = one_plus_norm_sq_pow(1.0);
    const auto k = rwm_kernel(make_tilted(target, s), 2.0);
    RngStream rng(11, 0);
    const auto path = algorithm1(s, k, v1(0.0), 2e4, rng);
    const auto rep = direct_average(path, [](const Vec& x) { return x[0]; }, path.horizon());
    CHECK(std::abs(rep.estimate) < 3.0 * rep.standard_error());
    const auto rep2 = direct_average(path, [](const Vec& x) { return x[0] * x[0]; }, path.horizon());
    CHECK(std::abs(rep2.estimate - 1.0) < 3.0 * rep2.standard_error());
  }
}

TEST_CASE("balance functions satisfy g(t) = t g(1/t)") {
  for (auto g : {BalanceFunction::metropolis, BalanceFunction::barker}) {
    for (double t = 1e-3; t < 1e3; t *= 1.37) {
      CHECK(balance(g, t) == doctest::Approx(t * balance(g, 1.0 / t)).epsilon(1e-12));
    }
  }
}

TEST_CASE("discrete spec validation") {
  auto spec = three_state();
  spec.validate();
  auto bad = spec;
  bad.neighbors[0] = {1};
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = spec;
  bad.neighbors = {{}, {2}, {1}};
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  RngStream rng(12, 0);
  CHECK_THROWS_AS(discrete_sampler(bad, 0, 1.0, rng), InvalidArgument);
  bad = spec;
  bad.speed[1] = 0.0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("exact stationary law") {
  const auto spec = three_state();
  const auto pi = exact_stationary(spec);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(std::abs(pi[i] - spec.weights[i]) < 1e-10);
  }
  const auto pw = ts::power_iteration_stationary(spec);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(std::abs(pw[i] - pi[i]) < 1e-10);
  }
  auto unit = spec;
  unit.speed = {1.0, 1.0, 1.0};
  const auto pu = exact_stationary(unit);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(std::abs(pu[i] - spec.weights[i]) < 1e-10);
  }
  auto scaled = spec;
  for (auto& w : scaled.weights) {
    w *= 37.0;
  }
  const auto ps = exact_stationary(scaled);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(std::abs(ps[i] - pi[i]) < 1e-12);
  }
}

TEST_CASE("exact stationary equals mu on random specs up to 100 states") {
  RngStream rng(13, 0);
  for (int k = 0; k < 30; ++k) {
    const std::size_t n = 3 + rng.index(98);
    const auto g = k % 2 == 0 ? BalanceFunction::metropolis : BalanceFunction::barker;
    const auto spec = ts::random_discrete_spec(rng, n, g);
    const auto pi = exact_stationary(spec);
    const auto mu = normalized(spec.weights);
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      err = std::max(err, std::abs(pi[i] - mu[i]));
    }
    CHECK(err <= 1e-10);
  }
}

TEST_CASE("discrete sampler occupation") {
  SUBCASE("uniform ring of 10") {
    DiscreteChainSpec spec;
    spec.weights.assign(10, 1.0);
    spec.speed.assign(10, 1.0);
    for (std::size_t x = 0; x < 10; ++x) {
      spec.neighbors.push_back({(x + 1) % 10, (x + 9) % 10});
    }
    RngStream rng(14, 0);
    const auto path = discrete_sampler(spec, 0, 1e4, rng);
    // All rates are 1, so the total rate is 2 at every state.
    CHECK(path.event_count() == doctest::Approx(2e4).epsilon(0.05));
    // Chi-squared on the states visited at unit-spaced grid times far enough
    // apart to be nearly independent.
    std::vector<double> counts(10, 0.0);
    SkeletonCursor cur(path);
    for (int k = 1; k <= 1000; ++k) {
      counts[static_cast<std::size_t>(cur.position_at(10.0 * k)[0])] += 1.0;
    }
    CHECK(ts::chi_squared_gof(counts, std::vector<double>(10, 0.1)).p_value > 0.01);
  }
  SUBCASE("three states with speeds (1, 2, 4)") {
    const auto spec = three_state();
    RngStream rng(15, 0);
    const auto path = discrete_sampler(spec, 0, 1e5, rng);
    const auto occ = normalized(occupation_times(path, 3));
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(std::abs(occ[i] - spec.weights[i]) < 0.01);
    }
  }
}
