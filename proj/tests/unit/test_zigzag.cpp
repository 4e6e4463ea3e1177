#include <cmath>
#include <vector>

#include "doctest.h"
#include "stats.hpp"
#include "tcsampler/errors.hpp"
#include "tcsampler/estimators.hpp"
#include "tcsampler/zigzag.hpp"

using namespace tcs;
namespace ts = tcs::testing;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }

ZigZagConfig std_normal_config(double horizon) {
  ZigZagConfig cfg;
  cfg.target = gaussian(v1(0.0), v1(1.0));
  cfg.speed = constant_speed(1.0);
  cfg.x0 = v1(0.0);
  cfg.v0 = v1(1.0);
  cfg.horizon = horizon;
  return cfg;
}

std::vector<double> grid_samples(const PathSkeleton& path, double delta, std::size_t n,
                                 Eigen::Index coord = 0) {
  std::vector<double> out;
  SkeletonCursor c(path);
  for (std::size_t k = 1; k <= n; ++k) {
    out.push_back(c.position_at(static_cast<double>(k) * delta)[coord]);
  }
  return out;
}

}  // namespace

TEST_CASE("zz_rates examples") {
  const auto g = gaussian(v1(0.0), v1(1.0));
  const auto t1 = make_tilted(g, constant_speed(1.0));
  CHECK(zz_rates(v1(2.0), v1(1.0), t1)[0] == doctest::Approx(2.0));
  CHECK(zz_rates(v1(2.0), v1(-1.0), t1)[0] == 0.0);
  const auto t9 = make_tilted(g, exp_alpha_potential(g, 0.9));
  CHECK(zz_rates(v1(2.0), v1(1.0), t9)[0] == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(zz_rates(v1(2.0), v1(1.0), t1, {0.5})[0] == doctest::Approx(2.5));
  CHECK_THROWS_AS(zz_rates(v1(2.0), v1(0.5), t1), InvalidArgument);
}

TEST_CASE("zz_rates: non-negative, exactly one of w and R_i w vanishes") {
  Vec m(2);
  m << 1.0, -1.0;
  Vec var(2);
  var << 2.0, 0.5;
  const auto tilted = make_tilted(gaussian(m, var), one_plus_norm_sq_pow(1.0));
  RngStream rng(1, 0);
  for (int k = 0; k < 200; ++k) {
    Vec x(2);
    x << 8.0 * rng.uniform() - 4.0, 8.0 * rng.uniform() - 4.0;
    Vec w(2);
    w << rng.sign(), rng.sign();
    const auto r = zz_rates(x, w, tilted);
    const Vec g = tilted.gradient(x);
    for (int i = 0; i < 2; ++i) {
      CHECK(r[i] >= 0.0);
      Vec wf = w;
      wf[i] = -wf[i];
      const auto rf = zz_rates(x, wf, tilted);
      if (g[i] != 0.0) {
        CHECK(((r[i] == 0.0) != (rf[i] == 0.0)));
      }
    }
  }
}

TEST_CASE("zig-zag on N(0,1): discretized marginal passes KS") {
  RngStream rng(2, 0);
  const auto run = simulate_zigzag(std_normal_config(1e4), rng);
  run.skeleton.validate();
  CHECK(run.stats.envelope_violations == 0);
  const auto xs = grid_samples(run.skeleton, 1.0, 10000);
  CHECK(ts::ks_test(xs, ts::normal_cdf).p_value > 0.01);
}

TEST_CASE("zig-zag: no flips while the rate is zero") {
  ZigZagConfig cfg;
  cfg.target = double_well_1d();
  cfg.speed = constant_speed(1.0);
  cfg.x0 = v1(0.0);
  cfg.v0 = v1(1.0);
  cfg.horizon = 50.0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    RngStream rng(3, s);
    const auto run = simulate_zigzag(cfg, rng);
    // Heading right from the barrier top, w U' < 0 until the mode at x = 1.
    REQUIRE(run.skeleton.event_count() >= 1);
    CHECK(run.skeleton.position_before(1)[0] > 1.0);
  }
}

TEST_CASE("zig-zag determinism and s = 1 time change") {
  auto cfg = std_normal_config(500.0);
  RngStream a(4, 7);
  RngStream b(4, 7);
  const auto ra = simulate_zigzag(cfg, a);
  const auto rb = simulate_zigzag(cfg, b);
  REQUIRE(ra.skeleton.size() == rb.skeleton.size());
  for (std::size_t i = 0; i < ra.skeleton.size(); ++i) {
    CHECK(ra.skeleton.time(i) == rb.skeleton.time(i));
    CHECK(ra.skeleton.position_after(i)[0] == rb.skeleton.position_after(i)[0]);
  }
  RngStream c(4, 7);
  const auto tc = simulate_timechanged_zigzag(cfg, c);
  REQUIRE(tc.path.size() == ra.skeleton.size());
  for (std::size_t i = 0; i < tc.path.size(); ++i) {
    CHECK(std::abs(tc.path.time(i) - ra.skeleton.time(i)) <= 1e-12 * std::max(1.0, ra.skeleton.time(i)));
  }
}

TEST_CASE("velocity marginal of a 2-d zig-zag is uniform on {-1,1}^2") {
  ZigZagConfig cfg;
  Vec m = Vec::Zero(2);
  Vec var(2);
  var << 1.0, 4.0;
  cfg.target = gaussian(m, var);
  cfg.speed = constant_speed(1.0);
  cfg.x0 = Vec::Zero(2);
  cfg.v0 = Vec::Ones(2);
  cfg.horizon = 2e4;
  RngStream rng(5, 0);
  const auto run = simulate_zigzag(cfg, rng);
  std::vector<double> counts(4, 0.0);
  SkeletonCursor cur(run.skeleton);
  for (int k = 1; k <= 4000; ++k) {
    const auto st = cur.state_at(5.0 * k);
    counts[(st.velocity[0] > 0 ? 1 : 0) + (st.velocity[1] > 0 ? 2 : 0)] += 1.0;
  }
  CHECK(ts::chi_squared_gof(counts, {0.25, 0.25, 0.25, 0.25}).p_value > 0.01);
}

TEST_CASE("time-changed zig-zag with s = 1 + x^2: occupation of [-1, 1]") {
  auto cfg = std_normal_config(2e4);
  cfg.speed = one_plus_norm_sq_pow(1.0);
  RngStream rng(6, 0);
  const auto tc = simulate_timechanged_zigzag(cfg, rng);
  const auto rep = direct_average(
      tc.path, [](const Vec& x) { return std::abs(x[0]) <= 1.0 ? 1.0 : 0.0; }, tc.path.horizon());
  const double truth = ts::normal_cdf(1.0) - ts::normal_cdf(-1.0);
  CHECK(std::abs(rep.estimate - truth) < 3.0 * rep.standard_error() + 1e-3);
}

TEST_CASE("time-changed zig-zag on the +-10 bimodal target visits both modes") {
  ZigZagConfig cfg;
  cfg.target = builtin_target({"bimodal1d", 1, {}, {}, {}});
  cfg.speed = exp_alpha_potential(cfg.target, 0.9);
  cfg.x0 = v1(-10.0);
  cfg.v0 = v1(1.0);
  cfg.horizon = 1e3;
  RngStream rng(7, 0);
  const auto tc = simulate_timechanged_zigzag(cfg, rng);
  bool left = false;
  bool right = false;
  for (std::size_t i = 0; i < tc.path.size(); ++i) {
    const double x = tc.path.position_after(i)[0];
    left = left || std::abs(x + 10.0) < 2.0;
    right = right || std::abs(x - 10.0) < 2.0;
  }
  CHECK(left);
  CHECK(right);

  // Without the speed-up the same budget stays in the starting mode.
  cfg.speed = constant_speed(1.0);
  RngStream rng2(7, 0);
  const auto plain = simulate_timechanged_zigzag(cfg, rng2);
  for (std::size_t i = 0; i < plain.path.size(); ++i) {
    CHECK(plain.path.position_after(i)[0] < 0.0);
  }
}

TEST_CASE("crossing probability") {
  const auto dw = double_well_1d();
  CHECK(crossing_probability(dw, constant_speed(1.0), -1.0, 0.0) ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  CHECK(crossing_probability(dw, exp_alpha_potential(dw, 0.9), -1.0, 0.0) ==
        doctest::Approx(std::exp(-0.1)).epsilon(1e-12));
  CHECK(crossing_probability(dw, constant_speed(3.0), -1.0, 0.0) ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  // ln s = 3x makes U~' = U' - 3 negative where U' < 3 on (-1, 0).
  SpeedFunction tilt;
  tilt.value = [](const Vec& x) { return std::exp(3.0 * x[0]); };
  tilt.log_value = [](const Vec& x) { return 3.0 * x[0]; };
  tilt.gradient = [](const Vec& x) { return Vec(Vec::Constant(1, 3.0 * std::exp(3.0 * x[0]))); };
  tilt.lower_bound = std::exp(-3.0);
  tilt.dim = 1;
  CHECK_THROWS_AS(crossing_probability(dw, tilt, -1.0, 0.0), PreconditionViolation);
}

TEST_CASE("crossing frequency over first-excursion trials") {
  const auto dw = double_well_1d();
  for (double alpha : {0.0, 0.9}) {
    const auto s = alpha == 0.0 ? constant_speed(1.0) : exp_alpha_potential(dw, alpha);
    const auto tilted = make_tilted(dw, s);
    const double p = crossing_probability(dw, s, -1.0, 0.0);
    const int n = 20000;
    int hits = 0;
    for (int r = 0; r < n; ++r) {
      RngStream rng(8, static_cast<std::uint64_t>(r));
      hits += first_excursion_trial(tilted, v1(-1.0), v1(1.0), 1.0, rng) ? 1 : 0;
    }
    const double sd = std::sqrt(p * (1 - p) / n);
    CHECK(std::abs(hits / static_cast<double>(n) - p) < 3.0 * sd);
  }
}

TEST_CASE("tail escape probability") {
  const auto g = gaussian(v1(0.0), v1(1.0));
  CHECK(tail_escape_probability(g, constant_speed(1.0), v1(0.0), v1(1.0), 0.0) == 1.0);
  CHECK(tail_escape_probability(g, constant_speed(1.0), v1(0.0), v1(1.0), 2.0) ==
        doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
  // The closed form; with s = 1 + x^2 the rate is negative on (0, 1) so the
  // checked version refuses it.
  CHECK(tail_escape_formula(g, one_plus_norm_sq_pow(1.0), v1(0.0), v1(1.0), 2.0) ==
        doctest::Approx(5.0 * std::exp(-2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(tail_escape_probability(g, one_plus_norm_sq_pow(1.0), v1(0.0), v1(1.0), 2.0),
                  PreconditionViolation);

  // Monte Carlo check of the plug-in value where the precondition holds.
  const auto tilted = make_tilted(g, constant_speed(1.0));
  const int n = 20000;
  int hits = 0;
  for (int r = 0; r < n; ++r) {
    RngStream rng(9, static_cast<std::uint64_t>(r));
    hits += first_excursion_trial(tilted, v1(0.0), v1(1.0), 2.0, rng) ? 1 : 0;
  }
  const double p = std::exp(-2.0);
  CHECK(std::abs(hits / static_cast<double>(n) - p) < 3.0 * std::sqrt(p * (1 - p) / n));

  // 2-d: distance c along (1, 1) / sqrt 2.
  Vec z = Vec::Zero(2);
  const auto g2 = gaussian(z, Vec::Ones(2));
  CHECK(tail_escape_probability(g2, constant_speed(1.0), z, Vec::Ones(2), 2.0) ==
        doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
}

TEST_CASE("Eyring-Kramers: nearly flat potential gives small finite times") {
  const auto res = eyring_kramers_experiment(double_well_1d(), 0.0, {100.0, 50.0}, 200, 1);
  REQUIRE(res.rows.size() == 2);
  for (const auto& row : res.rows) {
    CHECK(row.failures == 0);
    CHECK(std::isfinite(row.mean_time));
    CHECK(row.mean_time > 0.0);
    // Starting at -1 with velocity -1 the process must turn around; for a flat
    // potential this takes a few time units.
    CHECK(row.mean_time < 20.0);
  }
  const auto res2 = eyring_kramers_experiment(double_well_1d(), 0.5, {100.0}, 50, 1);
  CHECK(std::isfinite(res2.rows[0].mean_time));
  CHECK_THROWS_AS(eyring_kramers_experiment(double_well_1d(), 1.0, {1.0}, 1, 1), InvalidArgument);
}

TEST_CASE("Eyring-Kramers runs are reproducible across thread counts") {
  EyringKramersOptions o1;
  o1.threads = 1;
  EyringKramersOptions o4;
  o4.threads = 4;
  const auto a = eyring_kramers_experiment(double_well_1d(), 0.5, {1.0}, 40, 3, o1);
  const auto b = eyring_kramers_experiment(double_well_1d(), 0.5, {1.0}, 40, 3, o4);
  CHECK(a.rows[0].mean_time == b.rows[0].mean_time);
}

TEST_CASE("ols_fit recovers a line") {
  const auto [slope, intercept] = ols_fit({1.0, 2.0, 3.0, 4.0}, {3.0, 5.0, 7.0, 9.0});
  CHECK(slope == doctest::Approx(2.0));
  CHECK(intercept == doctest::Approx(1.0));
  CHECK_THROWS_AS(ols_fit({1.0}, {1.0}), InvalidArgument);
}
