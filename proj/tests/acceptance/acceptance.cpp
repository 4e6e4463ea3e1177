// Acceptance checks. Usage: tcs_acceptance [criterion ...]; no argument runs
// all of them. Prints one PASS/FAIL line per criterion and exits non-zero if
// any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "stats.hpp"
#include "tcsampler/estimators.hpp"
#include "tcsampler/experiments.hpp"
#include "tcsampler/jumpchain.hpp"
#include "tcsampler/zigzag.hpp"

using namespace tcs;
namespace ts = tcs::testing;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Vec v1(double a) { return Vec::Constant(1, a); }

ZigZagConfig normal_zz(double horizon, SpeedFunction speed) {
  ZigZagConfig cfg;
  cfg.target = gaussian(v1(0.0), v1(1.0));
  cfg.speed = std::move(speed);
  cfg.x0 = v1(0.0);
  cfg.v0 = v1(1.0);
  cfg.horizon = horizon;
  return cfg;
}

Json run_defaults(const std::string& name) {
  Artifacts a;
  run_experiment(resolve_config({{"experiment", name}}), a);
  return a.summary;
}

// 1. Discrete exactness and long-run occupation.
Outcome discrete_exactness() {
  double max_err = 0.0;
  double pooled_stat = 0.0;
  double pooled_dof = 0.0;
  double min_p = 1.0;
  const double thin = 5.0;
  for (std::uint64_t i = 0; i < 20; ++i) {
    RngStream rng(101, i);
    const std::size_t n = 5 + rng.index(46);
    const auto g = i % 2 == 0 ? BalanceFunction::metropolis : BalanceFunction::barker;
    const auto spec = ts::random_discrete_spec(rng, n, g);
    const auto pi = exact_stationary(spec);
    double wsum = 0.0;
    for (double w : spec.weights) wsum += w;
    for (std::size_t k = 0; k < n; ++k) {
      max_err = std::max(max_err, std::abs(pi[k] - spec.weights[k] / wsum));
    }
    // States sampled every `thin` time units, binned so expected counts >= 5.
    const auto path = discrete_sampler(spec, 0, 1e4, rng);
    SkeletonCursor cursor(path);
    std::vector<double> counts(n, 0.0);
    for (double t = thin; t <= 1e4; t += thin) {
      counts[static_cast<std::size_t>(std::lround(cursor.position_at(t)[0]))] += 1.0;
    }
    double total = 0.0;
    for (double c : counts) total += c;
    std::vector<double> obs;
    std::vector<double> prob;
    double o = 0.0;
    double p = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      o += counts[k];
      p += pi[k];
      if (p * total >= 5.0) {
        obs.push_back(o);
        prob.push_back(p);
        o = p = 0.0;
      }
    }
    if (p > 0.0) {
      obs.back() += o;
      prob.back() += p;
    }
    const auto chi = ts::chi_squared_gof(obs, prob);
    pooled_stat += chi.statistic;
    pooled_dof += chi.dof;
    min_p = std::min(min_p, chi.p_value);
    std::printf("  spec %2llu: %2zu states, %s, max|pi - mu| %.2e, chi2 p %.3f\n",
                static_cast<unsigned long long>(i), n, g == BalanceFunction::metropolis ? "metropolis" : "barker  ",
                [&] {
                  double m = 0.0;
                  for (std::size_t k = 0; k < n; ++k) m = std::max(m, std::abs(pi[k] - spec.weights[k] / wsum));
                  return m;
                }(),
                chi.p_value);
  }
  const double pooled_p = ts::chi_squared_sf(pooled_stat, pooled_dof);
  return {max_err <= 1e-10 && pooled_p > 0.01,
          "max abs error " + fmt("%.2e", max_err) + " (<= 1e-10), pooled chi2 " +
              fmt("%.1f", pooled_stat) + " on " + fmt("%.0f", pooled_dof) + " dof, p " +
              fmt("%.3f", pooled_p) + " (> 0.01), smallest per-spec p " + fmt("%.3f", min_p)};
}

// 2. Crossing probability by first-excursion trials.
Outcome crossing() {
  const auto target = double_well_1d();
  const int n = 100000;
  bool ok = true;
  std::string detail;
  const std::vector<std::pair<double, double>> cases{{0.0, std::exp(-1.0)}, {0.9, std::exp(-0.1)}};
  for (const auto& [alpha, truth] : cases) {
    const auto speed = alpha == 0.0 ? constant_speed(1.0) : exp_alpha_potential(target, alpha);
    const auto tilted = make_tilted(target, speed);
    RngStream rng(202, static_cast<std::uint64_t>(alpha * 10));
    int hits = 0;
    for (int i = 0; i < n; ++i) {
      hits += first_excursion_trial(tilted, v1(-1.0), v1(1.0), 1.0, rng);
    }
    const double freq = static_cast<double>(hits) / n;
    const double sd = std::sqrt(truth * (1.0 - truth) / n);
    const double z = (freq - truth) / sd;
    const double closed = crossing_probability(target, speed, -1.0, 0.0);
    ok = ok && std::abs(z) <= 3.0 && std::abs(closed - truth) < 1e-12;
    detail += "alpha " + fmt("%.1f", alpha) + ": freq " + fmt("%.6f", freq) + " vs " +
              fmt("%.6f", truth) + " (" + fmt("%+.2f", z) + " sd), closed form " +
              fmt("%.6f", closed) + "; ";
  }
  return {ok, detail};
}

// 3. Heavy-tail rare event ordering.
Outcome heavytail() {
  const auto s = run_defaults("heavytail");
  const double m3 = s["median_rse_a=0.3"].get<double>();
  const double m0 = s["median_rse_a=0"].get<double>();
  return {m3 < m0, "median relative square error a=0.3 " + fmt("%.4g", m3) + " vs a=0 " +
                       fmt("%.4g", m0) + ", truth " + fmt("%.5g", s["truth"].get<double>())};
}

// 4. Mixture-13 mode coverage.
Outcome mixture13() {
  const auto s = run_defaults("mixture13");
  const auto all_tc = s["runs_all_modes_tc"].get<int>();
  const auto few_s1 = s["runs_at_most_3_modes_s1"].get<int>();
  return {all_tc >= 9 && few_s1 >= 9,
          "time-changed runs visiting all 13 modes " + std::to_string(all_tc) +
              "/10 (>= 9); s = 1 runs visiting <= 3 modes " + std::to_string(few_s1) + "/10 (>= 9)"};
}

// 5. Normalizing constant and mu(s).
Outcome normalizing() {
  const auto s = exp_alpha_potential(gaussian(v1(0.0), v1(1.0)), 0.5);
  RngStream rng(505, 0);
  const auto tc = simulate_timechanged_zigzag(normal_zz(1e5, s), rng);
  const double z = normalizing_constant(*tc.warp, 2.0 * std::sqrt(std::numbers::pi));
  const double mu_s = mu_s_estimate(*tc.warp);
  const double z_true = std::sqrt(2.0 * std::numbers::pi);
  const double ez = std::abs(z / z_true - 1.0);
  const double em = std::abs(mu_s / std::sqrt(2.0) - 1.0);
  return {ez <= 0.02 && em <= 0.02, "Z " + fmt("%.5f", z) + " (rel err " + fmt("%.4f", ez) +
                                        "), mu(s) " + fmt("%.5f", mu_s) + " (rel err " +
                                        fmt("%.4f", em) + "), tolerance 0.02"};
}

// 6. Warp exactness.
Outcome warp_exactness() {
  const auto speed = one_plus_norm_sq_pow(1.0);
  double closed_err = 0.0;
  double trip_err = 0.0;
  RngStream pick(606, 1000000);
  for (std::uint64_t p = 0; p < 1000; ++p) {
    RngStream rng(606, p);
    auto y = std::make_shared<const PathSkeleton>(
        simulate_zigzag(normal_zz(10.0 + 20.0 * rng.uniform(), constant_speed(1.0)), rng).skeleton);
    const auto w = build_warp(y, speed);
    // On a unit-speed 1-d segment, int du / (1 + x^2) = |atan(x1) - atan(x0)|.
    double t = 0.0;
    for (std::size_t k = 0; k + 1 < y->size(); ++k) {
      t += std::abs(std::atan(y->position_before(k + 1)[0]) - std::atan(y->position_after(k)[0]));
      closed_err = std::max(closed_err, std::abs(w->changed_time(y->time(k + 1)) - t));
    }
    for (int i = 0; i < 20; ++i) {
      const double tt = pick.uniform() * w->changed_horizon();
      trip_err = std::max(trip_err, std::abs(w->changed_time(w->base_time(tt)) - tt));
      const double u = pick.uniform() * w->base_horizon();
      trip_err = std::max(trip_err, std::abs(w->base_time(w->changed_time(u)) - u));
    }
  }
  return {closed_err <= 1e-8 && trip_err <= 1e-9,
          "max arctan error " + fmt("%.2e", closed_err) + " (<= 1e-8), max round-trip error " +
              fmt("%.2e", trip_err) + " (<= 1e-9) over 1000 paths"};
}

// 7. Exact thinning on Gaussians.
Outcome thinning() {
  std::uint64_t events = 0;
  std::uint64_t violations = 0;
  std::uint64_t stream = 0;
  Vec var(4);
  var << 0.05, 1.0, 3.0, 20.0;
  while (events < 1000000) {
    RngStream rng(707, stream);
    ZigZagConfig cfg;
    if (stream % 3 == 0) {
      cfg = normal_zz(1e5, constant_speed(1.0));
    } else {
      cfg.target = gaussian(Vec::Zero(4), var);
      cfg.speed = stream % 3 == 1 ? constant_speed(1.0) : one_plus_norm_sq_pow(1.0);
      cfg.x0 = Vec::Ones(4);
      cfg.v0 = Vec::Ones(4);
      cfg.horizon = 1e4;
    }
    try {
      if (stream % 3 == 2) {
        const auto tc = simulate_timechanged_zigzag(cfg, rng);
        events += tc.stats.accepted;
        violations += tc.stats.envelope_violations;
      } else {
        const auto run = simulate_zigzag(cfg, rng);
        events += run.stats.accepted;
        violations += run.stats.envelope_violations;
      }
    } catch (const EnvelopeViolation&) {
      ++violations;
    }
    ++stream;
  }
  // Discretized 1-d marginal, spaced 5 time units apart.
  RngStream rng(707, 1000);
  const auto run = simulate_zigzag(normal_zz(5e4, constant_speed(1.0)), rng);
  SkeletonCursor cursor(run.skeleton);
  std::vector<double> xs;
  for (int i = 1; i <= 10000; ++i) {
    xs.push_back(cursor.position_at(5.0 * i)[0]);
  }
  const auto ks = ts::ks_test(xs, ts::normal_cdf);
  return {violations == 0 && ks.p_value > 0.01,
          std::to_string(violations) + " envelope violations over " + std::to_string(events) +
              " events; KS p " + fmt("%.3f", ks.p_value) + " on 10^4 points (> 0.01)"};
}

// 8. Path-level identity between the two estimator routes.
Outcome path_identity() {
  const auto s = one_plus_norm_sq_pow(1.0);
  auto f = [](const Vec& x) { return std::exp(-0.3 * x[0] * x[0]) + 0.2 * x[0]; };
  double worst = 0.0;
  for (std::uint64_t p = 0; p < 100; ++p) {
    RngStream rng(808, p);
    const auto tc = simulate_timechanged_zigzag(normal_zz(5.0 + 15.0 * rng.uniform(), s), rng);
    const double t = tc.path.horizon();
    const double lhs =
        direct_average(tc.path, f, t, kDefaultBatches, PathQuadrature::adaptive).estimate;
    const double rhs = reweighted_average(*tc.base, f, s, tc.warp->base_time(t)).estimate;
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return {worst <= 1e-8, "max |direct - reweighted| " + fmt("%.2e", worst) + " over 100 paths (<= 1e-8)"};
}

// 9. FCLT variance identity.
Outcome fclt() {
  const auto s = run_defaults("fclt");
  const auto in_band = s["runs_ratio_in_band"].get<int>();
  return {in_band >= 8, "runs with ratio in [0.8, 1.25]: " + std::to_string(in_band) + "/10 (>= 8)"};
}

// 10. Eyring-Kramers slope.
Outcome eyring() {
  const auto target = double_well_1d();
  const std::vector<double> eps{1.0, 0.5, 1.0 / 3.0, 0.25};
  bool ok = true;
  std::string detail;
  for (double a : {0.0, 0.5}) {
    EyringKramersOptions opt;
    const auto res = eyring_kramers_experiment(target, a, eps, 500, 1010, opt);
    // Diagnostics: exact means from the renewal oracle and their own slope,
    // plus the slope after removing a sqrt(eps) prefactor.
    std::vector<double> inv;
    std::vector<double> ln_mc;
    std::vector<double> ln_exact;
    std::vector<double> ln_corr;
    for (const auto& row : res.rows) {
      const double exact = ts::eyring_mean_hitting_time(row.epsilon, a);
      std::printf("  a %.1f eps %.4f: mean %.4f +- %.4f, exact %.4f, failures %zu\n", a,
                  row.epsilon, row.mean_time, row.standard_error, exact, row.failures);
      inv.push_back(1.0 / row.epsilon);
      ln_mc.push_back(std::log(row.mean_time));
      ln_exact.push_back(std::log(exact));
      ln_corr.push_back(std::log(row.mean_time / std::sqrt(row.epsilon)));
    }
    auto slope = [&](const std::vector<double>& ys) {
      const double mx = ts::mean(inv);
      const double my = ts::mean(ys);
      double sxy = 0.0;
      double sxx = 0.0;
      for (std::size_t i = 0; i < ys.size(); ++i) {
        sxy += (inv[i] - mx) * (ys[i] - my);
        sxx += (inv[i] - mx) * (inv[i] - mx);
      }
      return sxy / sxx;
    };
    const double expected = 1.0 - a;
    const bool in = std::abs(res.slope - expected) <= 0.2 * expected;
    ok = ok && in;
    std::printf("  a %.1f: slope %.4f (target %.2f +- 20%%), exact-mean slope %.4f, "
                "sqrt(eps)-corrected slope %.4f\n",
                a, res.slope, expected, slope(ln_exact), slope(ln_corr));
    detail += "a " + fmt("%.1f", a) + " slope " + fmt("%.4f", res.slope) + " vs " +
              fmt("%.2f", expected) + (in ? " (in band); " : " (out of band); ");
  }
  return {ok, detail};
}

// 11. Determinism of every experiment, also across thread counts.
Outcome determinism() {
  const std::map<std::string, Json> reduced{
      {"sample", {{"horizon", 300.0}}},
      {"bimodal1d", {{"horizon", 500.0}}},
      {"mixture13", {{"budget", 3000}, {"reps", 3}}},
      {"heavytail", {{"budget", 3000}, {"reps", 5}}},
      {"fclt", {{"horizon", 5000.0}, {"reps", 3}}},
      {"eyring", {{"reps", 30}}},
      {"discrete_oracle", {{"horizon", 1000.0}}},
      {"spacecomp", {{"horizon", 30.0}, {"params", {{"samples", 500}}}}},
  };
  bool ok = true;
  std::size_t files = 0;
  std::string bad;
  for (const auto& name : experiment_names()) {
    Json raw = {{"experiment", name}, {"threads", 1}};
    if (reduced.count(name)) {
      raw.update(reduced.at(name));
    }
    const auto config = resolve_config(raw);
    Artifacts first;
    Artifacts second;
    Artifacts threaded;
    run_experiment(config, first);
    run_experiment(config, second);
    auto c3 = config;
    c3["threads"] = 3;
    run_experiment(c3, threaded);
    for (const auto* other : {&second, &threaded}) {
      if (other->files.size() != first.files.size()) {
        ok = false;
        bad += name + " (file count) ";
        continue;
      }
      for (std::size_t i = 0; i < first.files.size(); ++i) {
        if (first.files[i] != other->files[i]) {
          ok = false;
          bad += name + "/" + first.files[i].first + " ";
        }
      }
    }
    files += first.files.size();
  }
  return {ok, std::to_string(files) + " files from " + std::to_string(experiment_names().size()) +
                  " experiments identical across reruns and thread counts" +
                  (bad.empty() ? "" : "; differing: " + bad)};
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    std::string name;
    std::function<Outcome()> check;
    double limit_seconds;  // runtime bound that is part of the criterion; 0 if none
  };
  const std::vector<Criterion> criteria{
      {"discrete exactness", discrete_exactness, 30.0},
      {"crossing probability", crossing, 60.0},
      {"heavy-tail rare event", heavytail, 600.0},
      {"mixture-13 mode coverage", mixture13, 600.0},
      {"normalizing constant", normalizing, 0.0},
      {"warp exactness", warp_exactness, 5.0},
      {"exact thinning", thinning, 0.0},
      {"path-level identity", path_identity, 0.0},
      {"FCLT identity", fclt, 900.0},
      {"Eyring-Kramers slope", eyring, 1200.0},
      {"determinism", determinism, 0.0},
  };
  std::vector<std::size_t> selected;
  for (int i = 1; i < argc; ++i) {
    const long k = std::strtol(argv[i], nullptr, 10);
    if (k < 1 || k > static_cast<long>(criteria.size())) {
      std::fprintf(stderr, "unknown criterion '%s'\n", argv[i]);
      return 2;
    }
    selected.push_back(static_cast<std::size_t>(k));
  }
  if (selected.empty()) {
    for (std::size_t k = 1; k <= criteria.size(); ++k) selected.push_back(k);
  }
  int failures = 0;
  for (std::size_t k : selected) {
    const auto& [name, check, limit] = criteria[k - 1];
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = check();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (limit > 0.0 && secs > limit) {
      out.pass = false;
      out.detail += fmt("; runtime over the %.0f s limit", limit);
    }
    std::printf("criterion %zu %s: %s [%.1f s] %s\n", k, out.pass ? "PASS" : "FAIL", name.c_str(),
                secs, out.detail.c_str());
    std::fflush(stdout);
    failures += !out.pass;
  }
  return failures == 0 ? 0 : 1;
}
