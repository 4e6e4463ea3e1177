#include "tcsampler/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>

#include "tcsampler/bps.hpp"
#include "tcsampler/diffusion.hpp"
#include "tcsampler/estimators.hpp"
#include "tcsampler/io.hpp"
#include "tcsampler/parallel.hpp"
#include "tcsampler/spacemap.hpp"
#include "tcsampler/zigzag.hpp"

namespace tcs {

void Artifacts::add(std::string name, std::string contents) {
  files.emplace_back(std::move(name), std::move(contents));
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"sample",  "bimodal1d", "mixture13",
                                              "heavytail", "fclt",    "eyring",
                                              "discrete_oracle", "spacecomp"};
  return names;
}

namespace {

const std::vector<std::string>& sampler_names() {
  static const std::vector<std::string> names{"zigzag",     "timechanged_zigzag", "bps",
                                              "timechanged_bps", "algorithm1", "overdamped_em",
                                              "underdamped_em"};
  return names;
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

Json gaussian_target(int dim) {
  return {{"name", "gaussian"},
          {"dim", dim},
          {"mean", std::vector<double>(static_cast<std::size_t>(dim), 0.0)},
          {"variance", std::vector<double>(static_cast<std::size_t>(dim), 1.0)}};
}

Json base_config(const std::string& experiment) {
  return {{"experiment", experiment},
          {"sampler", "timechanged_zigzag"},
          {"target", gaussian_target(1)},
          {"speed", {{"kind", "one_plus_norm_sq_pow"}, {"p", 1.0}}},
          {"horizon", 1000.0},
          {"budget", 0},
          {"reps", 1},
          {"seed", 1},
          {"threads", 0},
          {"params", Json::object()}};
}

}  // namespace

Json default_config(const std::string& experiment) {
  if (!contains(experiment_names(), experiment)) {
    throw ConfigError("unknown experiment '" + experiment + "'");
  }
  Json c = base_config(experiment);
  auto& p = c["params"];
  if (experiment == "sample") {
    p = {{"observable", "x0"},   {"threshold", 1.0},    {"discretize_step", 0.1},
         {"refresh", 0.0},       {"bps_refresh", 1.0},  {"kernel", "rwm"},
         {"sigma", 1.0},         {"delta", 0.1},        {"sde_step", 1e-3},
         {"record_every", 10},   {"x0", nullptr},       {"max_events", 50000000},
         {"svg_points", 4000}};
  } else if (experiment == "bimodal1d") {
    c["target"] = {{"name", "bimodal1d"}, {"dim", 1}};
    c["speed"] = {{"kind", "exp_alpha_U"}, {"alpha", 0.9}};
    c["horizon"] = 1e4;
    p = {{"x0", -10.0}, {"svg_points", 4000}};
  } else if (experiment == "mixture13") {
    c["sampler"] = "algorithm1";
    c["target"] = {{"name", "mixture13"}, {"dim", 2}};
    c["speed"] = {{"kind", "exp_alpha_U"}, {"alpha", 0.9}};
    c["budget"] = 50000;
    c["reps"] = 10;
    p = {{"delta", 0.1},  {"kernel", "zz_lifted"}, {"discretize_step", 0.01},
         {"radius", 2.0}, {"svg_points", 5000}};
  } else if (experiment == "heavytail") {
    c["sampler"] = "algorithm1";
    c["target"] = {{"name", "student_t_2d_1dof"}, {"dim", 2}};
    c["speed"] = {{"kind", "exp_alpha_U"}, {"alpha", 0.3}};
    c["budget"] = 100000;
    c["reps"] = 100;
    p = {{"a", 0.3},       {"compare", {0.0}}, {"kernel", "rwm"},
         {"sigma", 10.0},  {"delta", 0.1},     {"threshold", 150.0}};
  } else if (experiment == "fclt") {
    c["horizon"] = 1e6;
    c["reps"] = 10;
    p = {{"refresh", 0.1}, {"n_batches", 0}, {"x0", 0.0}};
  } else if (experiment == "eyring") {
    c["target"] = {{"name", "double_well_1d"}, {"dim", 1}};
    c["speed"] = {{"kind", "exp_alpha_U"}, {"alpha", 0.0}};
    c["reps"] = 500;
    p = {{"a", 0.0},   {"epsilons", {1.0, 0.5, 1.0 / 3.0, 0.25}},
         {"x0", -1.0}, {"x1", 0.0}, {"v0", -1.0}, {"max_base_time", 1e6}};
  } else if (experiment == "discrete_oracle") {
    c["sampler"] = "algorithm1";
    c["horizon"] = 1e4;
    p = {{"n_states", 20}, {"g", "metropolis"}, {"spec", nullptr}};
  } else if (experiment == "spacecomp") {
    c["target"] = gaussian_target(2);
    c["speed"] = {{"kind", "jacobian_ball"}, {"d", 2}};
    c["horizon"] = 200.0;
    p = {{"transform_step", 0.01}, {"samples", 5000}, {"svg_points", 4000}};
  }
  return c;
}

// ---------------------------------------------------------------------------
// Config parsing and validation.

TargetDensity target_from_config(const Json& t) {
  if (!t.is_object() || !t.contains("name")) {
    throw ConfigError("target: expected an object with a name");
  }
  TargetSpec spec;
  spec.name = t.at("name").get<std::string>();
  spec.dim = t.value("dim", 1);
  if (t.contains("mean") && !t["mean"].is_null()) {
    spec.mean = t["mean"].get<std::vector<double>>();
  }
  if (t.contains("variance") && !t["variance"].is_null()) {
    spec.variance = t["variance"].get<std::vector<double>>();
  }
  if (t.contains("means") && !t["means"].is_null()) {
    spec.means = t["means"].get<std::vector<std::vector<double>>>();
  }
  try {
    auto target = builtin_target(spec);
    if (t.contains("dim") && target.dim != spec.dim) {
      throw ConfigError("target: '" + spec.name + "' has dimension " + std::to_string(target.dim));
    }
    return target;
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("target: ") + e.what());
  }
}

SpeedFunction speed_from_config(const Json& s, const TargetDensity& target) {
  if (!s.is_object() || !s.contains("kind")) {
    throw ConfigError("speed: expected an object with a kind");
  }
  const auto kind = s.at("kind").get<std::string>();
  try {
    if (kind == "constant") {
      const double c = s.value("c", 1.0);
      if (!(c > 0.0) || !std::isfinite(c)) {
        throw ConfigError("speed: constant must be positive");
      }
      return constant_speed(c);
    }
    if (kind == "exp_alpha_U") {
      const double alpha = s.value("alpha", 0.0);
      if (!(alpha >= 0.0 && alpha < 1.0)) {
        throw ConfigError("speed: alpha must lie in [0, 1); alpha >= 1 makes the process explosive");
      }
      return exp_alpha_potential(target, alpha);
    }
    if (kind == "one_plus_norm_sq_pow") {
      return one_plus_norm_sq_pow(s.value("p", 1.0));
    }
    if (kind == "jacobian_ball" || kind == "stereographic") {
      const int d = s.value("d", static_cast<int>(target.dim));
      if (d < 1 || static_cast<std::size_t>(d) != target.dim) {
        throw ConfigError("speed: d must equal the target dimension");
      }
      return kind == "jacobian_ball" ? ball_jacobian_speed(static_cast<std::size_t>(d))
                                     : stereographic_speed(static_cast<std::size_t>(d));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("speed: ") + e.what());
  }
  throw ConfigError("speed: unknown kind '" + kind + "'");
}

namespace {

double num(const Json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number()) {
    throw ConfigError(std::string("expected a number for '") + key + "'");
  }
  return j[key].get<double>();
}

std::uint64_t count(const Json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number()) {
    throw ConfigError(std::string("expected a non-negative integer for '") + key + "'");
  }
  const double v = j[key].get<double>();
  if (!(v >= 0.0) || v != std::floor(v) || v > 9.007199254740992e15) {
    throw ConfigError(std::string("expected a non-negative integer for '") + key + "'");
  }
  return static_cast<std::uint64_t>(v);
}

void check_kernel(const std::string& kernel) {
  if (kernel != "rwm" && kernel != "zz" && kernel != "zz_lifted") {
    throw ConfigError("unknown kernel '" + kernel + "'");
  }
}

void require_positive(const Json& j, const char* key) {
  const double v = num(j, key);
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ConfigError(std::string("'") + key + "' must be positive");
  }
}

void validate(const Json& c) {
  const auto& exp = c["experiment"].get_ref<const std::string&>();
  if (!c["sampler"].is_string() || !contains(sampler_names(), c["sampler"].get<std::string>())) {
    throw ConfigError("unknown sampler '" + c["sampler"].dump() + "'");
  }
  count(c, "seed");
  count(c, "threads");
  count(c, "budget");
  if (count(c, "reps") < 1) {
    throw ConfigError("'reps' must be at least 1");
  }
  require_positive(c, "horizon");
  const auto target = target_from_config(c["target"]);
  speed_from_config(c["speed"], target);
  const auto& p = c["params"];
  if (exp == "heavytail") {
    for (double a : std::vector<double>{num(p, "a")}) {
      if (!(a >= 0.0 && a < 1.0 / 3.0)) {
        throw ConfigError("heavytail: a must lie in [0, 1/3) so that mu(s) is finite");
      }
    }
    for (const auto& a : p["compare"]) {
      if (!a.is_number() || !(a.get<double>() >= 0.0 && a.get<double>() < 1.0 / 3.0)) {
        throw ConfigError("heavytail: compare values must lie in [0, 1/3)");
      }
    }
    if (count(c, "budget") < 1) {
      throw ConfigError("heavytail: budget must be at least 1");
    }
    require_positive(p, "sigma");
    require_positive(p, "delta");
    require_positive(p, "threshold");
  }
  if (exp == "eyring") {
    const double a = num(p, "a");
    if (!(a >= 0.0 && a < 1.0)) {
      throw ConfigError("eyring: a must lie in [0, 1)");
    }
    if (!p["epsilons"].is_array() || p["epsilons"].size() < 2) {
      throw ConfigError("eyring: need at least two epsilons");
    }
    for (const auto& e : p["epsilons"]) {
      if (!e.is_number() || !(e.get<double>() > 0.0)) {
        throw ConfigError("eyring: epsilons must be positive");
      }
    }
    if (target.label != "double_well_1d") {
      throw ConfigError("eyring: target must be double_well_1d");
    }
  }
  if (exp == "mixture13") {
    const auto kernel = p["kernel"].get<std::string>();
    if (kernel != "zz" && kernel != "zz_lifted") {
      throw ConfigError("mixture13: kernel must be zz or zz_lifted");
    }
    if (count(c, "budget") < 1) {
      throw ConfigError("mixture13: budget must be at least 1");
    }
    require_positive(p, "delta");
    require_positive(p, "discretize_step");
    require_positive(p, "radius");
  }
  if (exp == "sample") {
    require_positive(p, "discretize_step");
    require_positive(p, "sde_step");
    if (num(p, "refresh") < 0.0 || num(p, "bps_refresh") < 0.0) {
      throw ConfigError("refresh rates must be non-negative");
    }
    const auto obs = p["observable"].get<std::string>();
    if (obs != "x0" && obs != "norm_sq" && obs != "norm_gt" && obs != "positive") {
      throw ConfigError("unknown observable '" + obs + "'");
    }
    check_kernel(p["kernel"].get<std::string>());
    if (!p["x0"].is_null() && p["x0"].size() != target.dim) {
      throw ConfigError("x0 must have the target dimension");
    }
  }
  if (exp == "heavytail") {
    check_kernel(p["kernel"].get<std::string>());
  }
  if (exp == "fclt" && target.dim != 1) {
    throw ConfigError("fclt: one-dimensional targets only");
  }
  if (exp == "discrete_oracle") {
    const auto g = p["g"].get<std::string>();
    if (g != "metropolis" && g != "barker") {
      throw ConfigError("discrete_oracle: g must be metropolis or barker");
    }
    if (p["spec"].is_null() && count(p, "n_states") < 3) {
      throw ConfigError("discrete_oracle: need at least 3 states");
    }
  }
  if (exp == "spacecomp") {
    require_positive(p, "transform_step");
    if (count(p, "samples") < 1) {
      throw ConfigError("spacecomp: samples must be at least 1");
    }
  }
}

}  // namespace

Json resolve_config(const Json& raw_in) {
  const Json& raw = raw_in.contains("config") && raw_in["config"].is_object() ? raw_in["config"] : raw_in;
  if (!raw.is_object() || !raw.contains("experiment") || !raw["experiment"].is_string()) {
    throw ConfigError("config must be an object with an 'experiment' name");
  }
  Json c = default_config(raw["experiment"].get<std::string>());
  for (const auto& [key, value] : raw.items()) {
    if (!c.contains(key)) {
      throw ConfigError("unknown config key '" + key + "'");
    }
    if (key == "params") {
      if (!value.is_object()) {
        throw ConfigError("'params' must be an object");
      }
      for (const auto& [pk, pv] : value.items()) {
        if (!c["params"].contains(pk)) {
          throw ConfigError("unknown parameter '" + pk + "' for " + c["experiment"].get<std::string>());
        }
        c["params"][pk] = pv;
      }
    } else {
      c[key] = value;
    }
  }
  const auto& exp = c["experiment"].get_ref<const std::string&>();
  // The speed of these experiments is determined by their exponent a.
  if (exp == "heavytail" || exp == "eyring") {
    if (!c["params"]["a"].is_number()) {
      throw ConfigError("expected a number for 'a'");
    }
    c["speed"] = {{"kind", "exp_alpha_U"}, {"alpha", c["params"]["a"]}};
  }
  try {
    validate(c);
  } catch (const ConfigError&) {
    throw;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

// ---------------------------------------------------------------------------
// Shared helpers for the runners.

namespace {

Vec from_json_vec(const Json& j, std::size_t dim, double fill) {
  if (j.is_null()) {
    return Vec::Constant(static_cast<Eigen::Index>(dim), fill);
  }
  if (j.is_number()) {
    return Vec::Constant(static_cast<Eigen::Index>(dim), j.get<double>());
  }
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Observable make_observable(const Json& p) {
  const auto name = p["observable"].get<std::string>();
  const double c = p.value("threshold", 1.0);
  if (name == "norm_sq") {
    return [](const Vec& x) { return x.squaredNorm(); };
  }
  if (name == "norm_gt") {
    return [c](const Vec& x) { return x.norm() > c ? 1.0 : 0.0; };
  }
  if (name == "positive") {
    return [](const Vec& x) { return x[0] > 0.0 ? 1.0 : 0.0; };
  }
  return [](const Vec& x) { return x[0]; };
}

/// Grid samples of a path for plotting: (t or x_0, x_0 or x_1, ln speed).
SvgPlot path_plot(const PathSkeleton& path, const std::function<double(const State&)>& log_speed,
                  std::size_t points, std::string title) {
  SvgPlot plot;
  plot.title = std::move(title);
  const bool one_d = path.dim() == 1;
  plot.x_label = one_d ? "t" : "x_0";
  plot.y_label = one_d ? "x_0" : "x_1";
  const double t_end = path.horizon();
  points = std::max<std::size_t>(points, 2);
  SkeletonCursor cursor(path);
  for (std::size_t k = 0; k < points; ++k) {
    const double t = t_end * static_cast<double>(k) / static_cast<double>(points - 1);
    const State st = cursor.state_at(t);
    plot.x.push_back(one_d ? t : st.position[0]);
    plot.y.push_back(one_d ? st.position[0] : st.position[1]);
    if (log_speed) {
      plot.log_speed.push_back(log_speed(st));
    }
  }
  return plot;
}

std::string csv(const CsvTable& t) { return to_csv(t); }

MarkovKernel make_kernel(const Json& p, const TiltedPotential& tilted) {
  const auto name = p["kernel"].get<std::string>();
  if (name == "zz") {
    return zz_fixed_time_kernel(tilted, p["delta"].get<double>());
  }
  if (name == "zz_lifted") {
    return zz_lifted_kernel(tilted, p["delta"].get<double>());
  }
  return rwm_kernel(tilted, p["sigma"].get<double>());
}

std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

EstimatorReport stamped(EstimatorReport r, std::string strategy, std::uint64_t seed) {
  r.strategy = std::move(strategy);
  r.seed = seed;
  return r;
}

// ---------------------------------------------------------------------------

void run_sample(const Json& c, Artifacts& out) {
  const auto target = target_from_config(c["target"]);
  const auto speed = speed_from_config(c["speed"], target);
  const auto& p = c["params"];
  const auto sampler = c["sampler"].get<std::string>();
  const double horizon = c["horizon"].get<double>();
  const auto seed = c["seed"].get<std::uint64_t>();
  const std::size_t dim = target.dim;
  const Vec x0 = from_json_vec(p["x0"], dim, 0.0);
  const Observable f = make_observable(p);
  const double step = p["discretize_step"].get<double>();
  const auto svg_points = p["svg_points"].get<std::size_t>();
  RngStream rng(seed, 0);
  std::vector<EstimatorReport> reports;
  auto log_s = [&speed](const State& st) { return speed.log_value(st.position); };
  auto log_moving = [&speed](const State& st) {
    return speed.log_value(st.position) + std::log(st.velocity.norm());
  };
  SimulationOptions options;
  options.max_events = p["max_events"].get<std::uint64_t>();

  if (sampler == "zigzag" || sampler == "timechanged_zigzag" || sampler == "bps" ||
      sampler == "timechanged_bps") {
    const bool zz = sampler.find("zigzag") != std::string::npos;
    const bool changed = sampler.rfind("timechanged", 0) == 0;
    ZigZagConfig zc;
    BpsConfig bc;
    if (zz) {
      zc.target = target;
      zc.speed = speed;
      zc.refresh.assign(dim, p["refresh"].get<double>());
      zc.x0 = x0;
      zc.v0 = Vec::Ones(static_cast<Eigen::Index>(dim));
      zc.horizon = horizon;
      zc.options = options;
    } else {
      bc.target = target;
      bc.speed = speed;
      bc.refresh_rate = p["bps_refresh"].get<double>();
      bc.x0 = x0;
      bc.v0 = Vec::Unit(static_cast<Eigen::Index>(dim), 0);
      bc.horizon = horizon;
      bc.options = options;
    }
    if (changed) {
      const auto tc = zz ? simulate_timechanged_zigzag(zc, rng) : simulate_timechanged_bps(bc, rng);
      out.add("skeleton.csv", csv(skeleton_table(tc.path)));
      out.add("base_skeleton.csv", csv(skeleton_table(*tc.base)));
      const double t = tc.path.horizon();
      reports.push_back(stamped(direct_average(tc.path, f, t), "direct", seed));
      reports.push_back(stamped(reweighted_average(*tc.base, f, speed, tc.base->horizon()),
                                "reweighted", seed));
      if (t >= step * static_cast<double>(kDefaultBatches)) {
        reports.push_back(stamped(discretized_average(tc.path, f, step), "discretized", seed));
      }
      out.summary["mu_s_estimate"] = mu_s_estimate(*tc.warp);
      out.summary["envelope_violations"] = tc.stats.envelope_violations;
      out.add("trace.svg", render_svg(path_plot(tc.path, log_moving, svg_points,
                                                "time-changed " + std::string(zz ? "Zig-Zag" : "BPS"))));
    } else {
      const auto run = zz ? simulate_zigzag(zc, rng) : simulate_bps(bc, rng);
      out.add("skeleton.csv", csv(skeleton_table(run.skeleton)));
      reports.push_back(stamped(direct_average(run.skeleton, f, horizon), "direct", seed));
      reports.push_back(stamped(reweighted_average(run.skeleton, f, speed, horizon), "reweighted", seed));
      if (horizon >= step * static_cast<double>(kDefaultBatches)) {
        reports.push_back(stamped(discretized_average(run.skeleton, f, step), "discretized", seed));
      }
      out.summary["envelope_violations"] = run.stats.envelope_violations;
      auto log_v = [](const State& st) { return std::log(st.velocity.norm()); };
      out.add("trace.svg", render_svg(path_plot(run.skeleton, log_v, svg_points,
                                                std::string(zz ? "Zig-Zag" : "BPS") + " base process")));
    }
  } else if (sampler == "algorithm1") {
    const auto tilted = make_tilted(target, speed);
    const auto kernel = make_kernel(p, tilted);
    const auto budget = c["budget"].get<std::uint64_t>();
    const PathSkeleton path = budget > 0 ? algorithm1_jumps(speed, kernel, x0, budget, rng)
                                         : algorithm1(speed, kernel, x0, horizon, rng);
    out.add("skeleton.csv", csv(skeleton_table(path)));
    const double t = path.horizon();
    reports.push_back(stamped(direct_average(path, f, t), "direct", seed));
    if (t >= step * static_cast<double>(kDefaultBatches)) {
      reports.push_back(stamped(discretized_average(path, f, step), "discretized", seed));
    }
    out.add("trace.svg", render_svg(path_plot(path, log_s, svg_points, "time-changed jump process")));
  } else {
    SdeConfig sc;
    sc.target = target;
    sc.speed = speed;
    sc.step = p["sde_step"].get<double>();
    sc.horizon = horizon;
    sc.x0 = x0;
    sc.kind = sampler == "underdamped_em" ? SdeKind::underdamped : SdeKind::overdamped;
    sc.record_every = p["record_every"].get<std::uint64_t>();
    const auto path = simulate_sde(sc, rng);
    out.add("skeleton.csv", csv(skeleton_table(path)));
    reports.push_back(stamped(discretized_average(path, f, path.step()), "discretized", seed));
    out.add("trace.svg", render_svg(path_plot(path, log_s, svg_points, "Euler-Maruyama path")));
  }
  out.add("report.csv", csv(report_table(reports)));
}

void run_bimodal(const Json& c, Artifacts& out) {
  const auto target = target_from_config(c["target"]);
  const auto seed = c["seed"].get<std::uint64_t>();
  const auto& p = c["params"];
  const std::vector<std::pair<std::string, SpeedFunction>> speeds{
      {"s1", constant_speed(1.0)}, {"tc", speed_from_config(c["speed"], target)}};
  std::vector<EstimatorReport> reports;
  CsvTable crossings;
  crossings.header = {"speed", "mode_switches", "crossing_probability", "horizon", "seed"};
  const Observable right = [](const Vec& x) { return x[0] > 0.0 ? 1.0 : 0.0; };
  for (std::size_t k = 0; k < speeds.size(); ++k) {
    const auto& [label, speed] = speeds[k];
    ZigZagConfig zc;
    zc.target = target;
    zc.speed = speed;
    zc.x0 = Vec::Constant(1, p["x0"].get<double>());
    zc.v0 = Vec::Ones(1);
    zc.horizon = c["horizon"].get<double>();
    RngStream rng(seed, k);
    const auto tc = simulate_timechanged_zigzag(zc, rng);
    out.add("skeleton_" + label + ".csv", csv(skeleton_table(tc.path)));
    reports.push_back(stamped(direct_average(tc.path, right, tc.path.horizon()), "direct_" + label, seed));
    reports.push_back(stamped(reweighted_average(*tc.base, right, speed, tc.base->horizon()),
                              "reweighted_" + label, seed));
    std::uint64_t switches = 0;
    for (std::size_t i = 1; i < tc.base->size(); ++i) {
      const double a = tc.base->position_after(i - 1)[0];
      const double b = tc.base->position_before(i)[0];
      switches += (a < 0.0) != (b < 0.0);
    }
    const double prob = crossing_probability(target, speed, zc.x0[0], 0.0);
    crossings.rows.push_back({label, switches, prob, tc.path.horizon(), seed});
    out.summary["mode_switches_" + label] = switches;
    auto log_moving = [&speed](const State& st) { return speed.log_value(st.position); };
    out.add("trace_" + label + ".svg",
            render_svg(path_plot(tc.path, log_moving, p["svg_points"].get<std::size_t>(),
                                 "bimodal target, speed " + label)));
  }
  out.add("report.csv", csv(report_table(reports)));
  out.add("crossings.csv", csv(crossings));
}

void run_mixture13(const Json& c, Artifacts& out) {
  const auto target = target_from_config(c["target"]);
  const auto seed = c["seed"].get<std::uint64_t>();
  const auto& p = c["params"];
  const auto steps = c["budget"].get<std::uint64_t>();
  const auto runs = c["reps"].get<std::size_t>();
  const double dstep = p["discretize_step"].get<double>();
  const double radius = p["radius"].get<double>();
  const auto means = mixture13_means();
  const std::vector<std::pair<std::string, SpeedFunction>> speeds{
      {"tc", speed_from_config(c["speed"], target)}, {"s1", constant_speed(1.0)}};

  struct RunResult {
    std::size_t modes = 0;
    std::uint64_t samples = 0;
    double horizon = 0.0;
  };
  std::vector<RunResult> results(runs * speeds.size());
  std::vector<PathSkeleton> first(speeds.size());
  parallel_for(results.size(), c["threads"].get<std::size_t>(), [&](std::size_t job) {
    const std::size_t run = job / speeds.size();
    const std::size_t which = job % speeds.size();
    const auto& speed = speeds[which].second;
    const auto kernel = make_kernel(p, make_tilted(target, speed));
    RngStream rng(seed, job);
    auto path = algorithm1_jumps(speed, kernel, Vec::Zero(2), steps, rng);
    std::vector<bool> seen(means.size(), false);
    SkeletonCursor cursor(path);
    const auto n = static_cast<std::uint64_t>(std::floor(path.horizon() / dstep));
    for (std::uint64_t i = 1; i <= n; ++i) {
      const Vec x = cursor.position_at(static_cast<double>(i) * dstep);
      for (std::size_t m = 0; m < means.size(); ++m) {
        if ((x - means[m]).norm() < radius) {
          seen[m] = true;
        }
      }
    }
    results[job] = {static_cast<std::size_t>(std::count(seen.begin(), seen.end(), true)), n,
                    path.horizon()};
    if (run == 0) {
      first[which] = std::move(path);
    }
  });
  CsvTable modes;
  modes.header = {"run", "speed", "modes_visited", "n_samples", "horizon", "seed"};
  for (std::size_t job = 0; job < results.size(); ++job) {
    const auto& r = results[job];
    modes.rows.push_back({static_cast<std::uint64_t>(job / speeds.size()), speeds[job % speeds.size()].first,
                          static_cast<std::uint64_t>(r.modes), r.samples, r.horizon, seed});
  }
  out.add("modes.csv", csv(modes));
  for (std::size_t which = 0; which < speeds.size(); ++which) {
    const auto& label = speeds[which].first;
    std::size_t all = 0;
    std::size_t few = 0;
    for (std::size_t run = 0; run < runs; ++run) {
      const auto m = results[run * speeds.size() + which].modes;
      all += m == means.size();
      few += m <= 3;
    }
    out.summary["runs_all_modes_" + label] = all;
    out.summary["runs_at_most_3_modes_" + label] = few;
    out.add("skeleton_" + label + ".csv", csv(skeleton_table(first[which])));
    // Scatter of the discretized samples of the first run, thinned for plotting.
    const auto& path = first[which];
    const auto& speed = speeds[which].second;
    SvgPlot plot;
    plot.title = "mixture of 13 Gaussians, speed " + label;
    plot.x_label = "x_0";
    plot.y_label = "x_1";
    plot.polyline = false;
    const auto n = static_cast<std::uint64_t>(std::floor(path.horizon() / dstep));
    const auto cap = p["svg_points"].get<std::uint64_t>();
    const std::uint64_t stride = std::max<std::uint64_t>(1, n / std::max<std::uint64_t>(cap, 1));
    SkeletonCursor cursor(path);
    for (std::uint64_t i = stride; i <= n; i += stride) {
      const Vec x = cursor.position_at(static_cast<double>(i) * dstep);
      plot.x.push_back(x[0]);
      plot.y.push_back(x[1]);
      plot.log_speed.push_back(speed.log_value(x));
    }
    out.add("samples_" + label + ".svg", render_svg(plot));
  }
}

void run_heavytail(const Json& c, Artifacts& out) {
  const auto target = target_from_config(c["target"]);
  const auto seed = c["seed"].get<std::uint64_t>();
  const auto& p = c["params"];
  const auto budget = c["budget"].get<std::uint64_t>();
  const auto reps = c["reps"].get<std::size_t>();
  const double threshold = p["threshold"].get<double>();
  // Radial integral of 2 pi r (1 + r^2)^{-3/2} / (2 pi) beyond the threshold.
  const double truth = 1.0 / std::sqrt(1.0 + threshold * threshold);
  std::vector<std::uint64_t> budgets;
  for (std::uint64_t b : {budget / 100, budget / 10, budget}) {
    if (b >= 1 && (budgets.empty() || budgets.back() != b)) {
      budgets.push_back(b);
    }
  }
  std::vector<double> as;
  for (const auto& a : p["compare"]) {
    as.push_back(a.get<double>());
  }
  as.push_back(p["a"].get<double>());
  std::sort(as.begin(), as.end());
  as.erase(std::unique(as.begin(), as.end()), as.end());

  CsvTable mse;
  mse.header = {"a", "budget", "median_rse", "mean_estimate", "reps", "truth", "seed"};
  CsvTable est;
  est.header = {"a", "rep", "estimate"};
  const Observable tail = [threshold](const Vec& x) { return x.norm() > threshold ? 1.0 : 0.0; };
  for (double a : as) {
    const auto speed = exp_alpha_potential(target, a);
    const auto tilted = make_tilted(target, speed);
    const auto kernel = make_kernel(p, tilted);
    std::vector<double> final_estimates(reps);
    const BudgetEstimator estimator = [&](const std::vector<std::uint64_t>& b, RngStream& rng) {
      const auto path = algorithm1_jumps(speed, kernel, Vec::Zero(2), b.back(), rng);
      // Holding-time estimator over the first n jumps, for every budget n.
      std::vector<double> values;
      double weighted = 0.0;
      double total = 0.0;
      std::size_t next = 0;
      for (std::size_t k = 0; k + 1 < path.size() && next < b.size(); ++k) {
        const double tau = path.time(k + 1) - path.time(k);
        weighted += tail(path.position_after(k)) * tau;
        total += tau;
        if (k + 1 == b[next]) {
          values.push_back(weighted / total);
          ++next;
        }
      }
      // Merged zero-duration jumps leave fewer records than jumps.
      while (values.size() < b.size()) {
        values.push_back(weighted / total);
      }
      final_estimates[rng.stream_id()] = values.back();
      return values;
    };
    const auto rows = mse_harness(estimator, truth, budgets, reps, seed, c["threads"].get<std::size_t>());
    for (const auto& r : rows) {
      mse.rows.push_back({a, r.budget, r.median_relative_square_error, r.mean_estimate,
                          static_cast<std::uint64_t>(r.replications), truth, seed});
    }
    for (std::size_t r = 0; r < reps; ++r) {
      est.rows.push_back({a, static_cast<std::uint64_t>(r), final_estimates[r]});
    }
    out.summary["median_rse_a=" + short_number(a)] = rows.back().median_relative_square_error;
  }
  out.summary["truth"] = truth;
  out.add("mse.csv", csv(mse));
  out.add("estimates.csv", csv(est));
}

void run_fclt(const Json& c, Artifacts& out) {
  const auto target = target_from_config(c["target"]);
  const auto seed = c["seed"].get<std::uint64_t>();
  const auto& p = c["params"];
  const auto reps = c["reps"].get<std::size_t>();
  FcltConfig fc;
  fc.target = target;
  fc.speed = speed_from_config(c["speed"], target);
  fc.g = [](const Vec& x) { return x[0]; };
  fc.horizon = c["horizon"].get<double>();
  fc.refresh = p["refresh"].get<double>();
  fc.n_batches = p["n_batches"].get<std::size_t>();
  fc.x0 = p["x0"].get<double>();
  std::vector<FcltResult> results(reps);
  parallel_for(reps, c["threads"].get<std::size_t>(), [&](std::size_t r) {
    RngStream rng(seed, r);
    results[r] = fclt_identity_check(fc, rng);
  });
  CsvTable table;
  table.header = {"run", "avar_x", "avar_y", "ratio", "mu_g", "mu_s", "n_batches", "seed"};
  std::size_t in_band = 0;
  for (std::size_t r = 0; r < reps; ++r) {
    const auto& res = results[r];
    table.rows.push_back({static_cast<std::uint64_t>(r), res.avar_x, res.avar_y, res.ratio, res.mu_g,
                          res.mu_s, static_cast<std::uint64_t>(res.n_batches), seed});
    in_band += res.ratio >= 0.8 && res.ratio <= 1.25;
  }
  out.summary["runs_ratio_in_band"] = in_band;
  out.add("fclt.csv", csv(table));
}

void run_eyring(const Json& c, Artifacts& out) {
  const auto target = target_from_config(c["target"]);
  const auto seed = c["seed"].get<std::uint64_t>();
  const auto& p = c["params"];
  EyringKramersOptions opt;
  opt.x0 = p["x0"].get<double>();
  opt.x1 = p["x1"].get<double>();
  opt.v0 = p["v0"].get<double>();
  opt.max_base_time = p["max_base_time"].get<double>();
  opt.threads = c["threads"].get<std::size_t>();
  const double a = p["a"].get<double>();
  const auto eps = p["epsilons"].get<std::vector<double>>();
  const auto res = eyring_kramers_experiment(target, a, eps, c["reps"].get<std::size_t>(), seed, opt);
  CsvTable table;
  table.header = {"a", "epsilon", "mean_time", "standard_error", "reps", "failures", "seed"};
  for (const auto& row : res.rows) {
    table.rows.push_back({a, row.epsilon, row.mean_time, row.standard_error,
                          static_cast<std::uint64_t>(row.replications),
                          static_cast<std::uint64_t>(row.failures), seed});
  }
  out.add("eyring.csv", csv(table));
  out.summary["slope"] = res.slope;
  out.summary["intercept"] = res.intercept;
  out.summary["expected_slope"] = 1.0 - a;
}

DiscreteChainSpec spec_from_json(const Json& j, BalanceFunction g) {
  DiscreteChainSpec spec;
  spec.weights = j.at("weights").get<std::vector<double>>();
  spec.neighbors = j.at("neighbors").get<std::vector<std::vector<std::size_t>>>();
  spec.speed = j.at("speed").get<std::vector<double>>();
  spec.g = g;
  try {
    spec.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("discrete_oracle spec: ") + e.what());
  }
  return spec;
}

void run_discrete_oracle(const Json& c, Artifacts& out) {
  const auto seed = c["seed"].get<std::uint64_t>();
  const auto& p = c["params"];
  const auto g = p["g"].get<std::string>() == "barker" ? BalanceFunction::barker
                                                       : BalanceFunction::metropolis;
  DiscreteChainSpec spec;
  if (p["spec"].is_null()) {
    RngStream gen(seed, 0);
    spec = random_chain_spec(gen, p["n_states"].get<std::size_t>(), g);
  } else {
    spec = spec_from_json(p["spec"], g);
  }
  const auto pi = exact_stationary(spec);
  const double z = std::accumulate(spec.weights.begin(), spec.weights.end(), 0.0);
  const double horizon = c["horizon"].get<double>();
  RngStream rng(seed, 1);
  const auto path = discrete_sampler(spec, 0, horizon, rng);
  const auto occ = occupation_times(path, spec.size());
  CsvTable table;
  table.header = {"state", "weight", "speed", "pi_exact", "mu", "abs_dev", "occupation"};
  double max_dev = 0.0;
  for (std::size_t x = 0; x < spec.size(); ++x) {
    const double mu = spec.weights[x] / z;
    const double dev = std::abs(pi[x] - mu);
    max_dev = std::max(max_dev, dev);
    table.rows.push_back({static_cast<std::uint64_t>(x), spec.weights[x], spec.speed[x], pi[x], mu, dev,
                          occ[x] / horizon});
  }
  out.add("oracle.csv", csv(table));
  out.add("skeleton.csv", csv(skeleton_table(path)));
  out.summary["max_abs_dev"] = max_dev;
  out.summary["n_states"] = spec.size();
}

void run_spacecomp(const Json& c, Artifacts& out) {
  const auto target = target_from_config(c["target"]);
  const auto speed = speed_from_config(c["speed"], target);
  const auto seed = c["seed"].get<std::uint64_t>();
  const auto& p = c["params"];
  const std::size_t d = target.dim;
  ZigZagConfig zc;
  zc.target = target;
  zc.speed = speed;
  zc.x0 = Vec::Zero(static_cast<Eigen::Index>(d));
  zc.v0 = Vec::Ones(static_cast<Eigen::Index>(d));
  zc.horizon = c["horizon"].get<double>();
  RngStream rng(seed, 0);
  const auto tc = simulate_timechanged_zigzag(zc, rng);
  out.add("skeleton.csv", csv(skeleton_table(tc.path)));
  const auto points = p["svg_points"].get<std::size_t>();
  auto log_moving = [&speed](const State& st) {
    return speed.log_value(st.position) + std::log(st.velocity.norm());
  };
  out.add("timechanged.svg", render_svg(path_plot(tc.path, log_moving, points, "time-changed Zig-Zag")));

  const auto h = ball_map(d);
  const auto ball = transform_skeleton(tc.path, h.inverse, p["transform_step"].get<double>());
  CsvTable bt;
  bt.header = {"t"};
  for (std::size_t i = 0; i < d; ++i) {
    bt.header.push_back("y_" + std::to_string(i));
  }
  bt.header.push_back("speed");
  for (std::size_t k = 0; k < ball.speed.size(); ++k) {
    auto& row = bt.rows.emplace_back();
    row.emplace_back(ball.path.time(k));
    const auto y = ball.path.position_after(k);
    for (std::size_t i = 0; i < d; ++i) {
      row.emplace_back(y[static_cast<Eigen::Index>(i)]);
    }
    row.emplace_back(ball.speed[k]);
  }
  out.add("ball_path.csv", csv(bt));
  if (d >= 2) {
    SvgPlot plot;
    plot.title = "time-changed Zig-Zag mapped into the unit ball";
    plot.x_label = "y_0";
    plot.y_label = "y_1";
    const std::size_t stride = std::max<std::size_t>(1, bt.rows.size() / std::max<std::size_t>(points, 1));
    for (std::size_t k = stride; k < bt.rows.size(); k += stride) {
      plot.x.push_back(std::get<double>(bt.rows[k][1]));
      plot.y.push_back(std::get<double>(bt.rows[k][2]));
      plot.log_speed.push_back(std::log(std::max(ball.speed[k], 1e-300)));
    }
    out.add("ball_path.svg", render_svg(plot));
  }

  RngStream rs(seed, 1);
  const auto ys = ball_rejection_samples(d, p["samples"].get<std::size_t>(), rs);
  CsvTable push;
  for (std::size_t i = 0; i < d; ++i) {
    push.header.push_back("y_" + std::to_string(i));
  }
  for (std::size_t i = 0; i < d; ++i) {
    push.header.push_back("x_" + std::to_string(i));
  }
  double sum_sq = 0.0;
  for (const auto& y : ys) {
    const Vec x = h.forward(y);
    auto& row = push.rows.emplace_back();
    for (std::size_t i = 0; i < d; ++i) {
      row.emplace_back(y[static_cast<Eigen::Index>(i)]);
    }
    for (std::size_t i = 0; i < d; ++i) {
      row.emplace_back(x[static_cast<Eigen::Index>(i)]);
    }
    sum_sq += x.squaredNorm();
  }
  out.add("pushforward.csv", csv(push));
  out.summary["pushforward_mean_norm_sq"] = sum_sq / static_cast<double>(ys.size());
  out.summary["mu_s_estimate"] = mu_s_estimate(*tc.warp);
}

}  // namespace

void run_experiment(const Json& config, Artifacts& out) {
  const auto& exp = config.at("experiment").get_ref<const std::string&>();
  if (exp == "sample") {
    run_sample(config, out);
  } else if (exp == "bimodal1d") {
    run_bimodal(config, out);
  } else if (exp == "mixture13") {
    run_mixture13(config, out);
  } else if (exp == "heavytail") {
    run_heavytail(config, out);
  } else if (exp == "fclt") {
    run_fclt(config, out);
  } else if (exp == "eyring") {
    run_eyring(config, out);
  } else if (exp == "discrete_oracle") {
    run_discrete_oracle(config, out);
  } else if (exp == "spacecomp") {
    run_spacecomp(config, out);
  } else {
    throw ConfigError("unknown experiment '" + exp + "'");
  }
}

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Json make_manifest(const Json& config, const Artifacts& artifacts, const std::string& status,
                   const std::string& error) {
  Json files = Json::array();
  for (const auto& [name, contents] : artifacts.files) {
    files.push_back({{"name", name}, {"bytes", contents.size()}, {"fnv1a64", fnv1a_hex(contents)}});
  }
  Json m = {{"tool", "tcs"},
            {"version", kToolVersion},
            {"status", status},
            {"seed", config.value("seed", std::uint64_t{0})},
            {"config", config},
            {"files", files},
            {"summary", artifacts.summary}};
  if (!error.empty()) {
    m["error"] = error;
  }
  return m;
}

void write_artifacts(const std::filesystem::path& dir, const Artifacts& artifacts,
                     const Json& manifest) {
  std::filesystem::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& contents) {
    std::ofstream f(dir / name, std::ios::binary | std::ios::trunc);
    if (!f) {
      throw InvalidArgument("cannot write " + (dir / name).string());
    }
    f << contents;
  };
  for (const auto& [name, contents] : artifacts.files) {
    write(name, contents);
  }
  write("manifest.json", manifest.dump(2) + "\n");
}

DiscreteChainSpec random_chain_spec(RngStream& rng, std::size_t n, BalanceFunction g) {
  if (n < 3) {
    throw InvalidArgument("random_chain_spec: need at least 3 states");
  }
  DiscreteChainSpec spec;
  spec.g = g;
  spec.weights.resize(n);
  spec.speed.resize(n);
  spec.neighbors.assign(n, {});
  std::vector<std::set<std::size_t>> adj(n);
  auto link = [&](std::size_t a, std::size_t b) {
    if (a != b && adj[a].insert(b).second) {
      adj[b].insert(a);
      spec.neighbors[a].push_back(b);
      spec.neighbors[b].push_back(a);
    }
  };
  for (std::size_t x = 0; x < n; ++x) {
    spec.weights[x] = 0.1 + 9.9 * rng.uniform();
    spec.speed[x] = 1.0 + 9.0 * rng.uniform();
    link(x, (x + 1) % n);
  }
  for (std::size_t k = 0; k < n / 2; ++k) {
    link(rng.index(n), rng.index(n));
  }
  return spec;
}

}  // namespace tcs
