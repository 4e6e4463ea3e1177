#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <optional>
#include <string>

#include "tcsampler/bps.hpp"
#include "tcsampler/diffusion.hpp"
#include "tcsampler/estimators.hpp"
#include "tcsampler/experiments.hpp"
#include "tcsampler/io.hpp"
#include "tcsampler/jumpchain.hpp"
#include "tcsampler/spacemap.hpp"
#include "tcsampler/zigzag.hpp"

namespace py = pybind11;
using namespace tcs;

namespace {

Json to_json(const py::object& obj) {
  const auto text = py::module_::import("json").attr("dumps")(obj).cast<std::string>();
  return Json::parse(text);
}

py::object from_json(const Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

// Shared ownership lets a time-changed result hand out its base path.
using PathPtr = std::shared_ptr<PathSkeleton>;

struct TimeChanged {
  PathPtr path;
  PathPtr base;
  std::shared_ptr<const WarpTable> warp;
  ThinningStats stats;
};

TimeChanged wrap(TimeChangedPath tc) {
  return {std::make_shared<PathSkeleton>(std::move(tc.path)), std::const_pointer_cast<PathSkeleton>(tc.base),
          tc.warp, tc.stats};
}

py::dict stats_dict(const ThinningStats& s) {
  py::dict d;
  d["proposals"] = s.proposals;
  d["accepted"] = s.accepted;
  d["envelope_expiries"] = s.envelope_expiries;
  d["envelope_violations"] = s.envelope_violations;
  return d;
}

py::dict report_dict(const EstimatorReport& r) {
  py::dict d;
  d["strategy"] = r.strategy;
  d["estimate"] = r.estimate;
  d["avar"] = r.batch_means_variance;
  d["ess"] = r.effective_sample_size;
  d["standard_error"] = r.standard_error();
  d["n_events"] = r.n_events;
  d["horizon"] = r.horizon;
  d["n_batches"] = r.n_batches;
  return d;
}

Vec initial_velocity(const std::optional<Vec>& v0, std::size_t dim, bool unit) {
  if (v0) return *v0;
  return unit ? Vec(Vec::Unit(static_cast<Eigen::Index>(dim), 0))
              : Vec(Vec::Ones(static_cast<Eigen::Index>(dim)));
}

MarkovKernel kernel_by_name(const std::string& name, const TiltedPotential& tilted, double sigma,
                            double delta) {
  if (name == "rwm") return rwm_kernel(tilted, sigma);
  if (name == "zz") return zz_fixed_time_kernel(tilted, delta);
  if (name == "zz_lifted") return zz_lifted_kernel(tilted, delta);
  throw InvalidArgument("unknown kernel '" + name + "'");
}

BalanceFunction balance_by_name(const std::string& g) {
  if (g == "metropolis") return BalanceFunction::metropolis;
  if (g == "barker") return BalanceFunction::barker;
  throw InvalidArgument("unknown balance function '" + g + "'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Time-changed Markov process samplers";
  m.attr("__version__") = kToolVersion;

  auto base_error = py::register_exception<Error>(m, "SamplerError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<EnvelopeViolation>(m, "EnvelopeViolation", base_error.ptr());
  py::register_exception<PreconditionViolation>(m, "PreconditionViolation", base_error.ptr());

  py::class_<TargetDensity>(m, "Target")
      .def_property_readonly("dim", [](const TargetDensity& t) { return t.dim; })
      .def_property_readonly("label", [](const TargetDensity& t) { return t.label; })
      .def("potential", [](const TargetDensity& t, const Vec& x) { return t.potential(x); })
      .def("gradient", [](const TargetDensity& t, const Vec& x) { return t.gradient(x); })
      .def("__repr__", [](const TargetDensity& t) { return "<Target " + t.label + ">"; });

  m.def("gaussian", &gaussian, py::arg("mean"), py::arg("variance"));
  m.def("gaussian_mixture", &gaussian_mixture, py::arg("means"));
  m.def("mixture13", [] { return builtin_target({"mixture13", 2, {}, {}, {}}); });
  m.def("bimodal1d", [] { return builtin_target({"bimodal1d", 1, {}, {}, {}}); });
  m.def("student_t_2d", &student_t_2d_1dof);
  m.def("double_well_1d", &double_well_1d);
  m.def("mixture13_means", &mixture13_means);

  py::class_<SpeedFunction>(m, "Speed")
      .def_property_readonly("label", [](const SpeedFunction& s) { return s.label; })
      .def_property_readonly("lower_bound", [](const SpeedFunction& s) { return s.lower_bound; })
      .def("__call__", [](const SpeedFunction& s, const Vec& x) { return s.value(x); })
      .def("__repr__", [](const SpeedFunction& s) { return "<Speed " + s.label + ">"; });

  m.def("constant_speed", &constant_speed, py::arg("c") = 1.0);
  m.def("exp_alpha_speed", &exp_alpha_potential, py::arg("target"), py::arg("alpha"),
        "s = exp(alpha U)");
  m.def("one_plus_norm_sq_speed", &one_plus_norm_sq_pow, py::arg("p"), "s = (1 + |x|^2)^p");
  m.def("ball_jacobian_speed", &ball_jacobian_speed, py::arg("d"));
  m.def("stereographic_speed", &stereographic_speed, py::arg("d"));

  py::class_<PathSkeleton, PathPtr>(m, "Path")
      .def_property_readonly("dim", &PathSkeleton::dim)
      .def_property_readonly("dynamics",
                             [](const PathSkeleton& p) { return std::string(to_string(p.dynamics())); })
      .def_property_readonly("horizon", &PathSkeleton::horizon)
      .def_property_readonly("event_count", &PathSkeleton::event_count)
      .def("__len__", &PathSkeleton::size)
      .def_property_readonly("times",
                             [](const PathSkeleton& p) {
                               return py::array_t<double>(static_cast<py::ssize_t>(p.size()),
                                                          p.times().data());
                             })
      .def_property_readonly("kinds",
                             [](const PathSkeleton& p) {
                               std::vector<std::string> k;
                               for (std::size_t i = 0; i < p.size(); ++i) {
                                 k.emplace_back(to_string(p.kind(i)));
                               }
                               return k;
                             })
      .def_property_readonly("positions",
                             [](const PathSkeleton& p) {
                               Eigen::MatrixXd out(p.size(), p.dim());
                               for (std::size_t i = 0; i < p.size(); ++i) {
                                 out.row(static_cast<Eigen::Index>(i)) = p.position_after(i);
                               }
                               return out;
                             },
                             "state after each event, one row per record")
      .def_property_readonly("velocities",
                             [](const PathSkeleton& p) {
                               Eigen::MatrixXd out(p.size(), p.dim());
                               for (std::size_t i = 0; i < p.size(); ++i) {
                                 out.row(static_cast<Eigen::Index>(i)) = p.velocity_after(i);
                               }
                               return out;
                             })
      .def("position_at", &PathSkeleton::position_at, py::arg("t"))
      .def(
          "positions_at",
          [](const PathSkeleton& p, const std::vector<double>& ts) {
            Eigen::MatrixXd out(ts.size(), p.dim());
            SkeletonCursor cursor(p);
            for (std::size_t i = 0; i < ts.size(); ++i) {
              if (i > 0 && ts[i] < ts[i - 1]) {
                out.row(static_cast<Eigen::Index>(i)) = p.position_at(ts[i]);
              } else {
                out.row(static_cast<Eigen::Index>(i)) = cursor.position_at(ts[i]);
              }
            }
            return out;
          },
          py::arg("times"))
      .def("to_csv", [](const PathSkeleton& p) { return to_csv(skeleton_table(p)); });

  py::class_<TimeChanged>(m, "TimeChangedPath")
      .def_readonly("path", &TimeChanged::path)
      .def_readonly("base", &TimeChanged::base)
      .def_property_readonly("stats", [](const TimeChanged& t) { return stats_dict(t.stats); })
      .def("base_time", [](const TimeChanged& t, double s) { return t.warp->base_time(s); },
           py::arg("t"), "r(t)")
      .def("changed_time", [](const TimeChanged& t, double u) { return t.warp->changed_time(u); },
           py::arg("u"), "r^{-1}(u)")
      .def("mu_s", [](const TimeChanged& t) { return mu_s_estimate(*t.warp); })
      .def(
          "normalizing_constant",
          [](const TimeChanged& t, double integral_s) {
            return normalizing_constant(*t.warp, integral_s);
          },
          py::arg("integral_s"), "Z from I_s = int s exp(-U)");

  m.def(
      "zigzag",
      [](const TargetDensity& target, const SpeedFunction& speed, const Vec& x0, double horizon,
         std::uint64_t seed, std::optional<Vec> v0, double refresh, bool time_changed,
         std::uint64_t stream) -> py::object {
        ZigZagConfig c;
        c.target = target;
        c.speed = speed;
        c.x0 = x0;
        c.v0 = initial_velocity(v0, target.dim, false);
        c.horizon = horizon;
        if (refresh > 0.0) c.refresh.assign(target.dim, refresh);
        RngStream rng(seed, stream);
        if (time_changed) return py::cast(wrap(simulate_timechanged_zigzag(c, rng)));
        return py::cast(PathPtr(std::make_shared<PathSkeleton>(simulate_zigzag(c, rng).skeleton)));
      },
      py::arg("target"), py::arg("speed"), py::arg("x0"), py::arg("horizon"), py::arg("seed") = 1,
      py::arg("v0") = py::none(), py::arg("refresh") = 0.0, py::arg("time_changed") = true,
      py::arg("stream") = 0,
      "Zig-Zag sampler. time_changed=True returns the time-changed path X with its base path; "
      "otherwise the process targeting mu~ = s mu is returned as a Path.");

  m.def(
      "bps",
      [](const TargetDensity& target, const SpeedFunction& speed, const Vec& x0, double horizon,
         std::uint64_t seed, std::optional<Vec> v0, double refresh, bool time_changed,
         std::uint64_t stream) -> py::object {
        BpsConfig c;
        c.target = target;
        c.speed = speed;
        c.x0 = x0;
        c.v0 = initial_velocity(v0, target.dim, true);
        c.horizon = horizon;
        c.refresh_rate = refresh;
        RngStream rng(seed, stream);
        if (time_changed) return py::cast(wrap(simulate_timechanged_bps(c, rng)));
        return py::cast(PathPtr(std::make_shared<PathSkeleton>(simulate_bps(c, rng).skeleton)));
      },
      py::arg("target"), py::arg("speed"), py::arg("x0"), py::arg("horizon"), py::arg("seed") = 1,
      py::arg("v0") = py::none(), py::arg("refresh") = 1.0, py::arg("time_changed") = true,
      py::arg("stream") = 0);

  m.def(
      "langevin",
      [](const TargetDensity& target, const SpeedFunction& speed, const Vec& x0, double horizon,
         double step, bool underdamped, std::uint64_t seed, std::uint64_t stream) {
        SdeConfig c;
        c.target = target;
        c.speed = speed;
        c.x0 = x0;
        c.v0 = Vec::Zero(x0.size());
        c.horizon = horizon;
        c.step = step;
        c.kind = underdamped ? SdeKind::underdamped : SdeKind::overdamped;
        RngStream rng(seed, stream);
        return PathPtr(std::make_shared<PathSkeleton>(simulate_sde(c, rng)));
      },
      py::arg("target"), py::arg("speed"), py::arg("x0"), py::arg("horizon"),
      py::arg("step") = 1e-3, py::arg("underdamped") = false, py::arg("seed") = 1,
      py::arg("stream") = 0, "Euler-Maruyama discretisation of the time-changed Langevin SDE");

  m.def(
      "algorithm1",
      [](const TargetDensity& target, const SpeedFunction& speed, const Vec& x0,
         std::optional<double> horizon, std::optional<std::uint64_t> n_jumps,
         const std::string& kernel, double sigma, double delta, std::uint64_t seed,
         std::uint64_t stream) {
        if (horizon.has_value() == n_jumps.has_value()) {
          throw InvalidArgument("algorithm1: give exactly one of horizon and n_jumps");
        }
        const auto k = kernel_by_name(kernel, make_tilted(target, speed), sigma, delta);
        RngStream rng(seed, stream);
        return PathPtr(std::make_shared<PathSkeleton>(
            horizon ? algorithm1(speed, k, x0, *horizon, rng)
                    : algorithm1_jumps(speed, k, x0, *n_jumps, rng)));
      },
      py::arg("target"), py::arg("speed"), py::arg("x0"), py::arg("horizon") = py::none(),
      py::arg("n_jumps") = py::none(), py::arg("kernel") = "rwm", py::arg("sigma") = 1.0,
      py::arg("delta") = 0.1, py::arg("seed") = 1, py::arg("stream") = 0,
      "Jump process with holding rate s and a mu~-invariant kernel (rwm, zz, zz_lifted)");

  using PyObservable = std::function<double(const Vec&)>;
  m.def(
      "direct_average",
      [](const PathSkeleton& path, const PyObservable& f, std::optional<double> horizon,
         std::size_t n_batches) {
        return report_dict(direct_average(path, f, horizon.value_or(path.horizon()), n_batches));
      },
      py::arg("path"), py::arg("f"), py::arg("horizon") = py::none(),
      py::arg("n_batches") = kDefaultBatches);
  m.def(
      "reweighted_average",
      [](const PathSkeleton& base, const PyObservable& f, const SpeedFunction& speed,
         std::optional<double> horizon, std::size_t n_batches) {
        return report_dict(
            reweighted_average(base, f, speed, horizon.value_or(base.horizon()), n_batches));
      },
      py::arg("base"), py::arg("f"), py::arg("speed"), py::arg("horizon") = py::none(),
      py::arg("n_batches") = kDefaultBatches);
  m.def(
      "discretized_average",
      [](const PathSkeleton& path, const PyObservable& f, double delta, std::size_t n_batches) {
        return report_dict(discretized_average(path, f, delta, n_batches));
      },
      py::arg("path"), py::arg("f"), py::arg("delta"), py::arg("n_batches") = kDefaultBatches);

  m.def("crossing_probability", &crossing_probability, py::arg("target"), py::arg("speed"),
        py::arg("x0"), py::arg("x1"));

  m.def(
      "exact_stationary",
      [](const std::vector<double>& weights, const std::vector<std::vector<std::size_t>>& neighbors,
         const std::vector<double>& speed, const std::string& g) {
        DiscreteChainSpec spec{weights, neighbors, speed, balance_by_name(g)};
        return exact_stationary(spec);
      },
      py::arg("weights"), py::arg("neighbors"), py::arg("speed"), py::arg("g") = "metropolis");
  m.def(
      "discrete_occupation",
      [](const std::vector<double>& weights, const std::vector<std::vector<std::size_t>>& neighbors,
         const std::vector<double>& speed, const std::string& g, std::size_t x0, double horizon,
         std::uint64_t seed) {
        DiscreteChainSpec spec{weights, neighbors, speed, balance_by_name(g)};
        RngStream rng(seed, 0);
        auto occ = occupation_times(discrete_sampler(spec, x0, horizon, rng), spec.size());
        for (auto& o : occ) o /= horizon;
        return occ;
      },
      py::arg("weights"), py::arg("neighbors"), py::arg("speed"), py::arg("g") = "metropolis",
      py::arg("x0") = 0, py::arg("horizon") = 1e4, py::arg("seed") = 1,
      "Fraction of [0, horizon] spent in each state by the discrete jump process");

  m.def(
      "ball_map",
      [](const Vec& y) { return ball_map(static_cast<std::size_t>(y.size())).forward(y); },
      py::arg("y"), "H(y) = y / sqrt(1 - |y|^2)");
  m.def(
      "ball_map_inverse",
      [](const Vec& x) { return ball_map(static_cast<std::size_t>(x.size())).inverse(x); },
      py::arg("x"));
  m.def("ball_map_jacobian_det", &ball_map_exact_jacobian_det, py::arg("y"));
  m.def(
      "ball_samples",
      [](std::size_t d, std::size_t n, std::uint64_t seed) {
        RngStream rng(seed, 0);
        const auto ys = ball_rejection_samples(d, n, rng);
        Eigen::MatrixXd out(n, d);
        for (std::size_t i = 0; i < n; ++i) out.row(static_cast<Eigen::Index>(i)) = ys[i];
        return out;
      },
      py::arg("d"), py::arg("n"), py::arg("seed") = 1,
      "Exact samples of the law on the unit ball whose image under H is N(0, I)");

  m.def("experiment_names", &experiment_names);
  m.def(
      "default_config", [](const std::string& name) { return from_json(default_config(name)); },
      py::arg("name"));
  m.def(
      "resolve_config", [](const py::object& raw) { return from_json(resolve_config(to_json(raw))); },
      py::arg("config"));
  m.def(
      "run_experiment",
      [](const py::object& raw, std::optional<std::string> out_dir) {
        const Json config = resolve_config(to_json(raw));
        Artifacts artifacts;
        {
          py::gil_scoped_release release;
          run_experiment(config, artifacts);
          if (out_dir) {
            write_artifacts(*out_dir, artifacts, make_manifest(config, artifacts, "ok"));
          }
        }
        py::dict files;
        for (const auto& [name, contents] : artifacts.files) {
          files[py::str(name)] = py::str(contents);
        }
        py::dict result;
        result["config"] = from_json(config);
        result["summary"] = from_json(artifacts.summary);
        result["files"] = files;
        return result;
      },
      py::arg("config"), py::arg("out_dir") = py::none(),
      "Runs an experiment config (missing keys take defaults). Returns the resolved config, the "
      "summary and the emitted files; writes them with a manifest when out_dir is given.");
}
