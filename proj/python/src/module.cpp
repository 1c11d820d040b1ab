#include "drivestyle/analysis.hpp"
#include "drivestyle/dynamics.hpp"
#include "drivestyle/features.hpp"
#include "drivestyle/learner.hpp"
#include "drivestyle/scenario.hpp"
#include "drivestyle/smpc.hpp"
#include "drivestyle/trajectory_io.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <string>

namespace py = pybind11;
using namespace drivestyle;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

// Trajectories cross the boundary as (n, 9) arrays in trajectory-CSV column order.
Array to_array(const std::vector<TrajectorySample>& samples) {
  Array out({static_cast<py::ssize_t>(samples.size()), py::ssize_t{9}});
  auto a = out.mutable_unchecked<2>();
  for (py::ssize_t i = 0; i < a.shape(0); ++i) {
    const auto& s = samples[static_cast<std::size_t>(i)];
    const double row[9] = {s.t, s.state.x, s.state.y, s.state.phi, s.state.v, s.vx, s.vy, s.ax, s.ay};
    for (py::ssize_t j = 0; j < 9; ++j) a(i, j) = row[j];
  }
  return out;
}

std::vector<TrajectorySample> from_array(const Array& arr) {
  if (arr.ndim() != 2 || arr.shape(1) != 9) {
    throw py::value_error("trajectory must be an (n, 9) array: t,x,y,phi,v,vx,vy,ax,ay");
  }
  // Reuse the CSV validation (finite values, increasing uniform t).
  CsvTable table;
  table.header = kTrajectoryColumns;
  auto a = arr.unchecked<2>();
  for (py::ssize_t i = 0; i < a.shape(0); ++i) {
    std::vector<double> row(9);
    for (py::ssize_t j = 0; j < 9; ++j) row[static_cast<std::size_t>(j)] = a(i, j);
    table.rows.push_back(std::move(row));
  }
  return parse_trajectory(format_csv(table));
}

SplineTrajectory spline_of(const Array& arr) { return to_spline(from_array(arr)); }

SplineTrajectory tv_for(const ScenarioConfig& config, const SplineTrajectory& ev,
                        const std::optional<Array>& tv) {
  if (tv) return spline_of(*tv);
  const double n = (ev.end_time() - ev.start_time()) / config.smpc.Ts;
  if (std::abs(ev.start_time()) > 1e-9 || std::abs(n - std::round(n)) > 1e-6) {
    throw py::value_error("trajectory grid does not match the scenario sample time; pass tv");
  }
  return scripted_tv_trajectory(config, static_cast<int>(std::lround(n)) + 1);
}

void set_features(LearnerSettings& s, int features) {
  if (features == 6) {
    s.feature_set = FeatureSet::basic;
  } else if (features == 10) {
    s.feature_set = FeatureSet::reactive;
  } else if (features != 0) {
    throw py::value_error("features must be 6 or 10");
  }
}

py::dict named(const FeatureVector& f) {
  py::dict d;
  for (std::size_t i = 0; i < kFeatureCount; ++i) d[py::str(std::string(kFeatureNames[i]))] = f[i];
  return d;
}

WeightVector weights_of(const py::dict& d) {
  WeightVector w;
  for (const auto& [key, value] : d) {
    const auto name = key.cast<std::string>();
    bool found = false;
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      if (name == kFeatureNames[i]) {
        w[i] = value.cast<double>();
        found = true;
      }
    }
    if (!found) throw py::key_error("unknown feature '" + name + "'");
  }
  return w;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "SMPC demonstrations, spline features and reaction-aware weight learning";

  py::register_exception<ScenarioError>(m, "ScenarioError", PyExc_ValueError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  m.attr("TRAJECTORY_COLUMNS") = kTrajectoryColumns;
  py::list names;
  for (auto n : kFeatureNames) names.append(std::string(n));
  m.attr("FEATURE_NAMES") = names;

  py::class_<ScenarioConfig>(m, "Scenario")
      .def(py::init<>(), "Built-in defaults")
      .def_static("from_file", [](const std::string& path) { return load_scenario(path); })
      .def_static("from_text", &parse_scenario)
      .def_property(
          "risk", [](const ScenarioConfig& c) { return c.smpc.ellipse.p; },
          [](ScenarioConfig& c, double p) {
            ScenarioConfig next = c;
            next.smpc.ellipse.p = p;
            validate(next);
            c = next;
          })
      .def_property_readonly("Ts", [](const ScenarioConfig& c) { return c.smpc.Ts; })
      .def_property_readonly("horizon", [](const ScenarioConfig& c) { return c.smpc.horizon; })
      .def_property_readonly("sample_count", &ScenarioConfig::sample_count)
      .def_property_readonly("target_lane", [](const ScenarioConfig& c) { return c.lane.l_target; });

  m.def(
      "step",
      [](std::array<double, 4> x, std::array<double, 2> u, double dt, double l_f, double l_r) {
        const VehicleState s = step({x[0], x[1], x[2], x[3]}, {u[0], u[1]}, dt, {l_f, l_r});
        return std::array<double, 4>{s.x, s.y, s.phi, s.v};
      },
      py::arg("state"), py::arg("input"), py::arg("dt"), py::arg("l_f") = 2.0, py::arg("l_r") = 2.0,
      "One explicit-Euler step of the kinematic bicycle; state [x, y, phi, v], input [a, delta].");

  m.def("normal_quantile", &normal_quantile, py::arg("p"));

  m.def(
      "run_demo",
      [](const ScenarioConfig& config) {
        DemonstrationRecord rec;
        {
          py::gil_scoped_release release;
          rec = run_closed_loop(config);
        }
        py::list statuses;
        for (auto s : rec.statuses) statuses.append(std::string(to_string(s)));
        py::dict out;
        out["ev"] = to_array(ev_samples(rec));
        out["tv"] = to_array(tv_samples(rec));
        out["statuses"] = statuses;
        return out;
      },
      py::arg("scenario"), "Closed-loop SMPC lane change; returns ev, tv arrays and solver statuses.");

  m.def(
      "features",
      [](const Array& ev_arr, const ScenarioConfig& config, const std::optional<Array>& tv, bool scaled) {
        const SplineTrajectory ev = spline_of(ev_arr);
        FeatureModel model = make_feature_model(config, tv_for(config, ev, tv));
        if (!scaled) model.scaling = FeatureScaling{};
        FeatureDiagnostics diag;
        const TriggerInfo trig = model.trigger_for(ev);
        py::dict out = named(model.scaled(ev, trig, &diag));
        out["triggered"] = trig.triggered;
        out["t_trg"] = trig.triggered ? trig.t_trg : std::nan("");
        out["gap_clamped"] = diag.gap_clamped;
        return out;
      },
      py::arg("ev"), py::arg("scenario"), py::arg("tv") = py::none(), py::arg("scaled") = true);

  m.def(
      "learn",
      [](const Array& demo_arr, const ScenarioConfig& cfg, const std::optional<Array>& tv, int features) {
        ScenarioConfig config = cfg;
        set_features(config.learner, features);
        const SplineTrajectory demo = spline_of(demo_arr);
        const FeatureModel model = make_feature_model(config, tv_for(config, demo, tv));
        LearningResult res;
        {
          py::gil_scoped_release release;
          res = learn(demo, model, config.learner);
        }
        py::list eps;
        for (const auto& s : res.history) eps.append(s.epsilon);
        py::dict out;
        out["theta"] = named(res.theta_star);
        out["reproduced"] = to_array(spline_samples(res.reproduced));
        out["epsilon"] = eps;
        out["best_iteration"] = res.best_iteration;
        out["terminated"] = res.terminated;
        return out;
      },
      py::arg("demo"), py::arg("scenario"), py::arg("tv") = py::none(), py::arg("features") = 0,
      "Learns feature weights; features = 6 or 10 overrides the scenario's set.");

  m.def(
      "reproduce",
      [](const py::dict& theta, const Array& init_arr, const ScenarioConfig& cfg,
         const std::optional<Array>& tv, int features) {
        ScenarioConfig config = cfg;
        set_features(config.learner, features);
        const WeightVector w = weights_of(theta);
        const SplineTrajectory init = spline_of(init_arr);
        const FeatureModel model = make_feature_model(config, tv_for(config, init, tv));
        InnerResult r;
        {
          py::gil_scoped_release release;
          r = optimize_trajectory(w, init, model, config.learner);
        }
        py::dict out;
        out["trajectory"] = to_array(spline_samples(r.trajectory));
        out["cost"] = r.final_cost;
        out["iterations"] = r.iterations;
        out["converged"] = r.converged;
        return out;
      },
      py::arg("theta"), py::arg("init"), py::arg("scenario"), py::arg("tv") = py::none(),
      py::arg("features") = 0);

  m.def(
      "compare",
      [](const Array& a, const Array& b, std::optional<double> x_min, std::optional<double> x_max) {
        if (x_min.has_value() != x_max.has_value()) throw py::value_error("x_min and x_max go together");
        std::optional<XWindow> window;
        if (x_min) window = XWindow{*x_min, *x_max};
        const ComparisonMetrics c = compare_trajectories(spline_of(a), spline_of(b), window);
        py::dict out;
        out["max_gap"] = c.max_gap;
        out["rmse"] = c.rmse;
        out["samples"] = c.samples;
        return out;
      },
      py::arg("a"), py::arg("b"), py::arg("x_min") = py::none(), py::arg("x_max") = py::none(),
      "Lateral gap of two trajectories at equal longitudinal position.");

  m.def(
      "read_trajectory", [](const std::string& path) { return to_array(read_trajectory(path)); },
      py::arg("path"));
  m.def(
      "write_trajectory",
      [](const std::string& path, const Array& arr) { write_trajectory(path, from_array(arr)); },
      py::arg("path"), py::arg("trajectory"));
}
