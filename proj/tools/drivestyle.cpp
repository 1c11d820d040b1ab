// Command-line front end: SMPC demonstrations, features, weight learning,
// reproduction, comparison and plot series.

#include "drivestyle/analysis.hpp"
#include "drivestyle/features.hpp"
#include "drivestyle/learner.hpp"
#include "drivestyle/scenario.hpp"
#include "drivestyle/smpc.hpp"
#include "drivestyle/trajectory_io.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace drivestyle;

namespace {

enum ExitCode { kOk = 0, kRuntime = 1, kUsage = 2, kIo = 3, kFormat = 4, kScenario = 5 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string scenario;
  std::string tv;
};

ScenarioConfig load_config(const Common& c) {
  if (c.scenario.empty()) return ScenarioConfig{};
  return load_scenario(c.scenario);
}

SplineTrajectory load_trajectory(const std::string& path) { return to_spline(read_trajectory(path)); }

/// Explicit TV file, or the scenario's constant-velocity TV on the EV's grid.
SplineTrajectory load_tv(const Common& c, const ScenarioConfig& config, const SplineTrajectory& ev) {
  if (!c.tv.empty()) return load_trajectory(c.tv);
  const double Ts = config.smpc.Ts;
  const double n = (ev.end_time() - ev.start_time()) / Ts;
  if (std::abs(ev.start_time()) > 1e-9 || std::abs(n - std::round(n)) > 1e-6) {
    throw FormatError("trajectory grid does not match the scenario sample time; pass --tv");
  }
  return scripted_tv_trajectory(config, static_cast<int>(std::lround(n)) + 1);
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    write_text(out, text);
  }
}

void apply_feature_set(LearnerSettings& settings, int features) {
  if (features == 6) {
    settings.feature_set = FeatureSet::basic;
  } else if (features == 10) {
    settings.feature_set = FeatureSet::reactive;
  } else if (features != 0) {
    throw UsageError("--features must be 6 or 10");
  }
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("--scenario", c.scenario, "Scenario file (built-in defaults when omitted)");
  app->add_option("--tv", c.tv, "Target-vehicle trajectory CSV (default: scripted from the scenario)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Driving-style identification: SMPC demonstrations and reaction-aware IRL"};
  app.require_subcommand(1);

  // demo
  Common demo_c;
  std::string demo_out = "demo.csv";
  std::string demo_tv_out;
  std::optional<double> demo_risk;
  auto* demo = app.add_subcommand("demo", "Run the SMPC closed loop and write the EV trajectory");
  add_common(demo, demo_c);
  demo->add_option("--out", demo_out, "EV trajectory CSV")->capture_default_str();
  demo->add_option("--tv-out", demo_tv_out, "Also write the TV trajectory");
  demo->add_option("--risk", demo_risk, "Override smpc.risk");

  // features
  Common feat_c;
  std::string feat_traj;
  std::string feat_out;
  bool feat_unscaled = false;
  auto* features = app.add_subcommand("features", "Feature vector of a trajectory");
  add_common(features, feat_c);
  features->add_option("--trajectory", feat_traj, "EV trajectory CSV")->required();
  features->add_option("--out", feat_out, "Feature CSV (default: stdout)");
  features->add_flag("--unscaled", feat_unscaled, "Skip the scaling coefficients");

  // learn
  Common learn_c;
  std::string learn_demo;
  std::string learn_dir = ".";
  int learn_features = 0;
  bool learn_freeze = false;
  auto* learn_cmd = app.add_subcommand("learn", "Learn feature weights from a demonstration");
  add_common(learn_cmd, learn_c);
  learn_cmd->add_option("--demo", learn_demo, "Demonstration trajectory CSV")->required();
  learn_cmd->add_option("--features", learn_features, "6 or 10 (default: scenario)");
  learn_cmd->add_option("--out-dir", learn_dir, "Writes theta.csv, history.csv, reproduced.csv")
      ->capture_default_str();
  learn_cmd->add_flag("--freeze-trigger", learn_freeze, "Reuse the demonstration's trigger time");

  // reproduce
  Common rep_c;
  std::string rep_theta;
  std::string rep_init;
  std::string rep_out = "reproduced.csv";
  int rep_features = 0;
  auto* reproduce = app.add_subcommand("reproduce", "Optimize a trajectory for given weights");
  add_common(reproduce, rep_c);
  reproduce->add_option("--theta", rep_theta, "Weight CSV")->required();
  reproduce->add_option("--init", rep_init, "Initial trajectory CSV (usually the demonstration)")
      ->required();
  reproduce->add_option("--features", rep_features, "6 or 10 (default: scenario)");
  reproduce->add_option("--out", rep_out, "Trajectory CSV")->capture_default_str();

  // compare
  Common cmp_c;
  std::string cmp_a;
  std::string cmp_b;
  std::optional<double> cmp_xmin;
  std::optional<double> cmp_xmax;
  std::string cmp_out;
  auto* compare = app.add_subcommand("compare", "Lateral gap and feature distance of two trajectories");
  add_common(compare, cmp_c);
  compare->add_option("--a", cmp_a, "First trajectory CSV")->required();
  compare->add_option("--b", cmp_b, "Second trajectory CSV")->required();
  compare->add_option("--x-min", cmp_xmin, "Window start [m]");
  compare->add_option("--x-max", cmp_xmax, "Window end [m]");
  compare->add_option("--out", cmp_out, "Metrics CSV (default: stdout)");

  // plot-data
  Common plot_c;
  std::string plot_series;
  std::string plot_demo;
  std::vector<std::string> plot_reproduced;
  std::string plot_history;
  std::string plot_out;
  auto* plot = app.add_subcommand("plot-data", "CSV series for plotting");
  add_common(plot, plot_c);
  plot->add_option("--series", plot_series, "xy | se | kinematics | epsilon")
      ->required()
      ->check(CLI::IsMember({"xy", "se", "kinematics", "epsilon"}));
  plot->add_option("--demo", plot_demo, "Demonstration trajectory CSV");
  plot->add_option("--reproduced", plot_reproduced, "Reproduced trajectory CSV (repeatable)");
  plot->add_option("--history", plot_history, "Learning history CSV");
  plot->add_option("--out", plot_out, "Output CSV (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (*demo) {
      ScenarioConfig config = load_config(demo_c);
      if (demo_risk) {
        config.smpc.ellipse.p = *demo_risk;
        validate(config);
      }
      const DemonstrationRecord rec = run_closed_loop(config);
      write_trajectory(demo_out, ev_samples(rec));
      if (!demo_tv_out.empty()) write_trajectory(demo_tv_out, tv_samples(rec));
      const SplineTrajectory ev = states_to_control_points(rec.ev_states, rec.Ts);
      const SplineTrajectory tv = states_to_control_points(rec.tv_states, rec.Ts);
      const TriggerInfo trig = make_feature_model(config, tv).trigger_for(ev);
      int relaxed = 0;
      for (auto s : rec.statuses) relaxed += s == SolverStatus::infeasible_relaxed;
      std::printf("samples=%zu triggered=%d t_trg=%s final_y=%s relaxed_steps=%d\n",
                  rec.ev_states.size(), trig.triggered ? 1 : 0,
                  trig.triggered ? format_number(trig.t_trg).c_str() : "nan",
                  format_number(rec.ev_states.back().y).c_str(), relaxed);
    } else if (*features) {
      const ScenarioConfig config = load_config(feat_c);
      const SplineTrajectory ev = load_trajectory(feat_traj);
      FeatureModel model = make_feature_model(config, load_tv(feat_c, config, ev));
      if (feat_unscaled) model.scaling = FeatureScaling{};
      FeatureDiagnostics diag;
      const TriggerInfo trig = model.trigger_for(ev);
      const FeatureVector f = model.scaled(ev, trig, &diag);
      emit(feat_out, format_csv(feature_table(f, trig, diag)));
    } else if (*learn_cmd) {
      ScenarioConfig config = load_config(learn_c);
      apply_feature_set(config.learner, learn_features);
      if (learn_freeze) config.learner.freeze_trigger = true;
      const SplineTrajectory demo_traj = load_trajectory(learn_demo);
      const FeatureModel model = make_feature_model(config, load_tv(learn_c, config, demo_traj));
      const LearningResult res = learn(demo_traj, model, config.learner);
      fs::create_directories(learn_dir);
      write_text(fs::path(learn_dir) / "theta.csv", format_weights(res.theta_star));
      write_csv(fs::path(learn_dir) / "history.csv", history_table(res.history));
      write_trajectory(fs::path(learn_dir) / "reproduced.csv", spline_samples(res.reproduced));
      const LearningStep& best = res.history[static_cast<std::size_t>(res.best_iteration - 1)];
      std::printf("iterations=%zu terminated=%d best_iteration=%d best_epsilon=%s\n",
                  res.history.size(), res.terminated ? 1 : 0, res.best_iteration,
                  format_number(best.epsilon).c_str());
      if (!res.terminated) std::fprintf(stderr, "warning: iteration cap reached before the termination rule\n");
    } else if (*reproduce) {
      ScenarioConfig config = load_config(rep_c);
      apply_feature_set(config.learner, rep_features);
      const WeightVector theta = parse_weights(read_text(rep_theta));
      const SplineTrajectory init = load_trajectory(rep_init);
      const FeatureModel model = make_feature_model(config, load_tv(rep_c, config, init));
      const InnerResult r = optimize_trajectory(theta, init, model, config.learner);
      write_trajectory(rep_out, spline_samples(r.trajectory));
      std::printf("iterations=%d converged=%d cost=%s\n", r.iterations, r.converged ? 1 : 0,
                  format_number(r.final_cost).c_str());
    } else if (*compare) {
      if (cmp_xmin.has_value() != cmp_xmax.has_value()) {
        throw UsageError("--x-min and --x-max go together");
      }
      const SplineTrajectory a = load_trajectory(cmp_a);
      const SplineTrajectory b = load_trajectory(cmp_b);
      std::optional<XWindow> window;
      if (cmp_xmin) window = XWindow{*cmp_xmin, *cmp_xmax};
      std::optional<FeatureModel> model;
      if (!cmp_c.scenario.empty() || !cmp_c.tv.empty()) {
        const ScenarioConfig config = load_config(cmp_c);
        model = make_feature_model(config, load_tv(cmp_c, config, a));
      }
      const ComparisonMetrics m = compare_trajectories(a, b, window, model ? &*model : nullptr);
      CsvTable t;
      t.header = {"max_gap", "rmse", "feature_l2", "samples"};
      t.rows.push_back({m.max_gap, m.rmse, m.feature_l2, static_cast<double>(m.samples)});
      emit(cmp_out, format_csv(t));
    } else if (*plot) {
      CsvTable table;
      if (plot_series == "epsilon") {
        if (plot_history.empty()) throw UsageError("--series epsilon needs --history");
        table = epsilon_series(history_from_table(read_csv(plot_history)));
      } else {
        if (plot_demo.empty()) throw UsageError("--series " + plot_series + " needs --demo");
        std::vector<NamedTrajectory> trajs{{"demo", load_trajectory(plot_demo)}};
        for (std::size_t i = 0; i < plot_reproduced.size(); ++i) {
          const std::string name = plot_reproduced.size() == 1 ? "reproduced" : "reproduced" + std::to_string(i + 1);
          trajs.emplace_back(name, load_trajectory(plot_reproduced[i]));
        }
        if (plot_series == "xy") {
          table = xy_series(trajs);
        } else if (plot_series == "kinematics") {
          table = kinematics_series(trajs);
        } else {
          const ScenarioConfig config = load_config(plot_c);
          const SplineTrajectory tv = load_tv(plot_c, config, trajs.front().second);
          table = se_series(trajs.front().second, tv, config.smpc.ellipse.l_a, config.smpc.ellipse.l_b);
        }
      }
      emit(plot_out, format_csv(table));
    }
  } catch (const UsageError& e) {
    std::cerr << "error: usage: " << e.what() << '\n';
    return kUsage;
  } catch (const ScenarioError& e) {
    std::cerr << "error: scenario: " << e.what() << '\n';
    return kScenario;
  } catch (const FormatError& e) {
    std::cerr << "error: format: " << e.what() << '\n';
    return kFormat;
  } catch (const IoError& e) {
    std::cerr << "error: io: " << e.what() << '\n';
    return kIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: io: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: runtime: " << e.what() << '\n';
    return kRuntime;
  }
  return kOk;
}
