#include "drivestyle/analysis.hpp"
#include "drivestyle/trajectory_io.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

namespace drivestyle {
namespace {


TEST(TrajectoryIo, DemonstrationRoundTripIsBitExact) {
  const auto samples = ev_samples(testing::shipped_demo());
  const std::string text = format_trajectory(samples);
  const auto back = parse_trajectory(text);
  ASSERT_EQ(back.size(), 31u);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    EXPECT_EQ(back[i].t, samples[i].t);
    EXPECT_EQ(back[i].state, samples[i].state);
    EXPECT_EQ(back[i].vx, samples[i].vx);
    EXPECT_EQ(back[i].vy, samples[i].vy);
    EXPECT_EQ(back[i].ax, samples[i].ax);
    EXPECT_EQ(back[i].ay, samples[i].ay);
  }
  EXPECT_EQ(format_trajectory(back), text);
  EXPECT_EQ(text.substr(0, text.find('\n')), "t,x,y,phi,v,vx,vy,ax,ay");
}

TEST(TrajectoryIo, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "drivestyle_io_test.csv";
  const auto samples = tv_samples(testing::shipped_demo());
  write_trajectory(path, samples);
  const auto back = read_trajectory(path);
  std::filesystem::remove(path);
  ASSERT_EQ(back.size(), samples.size());
  EXPECT_EQ(to_spline(back).control_points(), to_spline(samples).control_points());
  EXPECT_NEAR(sample_time(back), 0.2, 1e-15);
}

TEST(TrajectoryIo, SplineSamplesRoundTrip) {
  std::mt19937_64 rng(3);
  const SplineTrajectory s = testing::random_spline(rng, 8, 0.2, 10.0);
  const SplineTrajectory back = to_spline(parse_trajectory(format_trajectory(spline_samples(s))));
  EXPECT_EQ(back.control_points(), s.control_points());
  EXPECT_EQ(back.knots(), s.knots());
}

TEST(TrajectoryIo, DecreasingTimeRejected) {
  const std::string text = "t,x,y,phi,v,vx,vy,ax,ay\n0,0,0,0,1,1,0,0,0\n0.2,0.2,0,0,1,1,0,0,0\n"
                           "0.1,0.4,0,0,1,1,0,0,0\n";
  try {
    parse_trajectory(text);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.row(), 3u);
    EXPECT_NE(std::string(e.what()).find("row 3"), std::string::npos);
  }
}

TEST(TrajectoryIo, NonUniformSpacingRejected) {
  const std::string text = "t,x,y,phi,v,vx,vy,ax,ay\n0,0,0,0,1,1,0,0,0\n0.2,0.2,0,0,1,1,0,0,0\n"
                           "0.5,0.4,0,0,1,1,0,0,0\n";
  EXPECT_THROW(parse_trajectory(text), FormatError);
}

TEST(TrajectoryIo, MissingColumnNamed) {
  const std::string text = "t,x,y,phi,v,vx,ax,ay\n0,0,0,0,1,1,0,0\n0.2,0.2,0,0,1,1,0,0\n";
  try {
    parse_trajectory(text);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("'vy'"), std::string::npos);
  }
}

TEST(TrajectoryIo, MalformedRowNamed) {
  std::string text = format_trajectory(ev_samples(testing::shipped_demo()));
  const auto second_row = text.find('\n', text.find('\n') + 1) + 1;
  text.insert(second_row, "0.1,abc,0,0,0,0,0,0,0\n");
  try {
    parse_trajectory(text);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.row(), 2u);
    EXPECT_NE(std::string(e.what()).find("'x'"), std::string::npos);
  }
  EXPECT_THROW(parse_trajectory("t,x,y,phi,v,vx,vy,ax,ay\n0,0,0,0,1,1,0,0\n"), FormatError);
  EXPECT_THROW(parse_trajectory(""), FormatError);
}

TEST(FeatureIo, RoundTrip) {
  FeatureVector f;
  for (std::size_t i = 0; i < kFeatureCount; ++i) f[i] = std::sqrt(2.0) * static_cast<double>(i) + 1e-17;
  EXPECT_EQ(parse_features(format_features(f)), f);
  EXPECT_EQ(parse_weights(format_weights(f)), f);
  const CsvTable t = feature_table(f, {true, 2.8, 4.8}, {});
  EXPECT_EQ(parse_features(format_csv(t)), f);
  EXPECT_EQ(t.rows[0][t.column("t_trg")], 2.8);
}

TEST(HistoryIo, RoundTrip) {
  std::vector<LearningStep> history(3);
  for (int i = 0; i < 3; ++i) {
    history[static_cast<std::size_t>(i)].iteration = i + 1;
    history[static_cast<std::size_t>(i)].epsilon = 1.0 / (i + 3);
    history[static_cast<std::size_t>(i)].theta = FeatureVector::filled(0.1 * i);
    history[static_cast<std::size_t>(i)].features = FeatureVector::filled(1.0 / 7.0 * i);
  }
  const auto back = history_from_table(parse_csv(format_csv(history_table(history))));
  ASSERT_EQ(back.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back[i].iteration, history[i].iteration);
    EXPECT_EQ(back[i].epsilon, history[i].epsilon);
    EXPECT_EQ(back[i].theta, history[i].theta);
    EXPECT_EQ(back[i].features, history[i].features);
  }
  const CsvTable t = history_table(history);
  EXPECT_EQ(t.header[5], "theta_ax");
  EXPECT_EQ(t.header[15], "f_ax");
}

TEST(Compare, IdenticalTrajectories) {
  const SplineTrajectory ev = states_to_control_points(testing::shipped_demo().ev_states, 0.2);
  const ComparisonMetrics m = compare_trajectories(ev, ev, XWindow{150, 220});
  EXPECT_EQ(m.max_gap, 0.0);
  EXPECT_EQ(m.rmse, 0.0);
  EXPECT_GT(m.samples, 0u);
}

TEST(Compare, ConstantLateralOffset) {
  const SplineTrajectory ev = states_to_control_points(testing::shipped_demo().ev_states, 0.2);
  auto points = ev.control_points();
  for (auto& c : points) c.ry += 0.3;
  const SplineTrajectory shifted = ev.with_control_points(points);
  const ComparisonMetrics m = compare_trajectories(ev, shifted);
  EXPECT_NEAR(m.max_gap, 0.3, 1e-12);
  EXPECT_NEAR(m.rmse, 0.3, 1e-12);
  EXPECT_TRUE(std::isnan(m.feature_l2));
}

TEST(Compare, FeatureDistanceWithModel) {
  const auto& r = testing::shipped_demo();
  const SplineTrajectory ev = states_to_control_points(r.ev_states, 0.2);
  const FeatureModel model =
      make_feature_model(testing::shipped_config(), states_to_control_points(r.tv_states, 0.2));
  EXPECT_EQ(compare_trajectories(ev, ev, std::nullopt, &model).feature_l2, 0.0);
}

TEST(Compare, DisjointRangesRejected) {
  const SplineTrajectory a = testing::straight_line(0, 0, 10, 0, 1, 5);
  const SplineTrajectory b = testing::straight_line(100, 0, 10, 0, 1, 5);
  EXPECT_THROW(compare_trajectories(a, b), std::invalid_argument);
  EXPECT_THROW(compare_trajectories(a, a, XWindow{500, 600}), std::invalid_argument);
}

TEST(LateralAtX, InterpolatesMonotoneMotion) {
  const SplineTrajectory a = testing::straight_line(0, 1.5, 10, 0, 1, 5);
  EXPECT_NEAR(*lateral_at_x(a, 3.3), 1.5, 1e-12);
  EXPECT_FALSE(lateral_at_x(a, 11.0).has_value());
}

TEST(Series, SeMatchesDirectEvaluation) {
  const auto& r = testing::shipped_demo();
  const SplineTrajectory ev = states_to_control_points(r.ev_states, 0.2);
  const SplineTrajectory tv = states_to_control_points(r.tv_states, 0.2);
  const CsvTable t = se_series(ev, tv, 15, 3);
  ASSERT_EQ(t.rows.size(), 31u);
  for (std::size_t k = 0; k < t.rows.size(); ++k) {
    const double dx = r.ev_states[k].x - r.tv_states[k].x;
    const double dy = r.ev_states[k].y - r.tv_states[k].y;
    EXPECT_NEAR(t.rows[k][2], dx * dx / 225.0 + dy * dy / 9.0, 1e-12);
  }
}

TEST(LateralRms, ZeroForIdenticalTrajectories) {
  const SplineTrajectory ev = states_to_control_points(testing::shipped_demo().ev_states, 0.2);
  const LateralRms r = lateral_rms(ev, ev);
  EXPECT_EQ(r.velocity, 0.0);
  EXPECT_EQ(r.acceleration, 0.0);
  EXPECT_EQ(lateral_rms_dense(ev, ev).velocity, 0.0);
}

}  // namespace
}  // namespace drivestyle
