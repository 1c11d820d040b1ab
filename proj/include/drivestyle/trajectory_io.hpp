#pragma once

#include "drivestyle/errors.hpp"
#include "drivestyle/feature_vector.hpp"
#include "drivestyle/learner.hpp"
#include "drivestyle/smpc.hpp"
#include "drivestyle/spline.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace drivestyle {

/// Numeric CSV with a header line. Values are written with 17 significant
/// digits so they read back bit-exactly.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Index of a named column; throws FormatError naming it if absent.
  std::size_t column(const std::string& name) const;
};

std::string format_csv(const CsvTable& table);
/// Blank lines are skipped. Every row must have as many fields as the header.
CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const CsvTable& table);

std::string format_number(double v);

/// One trajectory sample: t, x, y, phi, v, vx, vy, ax, ay.
struct TrajectorySample {
  double t = 0.0;
  VehicleState state;
  double vx = 0.0, vy = 0.0, ax = 0.0, ay = 0.0;
};

inline const std::vector<std::string> kTrajectoryColumns{"t",  "x",  "y",  "phi", "v",
                                                         "vx", "vy", "ax", "ay"};

/// States plus the control points derived from them; samples at the record's times.
std::vector<TrajectorySample> ev_samples(const DemonstrationRecord& record);
std::vector<TrajectorySample> tv_samples(const DemonstrationRecord& record);

/// Samples at the spline knots. phi and v are recovered from the velocity.
std::vector<TrajectorySample> spline_samples(const SplineTrajectory& spline);

std::string format_trajectory(const std::vector<TrajectorySample>& samples);

/// Requires every column of kTrajectoryColumns (any order, extra columns
/// ignored), at least two rows, strictly increasing and uniformly spaced t.
std::vector<TrajectorySample> parse_trajectory(const std::string& text);

void write_trajectory(const std::filesystem::path& path,
                      const std::vector<TrajectorySample>& samples);
std::vector<TrajectorySample> read_trajectory(const std::filesystem::path& path);

/// Spline whose knots and control points are the sample columns.
SplineTrajectory to_spline(const std::vector<TrajectorySample>& samples);
std::vector<VehicleState> to_states(const std::vector<TrajectorySample>& samples);
/// Spacing of a uniform sample grid.
double sample_time(const std::vector<TrajectorySample>& samples);

/// Single row headed by the feature names.
std::string format_features(const FeatureVector& features);
/// Reads the named feature columns of the first row.
FeatureVector parse_features(const std::string& text);

/// Feature row with trigger metadata appended (triggered, t_trg, gap_clamped).
CsvTable feature_table(const FeatureVector& features, const TriggerInfo& trigger,
                       const FeatureDiagnostics& diagnostics);

/// Weight files share the feature-row layout.
inline std::string format_weights(const WeightVector& theta) { return format_features(theta); }
inline WeightVector parse_weights(const std::string& text) { return parse_features(text); }

/// iteration, epsilon, alpha, inner_iterations, wall_time, theta_<name>..., <feature name>...
CsvTable history_table(const std::vector<LearningStep>& history);
std::vector<LearningStep> history_from_table(const CsvTable& table);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace drivestyle
