#pragma once

#include <array>
#include <cstddef>
#include <string_view>

namespace drivestyle {

/// Feature order shared by feature vectors, weights and scaling coefficients.
enum class Feature : std::size_t {
  accel_x,        // a) longitudinal acceleration
  accel_y,        // b) lateral acceleration
  speed,          // c) deviation from desired speed
  desired_lane,   // d)
  initial_lane,   // e)
  end_lane,       // f)
  inverse_tiv,    // g) reciprocal inter-vehicular time
  start_distance, // h) triggered
  end_distance,   // i) triggered
  integral_distance  // j) triggered
};

inline constexpr std::size_t kFeatureCount = 10;
inline constexpr std::size_t kBasicFeatureCount = 6;

inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "f_ax", "f_ay", "f_v", "f_l", "f_il", "f_el", "f_tiv", "f_sd", "f_ed", "f_id"};

inline constexpr std::size_t index(Feature f) { return static_cast<std::size_t>(f); }

/// Fixed-order 10-component vector; used for features, weights and scaling.
struct FeatureVector {
  std::array<double, kFeatureCount> values{};

  double& operator[](Feature f) { return values[index(f)]; }
  double operator[](Feature f) const { return values[index(f)]; }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }

  static FeatureVector filled(double value) {
    FeatureVector v;
    v.values.fill(value);
    return v;
  }

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

using WeightVector = FeatureVector;

/// Diagonal of the feature scaling matrix.
struct FeatureScaling {
  FeatureVector omega = FeatureVector::filled(1.0);

  /// 10 for the lane-keeping and reactive distance features, 1 for the
  /// features accumulated over the whole trajectory.
  static FeatureScaling standard() {
    FeatureScaling s;
    s.omega[Feature::initial_lane] = 10.0;
    s.omega[Feature::end_lane] = 10.0;
    s.omega[Feature::start_distance] = 10.0;
    s.omega[Feature::end_distance] = 10.0;
    s.omega[Feature::integral_distance] = 10.0;
    return s;
  }
};

/// Componentwise product omega * f.
FeatureVector scale(const FeatureVector& fv, const FeatureScaling& scaling);

double dot(const FeatureVector& a, const FeatureVector& b);
double distance(const FeatureVector& a, const FeatureVector& b);

}  // namespace drivestyle
