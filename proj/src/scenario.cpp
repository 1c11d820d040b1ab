#include "drivestyle/scenario.hpp"

#include "drivestyle/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <vector>

namespace drivestyle {

int ScenarioConfig::sample_count() const {
  return static_cast<int>(std::lround(smpc.duration / smpc.Ts));
}

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

double parse_number(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double value = 0.0;
  const auto* end = t.data() + t.size();
  const auto [ptr, ec] = std::from_chars(t.data(), end, value);
  if (ec != std::errc() || ptr != end || t.empty()) {
    throw ScenarioError(key, "expected a number, got '" + t + "'");
  }
  return value;
}

std::vector<double> parse_list(const std::string& key, const std::string& text, std::size_t size) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number(key, item));
  if (out.size() != size) {
    throw ScenarioError(key, "expected " + std::to_string(size) + " comma-separated values, got " +
                                 std::to_string(out.size()));
  }
  return out;
}

int parse_int(const std::string& key, const std::string& text) {
  const double v = parse_number(key, text);
  if (v != std::floor(v) || std::abs(v) > 1e9) {
    throw ScenarioError(key, "expected an integer");
  }
  return static_cast<int>(v);
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1") return true;
  if (t == "false" || t == "0") return false;
  throw ScenarioError(key, "expected true or false, got '" + t + "'");
}

VehicleState parse_state(const std::string& key, const std::string& text) {
  const auto v = parse_list(key, text, 4);
  return {v[0], v[1], v[2], v[3]};
}

Interval parse_interval(const std::string& key, const std::string& text) {
  const auto v = parse_list(key, text, 2);
  return {v[0], v[1]};
}

template <std::size_t N>
std::array<double, N> parse_array(const std::string& key, const std::string& text) {
  const auto v = parse_list(key, text, N);
  std::array<double, N> out{};
  std::copy(v.begin(), v.end(), out.begin());
  return out;
}

FeatureVector parse_feature_vector(const std::string& key, const std::string& text) {
  // A single value fills all ten components.
  if (text.find(',') == std::string::npos) return FeatureVector::filled(parse_number(key, text));
  FeatureVector fv;
  fv.values = parse_array<kFeatureCount>(key, text);
  return fv;
}

using Setter = std::function<void(ScenarioConfig&, const std::string& key, const std::string& value)>;

struct KeySpec {
  bool required;
  Setter set;
};

const std::map<std::string, KeySpec, std::less<>>& key_table() {
  static const std::map<std::string, KeySpec, std::less<>> table = {
      {"road.lane_width", {true, [](auto& c, auto& k, auto& v) { c.lane.lane_width = parse_number(k, v); }}},
      {"road.lane_count", {false, [](auto& c, auto& k, auto& v) { c.lane_count = parse_int(k, v); }}},
      {"vehicle.front_axle", {true, [](auto& c, auto& k, auto& v) { c.geometry.l_f = parse_number(k, v); }}},
      {"vehicle.rear_axle", {true, [](auto& c, auto& k, auto& v) { c.geometry.l_r = parse_number(k, v); }}},
      {"vehicle.length", {true, [](auto& c, auto& k, auto& v) { c.geometry.length = parse_number(k, v); }}},
      {"vehicle.width", {true, [](auto& c, auto& k, auto& v) { c.geometry.width = parse_number(k, v); }}},
      {"ev.initial", {true, [](auto& c, auto& k, auto& v) { c.ev_initial = parse_state(k, v); }}},
      {"tv.initial", {true, [](auto& c, auto& k, auto& v) { c.tv_initial = parse_state(k, v); }}},
      {"smpc.horizon", {true, [](auto& c, auto& k, auto& v) { c.smpc.horizon = parse_int(k, v); }}},
      {"smpc.sample_time", {true, [](auto& c, auto& k, auto& v) { c.smpc.Ts = parse_number(k, v); }}},
      {"smpc.duration", {true, [](auto& c, auto& k, auto& v) { c.smpc.duration = parse_number(k, v); }}},
      {"smpc.risk", {true, [](auto& c, auto& k, auto& v) { c.smpc.ellipse.p = parse_number(k, v); }}},
      {"smpc.state_weights", {true, [](auto& c, auto& k, auto& v) { c.smpc.weights.state = parse_array<4>(k, v); }}},
      {"smpc.input_weights", {true, [](auto& c, auto& k, auto& v) { c.smpc.weights.input = parse_array<2>(k, v); }}},
      {"smpc.terminal_weights", {true, [](auto& c, auto& k, auto& v) { c.smpc.weights.terminal = parse_array<4>(k, v); }}},
      {"smpc.sigma0", {false, [](auto& c, auto& k, auto& v) { c.smpc.sigma0 = parse_number(k, v); }}},
      {"smpc.sigma_growth", {false, [](auto& c, auto& k, auto& v) { c.smpc.sigma_growth = parse_number(k, v); }}},
      {"smpc.max_iterations", {false, [](auto& c, auto& k, auto& v) { c.smpc.solver.max_iterations = parse_int(k, v); }}},
      {"smpc.tolerance", {false, [](auto& c, auto& k, auto& v) { c.smpc.solver.tolerance = parse_number(k, v); }}},
      {"smpc.soft_penalty", {false, [](auto& c, auto& k, auto& v) { c.smpc.solver.soft_penalty = parse_number(k, v); }}},
      {"bounds.lateral", {true, [](auto& c, auto& k, auto& v) { c.bounds.y = parse_interval(k, v); }}},
      {"bounds.heading", {true, [](auto& c, auto& k, auto& v) { c.bounds.phi = parse_interval(k, v); }}},
      {"bounds.speed", {true, [](auto& c, auto& k, auto& v) { c.bounds.v = parse_interval(k, v); }}},
      {"bounds.acceleration", {true, [](auto& c, auto& k, auto& v) { c.bounds.a = parse_interval(k, v); }}},
      {"bounds.steering", {true, [](auto& c, auto& k, auto& v) { c.bounds.delta = parse_interval(k, v); }}},
      {"ellipse.semi_major", {true, [](auto& c, auto& k, auto& v) { c.smpc.ellipse.l_a = parse_number(k, v); }}},
      {"ellipse.semi_minor", {true, [](auto& c, auto& k, auto& v) { c.smpc.ellipse.l_b = parse_number(k, v); }}},
      {"lane.desired_speed", {true, [](auto& c, auto& k, auto& v) { c.lane.v_des = parse_number(k, v); }}},
      {"lane.limit_speed", {false, [](auto& c, auto& k, auto& v) { c.lane.v_lane = parse_number(k, v); }}},
      {"lane.initial", {true, [](auto& c, auto& k, auto& v) { c.lane.l_initial = parse_number(k, v); }}},
      {"lane.target", {true, [](auto& c, auto& k, auto& v) { c.lane.l_target = parse_number(k, v); }}},
      {"lane.desired", {false, [](auto& c, auto& k, auto& v) { c.lane.l_des = parse_number(k, v); }}},
      {"lane.end_window", {false, [](auto& c, auto& k, auto& v) { c.lane.end_window = parse_number(k, v); }}},
      {"learner.trigger_threshold", {true, [](auto& c, auto& k, auto& v) { c.learner.trigger.lambda = parse_number(k, v); }}},
      {"learner.reaction_time", {false, [](auto& c, auto& k, auto& v) { c.learner.trigger.reaction_time = parse_number(k, v); }}},
      {"learner.scaling", {true, [](auto& c, auto& k, auto& v) { c.learner.scaling.omega = parse_feature_vector(k, v); }}},
      {"learner.termination", {true, [](auto& c, auto& k, auto& v) { c.learner.eps_bar = parse_number(k, v); }}},
      {"learner.learning_rate", {false, [](auto& c, auto& k, auto& v) { c.learner.alpha = parse_number(k, v); }}},
      {"learner.max_outer", {false, [](auto& c, auto& k, auto& v) { c.learner.max_outer = parse_int(k, v); }}},
      {"learner.max_inner", {false, [](auto& c, auto& k, auto& v) { c.learner.max_inner = parse_int(k, v); }}},
      {"learner.inner_tolerance", {false, [](auto& c, auto& k, auto& v) { c.learner.inner_tol = parse_number(k, v); }}},
      {"learner.freeze_trigger", {false, [](auto& c, auto& k, auto& v) { c.learner.freeze_trigger = parse_bool(k, v); }}},
      {"learner.features", {false, [](auto& c, auto& k, auto& v) {
         const int n = parse_int(k, v);
         if (n != 6 && n != 10) throw ScenarioError(k, "must be 6 or 10");
         c.learner.feature_set = (n == 6) ? FeatureSet::basic : FeatureSet::reactive;
       }}},
      {"learner.initial_weights", {false, [](auto& c, auto& k, auto& v) { c.learner.theta_init = parse_feature_vector(k, v); }}},
      {"learner.seed", {false, [](auto& c, auto& k, auto& v) {
         const int s = parse_int(k, v);
         if (s < 0) throw ScenarioError(k, "must be nonnegative");
         c.learner.seed = static_cast<std::uint64_t>(s);
       }}},
      {"learner.restarts", {false, [](auto& c, auto& k, auto& v) { c.learner.restarts = parse_int(k, v); }}},
  };
  return table;
}

void require(bool ok, const char* key, const char* message) {
  if (!ok) throw ScenarioError(key, message);
}

void require_interval(const Interval& i, const char* key) {
  require(std::isfinite(i.min) && std::isfinite(i.max) && i.min <= i.max, key,
          "bounds must be finite with min <= max");
}

}  // namespace

void validate(const ScenarioConfig& c) {
  require(c.lane.lane_width > 0.0, "road.lane_width", "must be positive");
  require(c.lane_count >= 1, "road.lane_count", "must be at least 1");
  require(c.geometry.l_f > 0.0, "vehicle.front_axle", "must be positive");
  require(c.geometry.l_r > 0.0, "vehicle.rear_axle", "must be positive");
  require(c.geometry.length > 0.0, "vehicle.length", "must be positive");
  require(c.geometry.width > 0.0, "vehicle.width", "must be positive");
  require(c.smpc.horizon >= 1, "smpc.horizon", "must be at least 1");
  require(c.smpc.Ts > 0.0, "smpc.sample_time", "must be positive");
  const double ratio = c.smpc.duration / c.smpc.Ts;
  require(c.smpc.duration > 0.0 && std::abs(ratio - std::round(ratio)) < 1e-9 * std::max(1.0, ratio),
          "smpc.duration", "must be a positive multiple of smpc.sample_time");
  require(c.sample_count() >= 3, "smpc.duration", "must cover at least three samples");
  require(c.smpc.ellipse.p > 0.0 && c.smpc.ellipse.p < 1.0, "smpc.risk", "must lie in (0, 1)");
  for (double w : c.smpc.weights.state) require(w >= 0.0, "smpc.state_weights", "must be nonnegative");
  for (double w : c.smpc.weights.input) require(w >= 0.0, "smpc.input_weights", "must be nonnegative");
  for (double w : c.smpc.weights.terminal) require(w >= 0.0, "smpc.terminal_weights", "must be nonnegative");
  require(c.smpc.sigma0 >= 0.0, "smpc.sigma0", "must be nonnegative");
  require(c.smpc.sigma_growth >= 0.0, "smpc.sigma_growth", "must be nonnegative");
  require(c.smpc.solver.max_iterations >= 1, "smpc.max_iterations", "must be at least 1");
  require(c.smpc.solver.tolerance > 0.0, "smpc.tolerance", "must be positive");
  require(c.smpc.solver.soft_penalty > 0.0, "smpc.soft_penalty", "must be positive");
  require_interval(c.bounds.y, "bounds.lateral");
  require_interval(c.bounds.phi, "bounds.heading");
  require_interval(c.bounds.v, "bounds.speed");
  require_interval(c.bounds.a, "bounds.acceleration");
  require_interval(c.bounds.delta, "bounds.steering");
  require(c.smpc.ellipse.l_a > 0.0, "ellipse.semi_major", "must be positive");
  require(c.smpc.ellipse.l_b > 0.0, "ellipse.semi_minor", "must be positive");

  const double road = c.lane_count * c.lane.lane_width;
  auto on_road = [&](double y) { return y >= 0.0 && y <= road; };
  require(on_road(c.lane.l_initial), "lane.initial", "lane center must lie on the road");
  require(on_road(c.lane.l_target), "lane.target", "lane center must lie on the road");
  require(on_road(c.lane.l_des), "lane.desired", "lane center must lie on the road");
  require(c.lane.end_window > 0.0, "lane.end_window", "must be positive");
  require(c.bounds.y.contains(c.ev_initial.y) && c.bounds.phi.contains(c.ev_initial.phi) &&
              c.bounds.v.contains(c.ev_initial.v),
          "ev.initial", "must satisfy the state bounds");

  require(c.learner.trigger.lambda > 0.0, "learner.trigger_threshold", "must be positive");
  require(c.learner.trigger.reaction_time > 0.0, "learner.reaction_time", "must be positive");
  for (double w : c.learner.scaling.omega.values) require(w > 0.0, "learner.scaling", "must be positive");
  require(c.learner.eps_bar > 0.0, "learner.termination", "must be positive");
  require(c.learner.alpha > 0.0, "learner.learning_rate", "must be positive");
  require(c.learner.max_outer >= 1, "learner.max_outer", "must be at least 1");
  require(c.learner.max_inner >= 1, "learner.max_inner", "must be at least 1");
  require(c.learner.inner_tol > 0.0, "learner.inner_tolerance", "must be positive");
  if (c.learner.theta_init) {
    for (double w : c.learner.theta_init->values) {
      require(std::isfinite(w) && w >= 0.0, "learner.initial_weights", "must be finite and nonnegative");
    }
  }
  require(c.learner.restarts >= 0, "learner.restarts", "must be nonnegative");
}

ScenarioConfig parse_scenario(const std::string& text) {
  ScenarioConfig config;
  std::set<std::string, std::less<>> seen;
  const auto& table = key_table();

  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ScenarioError("line " + std::to_string(line_no), "expected 'key = value'");
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    const auto it = table.find(key);
    if (it == table.end()) throw ScenarioError(key, "unknown key");
    if (!seen.insert(key).second) throw ScenarioError(key, "duplicate key");
    if (value.empty()) {
      if (it->second.required) throw ScenarioError(key, "required key has no value");
      seen.erase(key);
      continue;
    }
    it->second.set(config, key, value);
  }

  for (const auto& [key, spec] : table) {
    if (spec.required && !seen.contains(key)) throw ScenarioError(key, "missing required key");
  }
  // Defaults tied to other keys.
  if (!seen.contains("lane.limit_speed")) config.lane.v_lane = config.lane.v_des;
  if (!seen.contains("lane.desired")) config.lane.l_des = config.lane.l_target;

  validate(config);
  return config;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

}  // namespace drivestyle
