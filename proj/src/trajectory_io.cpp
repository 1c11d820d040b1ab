#include "drivestyle/trajectory_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace drivestyle {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_field(std::string_view field, std::size_t row, const std::string& column) {
  double v = 0.0;
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    throw FormatError("row " + std::to_string(row) + ": column '" + column +
                          "' is not a number: '" + std::string(field) + "'",
                      row);
  }
  return v;
}

std::string theta_column(std::size_t i) {
  return "theta_" + std::string(kFeatureNames[i]).substr(2);
}

TrajectorySample make_sample(double t, const VehicleState& s, const ControlPoint& c) {
  return {t, s, c.vx, c.vy, c.ax, c.ay};
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw FormatError("missing column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_csv(const CsvTable& table) {
  std::string out;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i) out += ',';
    out += table.header[i];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_number(row[i]);
    }
    out += '\n';
  }
  return out;
}

CsvTable parse_csv(const std::string& text) {
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  bool have_header = false;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (!have_header) {
      for (auto f : fields) {
        if (f.empty()) throw FormatError("empty column name in header");
        table.header.emplace_back(f);
      }
      have_header = true;
      continue;
    }
    ++row;
    if (fields.size() != table.header.size()) {
      throw FormatError("row " + std::to_string(row) + ": expected " +
                            std::to_string(table.header.size()) + " fields, found " +
                            std::to_string(fields.size()),
                        row);
    }
    std::vector<double> values(fields.size());
    for (std::size_t i = 0; i < fields.size(); ++i) {
      values[i] = parse_field(fields[i], row, table.header[i]);
    }
    table.rows.push_back(std::move(values));
  }
  if (!have_header) throw FormatError("empty file: missing header");
  return table;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("cannot read '" + path.string() + "'");
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("cannot write '" + path.string() + "'");
}

CsvTable read_csv(const std::filesystem::path& path) { return parse_csv(read_text(path)); }

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  write_text(path, format_csv(table));
}

std::vector<TrajectorySample> ev_samples(const DemonstrationRecord& record) {
  const SplineTrajectory spline = states_to_control_points(record.ev_states, record.Ts);
  std::vector<TrajectorySample> out;
  for (std::size_t i = 0; i < record.ev_states.size(); ++i) {
    out.push_back(make_sample(record.times[i], record.ev_states[i], spline.control_points()[i]));
  }
  return out;
}

std::vector<TrajectorySample> tv_samples(const DemonstrationRecord& record) {
  const SplineTrajectory spline = states_to_control_points(record.tv_states, record.Ts);
  std::vector<TrajectorySample> out;
  for (std::size_t i = 0; i < record.tv_states.size(); ++i) {
    out.push_back(make_sample(record.times[i], record.tv_states[i], spline.control_points()[i]));
  }
  return out;
}

std::vector<TrajectorySample> spline_samples(const SplineTrajectory& spline) {
  std::vector<TrajectorySample> out;
  for (std::size_t j = 0; j < spline.knots().size(); ++j) {
    const ControlPoint& c = spline.control_points()[j];
    const VehicleState s{c.rx, c.ry, std::atan2(c.vy, c.vx), std::hypot(c.vx, c.vy)};
    out.push_back(make_sample(spline.knots()[j], s, c));
  }
  return out;
}

std::string format_trajectory(const std::vector<TrajectorySample>& samples) {
  CsvTable table;
  table.header = kTrajectoryColumns;
  for (const auto& s : samples) {
    table.rows.push_back(
        {s.t, s.state.x, s.state.y, s.state.phi, s.state.v, s.vx, s.vy, s.ax, s.ay});
  }
  return format_csv(table);
}

std::vector<TrajectorySample> parse_trajectory(const std::string& text) {
  const CsvTable table = parse_csv(text);
  std::array<std::size_t, 9> col{};
  for (std::size_t i = 0; i < kTrajectoryColumns.size(); ++i) col[i] = table.column(kTrajectoryColumns[i]);

  std::vector<TrajectorySample> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& v = table.rows[r];
    for (std::size_t i = 0; i < col.size(); ++i) {
      if (!std::isfinite(v[col[i]])) {
        throw FormatError("row " + std::to_string(r + 1) + ": column '" + kTrajectoryColumns[i] +
                              "' is not finite",
                          r + 1);
      }
    }
    out.push_back({v[col[0]],
                   {v[col[1]], v[col[2]], v[col[3]], v[col[4]]},
                   v[col[5]], v[col[6]], v[col[7]], v[col[8]]});
  }
  if (out.size() < 2) throw FormatError("trajectory needs at least two rows");

  const double dt = out[1].t - out[0].t;
  for (std::size_t r = 1; r < out.size(); ++r) {
    const double step = out[r].t - out[r - 1].t;
    if (!(step > 0.0)) {
      throw FormatError("row " + std::to_string(r + 1) + ": t is not strictly increasing", r + 1);
    }
    if (std::abs(step - dt) > 1e-9 * std::max(1.0, std::abs(out[r].t))) {
      throw FormatError("row " + std::to_string(r + 1) + ": t is not uniformly spaced", r + 1);
    }
  }
  return out;
}

void write_trajectory(const std::filesystem::path& path,
                      const std::vector<TrajectorySample>& samples) {
  write_text(path, format_trajectory(samples));
}

std::vector<TrajectorySample> read_trajectory(const std::filesystem::path& path) {
  return parse_trajectory(read_text(path));
}

SplineTrajectory to_spline(const std::vector<TrajectorySample>& samples) {
  std::vector<double> knots;
  std::vector<ControlPoint> points;
  for (const auto& s : samples) {
    knots.push_back(s.t);
    points.push_back({s.state.x, s.vx, s.ax, s.state.y, s.vy, s.ay});
  }
  return SplineTrajectory(std::move(knots), std::move(points));
}

std::vector<VehicleState> to_states(const std::vector<TrajectorySample>& samples) {
  std::vector<VehicleState> out;
  for (const auto& s : samples) out.push_back(s.state);
  return out;
}

double sample_time(const std::vector<TrajectorySample>& samples) {
  if (samples.size() < 2) throw FormatError("trajectory needs at least two rows");
  return (samples.back().t - samples.front().t) / static_cast<double>(samples.size() - 1);
}

std::string format_features(const FeatureVector& features) {
  CsvTable table;
  for (auto name : kFeatureNames) table.header.emplace_back(name);
  table.rows.emplace_back(features.values.begin(), features.values.end());
  return format_csv(table);
}

FeatureVector parse_features(const std::string& text) {
  const CsvTable table = parse_csv(text);
  if (table.rows.empty()) throw FormatError("missing value row");
  FeatureVector out;
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    out[i] = table.rows.front()[table.column(std::string(kFeatureNames[i]))];
  }
  return out;
}

CsvTable feature_table(const FeatureVector& features, const TriggerInfo& trigger,
                       const FeatureDiagnostics& diagnostics) {
  CsvTable table;
  for (auto name : kFeatureNames) table.header.emplace_back(name);
  table.header.insert(table.header.end(), {"triggered", "t_trg", "gap_clamped"});
  std::vector<double> row(features.values.begin(), features.values.end());
  row.push_back(trigger.triggered ? 1.0 : 0.0);
  row.push_back(trigger.triggered ? trigger.t_trg : std::nan(""));
  row.push_back(diagnostics.gap_clamped ? 1.0 : 0.0);
  table.rows.push_back(std::move(row));
  return table;
}

CsvTable history_table(const std::vector<LearningStep>& history) {
  CsvTable table;
  table.header = {"iteration", "epsilon", "alpha", "inner_iterations", "wall_time"};
  for (std::size_t i = 0; i < kFeatureCount; ++i) table.header.push_back(theta_column(i));
  for (auto name : kFeatureNames) table.header.emplace_back(name);
  for (const auto& step : history) {
    std::vector<double> row{static_cast<double>(step.iteration), step.epsilon, step.alpha,
                            static_cast<double>(step.inner_iterations), step.wall_time};
    row.insert(row.end(), step.theta.values.begin(), step.theta.values.end());
    row.insert(row.end(), step.features.values.begin(), step.features.values.end());
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::vector<LearningStep> history_from_table(const CsvTable& table) {
  const std::size_t it = table.column("iteration");
  const std::size_t eps = table.column("epsilon");
  const std::size_t alpha = table.column("alpha");
  const std::size_t inner = table.column("inner_iterations");
  const std::size_t wall = table.column("wall_time");
  std::array<std::size_t, kFeatureCount> th{};
  std::array<std::size_t, kFeatureCount> fe{};
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    th[i] = table.column(theta_column(i));
    fe[i] = table.column(std::string(kFeatureNames[i]));
  }
  std::vector<LearningStep> out;
  for (const auto& row : table.rows) {
    LearningStep step;
    step.iteration = static_cast<int>(row[it]);
    step.epsilon = row[eps];
    step.alpha = row[alpha];
    step.inner_iterations = static_cast<int>(row[inner]);
    step.wall_time = row[wall];
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      step.theta[i] = row[th[i]];
      step.features[i] = row[fe[i]];
    }
    out.push_back(step);
  }
  return out;
}

}  // namespace drivestyle
