#include "inekf/log_io.hpp"

#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace inekf {

namespace {

constexpr const char* kLogHeader = "#inekf-log v1";

void append_num(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

void append_time(std::string& out, double t) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9f", t);
  out += buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, sep)) out.push_back(field);
  return out;
}

double parse_double(const std::string& s, const std::string& path, int line) {
  double v = 0.0;
  const auto* begin = s.data();
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc() || res.ptr != end) {
    throw ParseError(path, line, "bad number '" + s + "'");
  }
  return v;
}

}  // namespace

void write_log(const std::string& path, const SensorLog& log) {
  std::string out;
  out.reserve(log.records.size() * 64 + 32);
  out += kLogHeader;
  out += '\n';
  for (const auto& rec : log.records) {
    append_time(out, rec.t);
    switch (rec.type) {
      case SensorRecord::Type::kImu:
        out += ",IMU";
        for (int i = 0; i < 3; ++i) { out += ','; append_num(out, rec.vec_a[i]); }
        for (int i = 0; i < 3; ++i) { out += ','; append_num(out, rec.vec_b[i]); }
        break;
      case SensorRecord::Type::kEncoder:
        out += ",ENC";
        for (int i = 0; i < rec.values.size(); ++i) { out += ','; append_num(out, rec.values[i]); }
        break;
      case SensorRecord::Type::kContact:
        out += ",CONTACT,";
        out += std::to_string(rec.id);
        out += rec.flag ? ",1" : ",0";
        break;
      case SensorRecord::Type::kLandmark:
        out += ",LANDMARK,";
        out += std::to_string(rec.id);
        for (int i = 0; i < 3; ++i) { out += ','; append_num(out, rec.vec_a[i]); }
        break;
      case SensorRecord::Type::kGps:
        out += ",GPS";
        for (int i = 0; i < 3; ++i) { out += ','; append_num(out, rec.vec_a[i]); }
        break;
      case SensorRecord::Type::kMag:
        out += ",MAG";
        for (int i = 0; i < 3; ++i) { out += ','; append_num(out, rec.vec_a[i]); }
        break;
      case SensorRecord::Type::kTruth:
        out += ",TRUTH";
        out += ','; append_num(out, rec.quat.w());
        out += ','; append_num(out, rec.quat.x());
        out += ','; append_num(out, rec.quat.y());
        out += ','; append_num(out, rec.quat.z());
        for (int i = 0; i < 3; ++i) { out += ','; append_num(out, rec.vec_a[i]); }
        for (int i = 0; i < 3; ++i) { out += ','; append_num(out, rec.vec_b[i]); }
        break;
    }
    out += '\n';
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("write_log: cannot open " + path);
  file << out;
}

SensorLog read_log(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw std::runtime_error("read_log: cannot open " + path);
  SensorLog log;
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  double last_t = -std::numeric_limits<double>::infinity();
  while (std::getline(file, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (!header_seen) {
        if (line != kLogHeader) {
          throw ParseError(path, line_no, "expected header '" + std::string(kLogHeader) + "'");
        }
        header_seen = true;
      }
      continue;
    }
    if (!header_seen) throw ParseError(path, line_no, "missing log header");

    const auto fields = split(line, ',');
    if (fields.size() < 3) throw ParseError(path, line_no, "too few fields");
    SensorRecord rec;
    rec.t = parse_double(fields[0], path, line_no);
    if (rec.t < last_t) throw ParseError(path, line_no, "timestamps must be non-decreasing");
    last_t = rec.t;
    const std::string& kind = fields[1];
    const size_t n = fields.size();
    auto need = [&](size_t expect) {
      if (n != expect) throw ParseError(path, line_no, kind + " record needs " +
                                        std::to_string(expect) + " fields, got " +
                                        std::to_string(n));
    };
    if (kind == "IMU") {
      need(8);
      rec.type = SensorRecord::Type::kImu;
      for (int i = 0; i < 3; ++i) rec.vec_a[i] = parse_double(fields[2 + i], path, line_no);
      for (int i = 0; i < 3; ++i) rec.vec_b[i] = parse_double(fields[5 + i], path, line_no);
    } else if (kind == "ENC") {
      rec.type = SensorRecord::Type::kEncoder;
      rec.values.resize(static_cast<Eigen::Index>(n - 2));
      for (size_t i = 2; i < n; ++i) {
        rec.values[static_cast<Eigen::Index>(i - 2)] = parse_double(fields[i], path, line_no);
      }
      log.encoder_dim = static_cast<int>(rec.values.size());
    } else if (kind == "CONTACT") {
      need(4);
      rec.type = SensorRecord::Type::kContact;
      rec.id = static_cast<int>(parse_double(fields[2], path, line_no));
      const double flag = parse_double(fields[3], path, line_no);
      if (flag != 0.0 && flag != 1.0) throw ParseError(path, line_no, "flag must be 0 or 1");
      rec.flag = flag != 0.0;
    } else if (kind == "LANDMARK") {
      need(6);
      rec.type = SensorRecord::Type::kLandmark;
      rec.id = static_cast<int>(parse_double(fields[2], path, line_no));
      for (int i = 0; i < 3; ++i) rec.vec_a[i] = parse_double(fields[3 + i], path, line_no);
    } else if (kind == "GPS") {
      need(5);
      rec.type = SensorRecord::Type::kGps;
      for (int i = 0; i < 3; ++i) rec.vec_a[i] = parse_double(fields[2 + i], path, line_no);
    } else if (kind == "MAG") {
      need(5);
      rec.type = SensorRecord::Type::kMag;
      for (int i = 0; i < 3; ++i) rec.vec_a[i] = parse_double(fields[2 + i], path, line_no);
    } else if (kind == "TRUTH") {
      need(12);
      rec.type = SensorRecord::Type::kTruth;
      rec.quat = Eigen::Quaterniond(parse_double(fields[2], path, line_no),
                                    parse_double(fields[3], path, line_no),
                                    parse_double(fields[4], path, line_no),
                                    parse_double(fields[5], path, line_no));
      for (int i = 0; i < 3; ++i) rec.vec_a[i] = parse_double(fields[6 + i], path, line_no);
      for (int i = 0; i < 3; ++i) rec.vec_b[i] = parse_double(fields[9 + i], path, line_no);
    } else {
      throw ParseError(path, line_no, "unknown record kind '" + kind + "'");
    }
    log.records.push_back(std::move(rec));
  }
  if (!header_seen) throw ParseError(path, 1, "empty log");
  return log;
}

void write_trajectory_csv(const std::string& path,
                          const std::vector<TrajectorySample>& trajectory) {
  std::string out =
      "t,qw,qx,qy,qz,vx,vy,vz,px,py,pz,bgx,bgy,bgz,bax,bay,baz,"
      "var_phix,var_phiy,var_phiz,var_vx,var_vy,var_vz,var_px,var_py,var_pz\n";
  for (const auto& s : trajectory) {
    append_time(out, s.t);
    const double q[4] = {s.orientation.w(), s.orientation.x(), s.orientation.y(),
                         s.orientation.z()};
    for (double v : q) { out += ','; append_num(out, v); }
    for (int i = 0; i < 3; ++i) { out += ','; append_num(out, s.velocity[i]); }
    for (int i = 0; i < 3; ++i) { out += ','; append_num(out, s.position[i]); }
    for (int i = 0; i < 6; ++i) { out += ','; append_num(out, s.bias[i]); }
    for (int i = 0; i < 9; ++i) { out += ','; append_num(out, s.euclidean_variance[i]); }
    out += '\n';
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("write_trajectory_csv: cannot open " + path);
  file << out;
}

ReplayConfig RunConfig::replay(FilterKind kind) const {
  ReplayConfig cfg;
  cfg.kind = kind;
  cfg.noise = noise;
  cfg.gravity = gravity;
  cfg.thresholds = thresholds;
  cfg.exo = exo;
  cfg.estimate_bias = estimate_bias;
  cfg.correction.innovation_gate = innovation_gate;
  return cfg;
}

void apply_config_entry(RunConfig& c, const std::string& key, const std::string& value) {
  const double deg = M_PI / 180.0;
  static const auto bad_value = [](const std::string& v) {
    return std::invalid_argument("bad value '" + v + "'");
  };
  auto as_double = [&](double* dst, double scale = 1.0) {
    return [dst, scale, &bad_value = bad_value](const std::string& v) {
      try {
        size_t used = 0;
        const double parsed = std::stod(v, &used);
        if (used != v.size()) throw bad_value(v);
        *dst = parsed * scale;
      } catch (const std::invalid_argument&) {
        throw bad_value(v);
      }
    };
  };
  auto as_bool = [&](bool* dst) {
    return [dst, &bad_value = bad_value](const std::string& v) {
      if (v == "1" || v == "true") *dst = true;
      else if (v == "0" || v == "false") *dst = false;
      else throw bad_value(v);
    };
  };
  auto as_seed = [&](uint64_t* dst) {
    return [dst, &bad_value = bad_value](const std::string& v) {
      try {
        *dst = std::stoull(v);
      } catch (...) {
        throw bad_value(v);
      }
    };
  };

  const std::map<std::string, std::function<void(const std::string&)>> table = {
      {"gyro_std", as_double(&c.noise.gyro_std)},
      {"accel_std", as_double(&c.noise.accel_std)},
      {"gyro_bias_std", as_double(&c.noise.gyro_bias_std)},
      {"accel_bias_std", as_double(&c.noise.accel_bias_std)},
      {"contact_std", as_double(&c.noise.contact_std)},
      {"encoder_std_deg", as_double(&c.noise.encoder_std, deg)},
      {"init_orientation_std_deg", as_double(&c.initial_std.orientation, deg)},
      {"init_velocity_std", as_double(&c.initial_std.velocity)},
      {"init_position_std", as_double(&c.initial_std.position)},
      {"init_foot_std", as_double(&c.initial_std.foot)},
      {"init_gyro_bias_std", as_double(&c.initial_std.gyro_bias)},
      {"init_accel_bias_std", as_double(&c.initial_std.accel_bias)},
      {"gravity_x", as_double(&c.gravity.g.x())},
      {"gravity_y", as_double(&c.gravity.g.y())},
      {"gravity_z", as_double(&c.gravity.g.z())},
      {"hip_offset_y", as_double(&c.hip_offset_y)},
      {"link1", as_double(&c.link1)},
      {"link2", as_double(&c.link2)},
      {"link3", as_double(&c.link3)},
      {"duration", as_double(&c.trajectory.duration)},
      {"imu_rate_hz", as_double(&c.trajectory.imu_rate_hz)},
      {"encoder_rate_hz", as_double(&c.trajectory.encoder_rate_hz)},
      {"step_period", as_double(&c.trajectory.gait.step_period)},
      {"stance_fraction", as_double(&c.trajectory.gait.stance_fraction)},
      {"swing_height", as_double(&c.trajectory.gait.swing_height)},
      {"target_speed", as_double(&c.trajectory.speed.target_speed)},
      {"ramp_time", as_double(&c.trajectory.speed.ramp_time)},
      {"drop_depth", as_double(&c.trajectory.speed.drop_depth)},
      {"drop_time", as_double(&c.trajectory.speed.drop_time)},
      {"body_height", as_double(&c.trajectory.body_height)},
      {"bob_amplitude", as_double(&c.trajectory.bob_amplitude)},
      {"sway_amplitude", as_double(&c.trajectory.sway_amplitude)},
      {"seed", as_seed(&c.trajectory.seed)},
      {"estimate_bias", as_bool(&c.estimate_bias)},
      {"innovation_gate", as_bool(&c.innovation_gate)},
      {"landmark_std", as_double(&c.exo.landmark_std)},
      {"gps_std", as_double(&c.exo.gps_std)},
      {"mag_std", as_double(&c.exo.mag_std)},
      {"mag_field_x", as_double(&c.exo.mag_field.x())},
      {"mag_field_y", as_double(&c.exo.mag_field.y())},
      {"mag_field_z", as_double(&c.exo.mag_field.z())},
      {"conv_roll_pitch_deg", as_double(&c.thresholds.roll_pitch, deg)},
      {"conv_body_velocity", as_double(&c.thresholds.body_velocity)},
      {"conv_hold_time", as_double(&c.thresholds.hold_time)},
      {"mc_orientation_range_deg", as_double(&c.mc_orientation_range, deg)},
      {"mc_velocity_range", as_double(&c.mc_velocity_range)},
  };
  const auto it = table.find(key);
  if (it == table.end()) {
    throw std::invalid_argument("unknown key '" + key + "'");
  }
  it->second(value);
}

RunConfig parse_config(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw std::runtime_error("parse_config: cannot open " + path);
  RunConfig config;
  std::string line;
  int line_no = 0;
  while (std::getline(file, line)) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    // trim
    const auto is_space = [](unsigned char ch) { return std::isspace(ch); };
    while (!line.empty() && is_space(line.back())) line.pop_back();
    size_t start = 0;
    while (start < line.size() && is_space(line[start])) ++start;
    line = line.substr(start);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(path, line_no, "expected key=value");
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    while (!key.empty() && is_space(key.back())) key.pop_back();
    size_t vstart = 0;
    while (vstart < value.size() && is_space(value[vstart])) ++vstart;
    value = value.substr(vstart);
    try {
      apply_config_entry(config, key, value);
    } catch (const std::invalid_argument& e) {
      throw ParseError(path, line_no, e.what());
    }
  }
  return config;
}

}  // namespace inekf
