#pragma once

#include <string>

#include "inekf/replay.hpp"
#include "inekf/sim.hpp"

namespace inekf {

/// Parse failure with a line-numbered diagnostic ("path:line: message").
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& path, int line, const std::string& message)
      : std::runtime_error(path + ":" + std::to_string(line) + ": " + message) {}
};

/// Sensor log CSV, one record per line after the `#inekf-log v1` header:
///   t,IMU,wx,wy,wz,ax,ay,az
///   t,ENC,a1,..,aM
///   t,CONTACT,id,flag
///   t,LANDMARK,id,x,y,z
///   t,GPS,x,y,z
///   t,MAG,x,y,z
///   t,TRUTH,qw,qx,qy,qz,vx,vy,vz,px,py,pz
/// Timestamps carry 9 decimal places; records at equal timestamps are
/// processed in file order. TRUTH rows carry the simulator's ground-truth
/// snapshots so logs can be replayed for error metrics.
void write_log(const std::string& path, const SensorLog& log);
SensorLog read_log(const std::string& path);

/// Trajectory CSV: t, quaternion (w,x,y,z), v, p, b_g, b_a, diag of the
/// Euclidean-error covariance (9 values), fixed order.
void write_trajectory_csv(const std::string& path,
                          const std::vector<TrajectorySample>& trajectory);

/// Flat key=value run configuration with Table-style defaults; '#' starts a
/// comment. Unknown keys and malformed lines raise ParseError.
struct RunConfig {
  NoiseParams noise;       // encoder_std stored in radians
  InitialStd initial_std;
  GravityVec gravity;
  TrajectorySpec trajectory;
  ConvergenceThresholds thresholds;
  ExogenousModels exo;
  double hip_offset_y = 0.12;
  double link1 = 0.12;
  double link2 = 0.35;
  double link3 = 0.40;
  bool estimate_bias = true;
  bool innovation_gate = false;
  double mc_orientation_range = 30.0 * M_PI / 180.0;
  double mc_velocity_range = 1.0;

  BipedModel robot() const { return BipedModel(hip_offset_y, link1, link2, link3); }
  ReplayConfig replay(FilterKind kind) const;
};

RunConfig parse_config(const std::string& path);
/// Applies one "key=value" assignment; throws std::invalid_argument on an
/// unknown key or a bad value.
void apply_config_entry(RunConfig& config, const std::string& key,
                        const std::string& value);

}  // namespace inekf
