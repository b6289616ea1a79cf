#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <optional>
#include <vector>

#include "inekf/dynamics.hpp"
#include "inekf/kinematics.hpp"
#include "inekf/qekf.hpp"
#include "inekf/rng.hpp"
#include "inekf/state.hpp"

namespace inekf {

/// Two point-foot legs with mirrored hip offsets; encoder vectors stack the
/// legs in id order (id 0 = left, id 1 = right).
class BipedModel {
 public:
  BipedModel(double hip_y = 0.12, double l1 = 0.12, double l2 = 0.35, double l3 = 0.40)
      : legs_{PointFootLeg({0.0, hip_y, 0.0}, l1, l2, l3),
              PointFootLeg({0.0, -hip_y, 0.0}, l1, l2, l3)} {}

  int num_legs() const { return 2; }
  int encoder_dim() const { return 6; }
  const PointFootLeg& leg(int id) const { return legs_.at(static_cast<size_t>(id)); }
  Eigen::Vector3d leg_joints(const Eigen::VectorXd& all, int id) const {
    return all.segment<3>(3 * id);
  }

 private:
  std::vector<PointFootLeg> legs_;
};

struct GaitSpec {
  double step_period = 0.5;     ///< one leg's stance duration scale, s
  double stance_fraction = 1.0; ///< fraction of the step spent in stance, (0,1]
  double swing_height = 0.05;   ///< swing arc apex, m
};

struct SpeedProfile {
  double target_speed = 0.3;  ///< m/s forward
  double ramp_time = 3.0;     ///< s to reach target
  double drop_depth = 0.03;   ///< initial body drop, m
  double drop_time = 0.3;     ///< s over which the drop happens
};

struct TrajectorySpec {
  double duration = 10.0;
  double imu_rate_hz = 1000.0;
  double encoder_rate_hz = 100.0;
  GaitSpec gait;
  SpeedProfile speed;
  uint64_t seed = 0;
  double body_height = 0.68;
  double bob_amplitude = 0.01;   ///< vertical bobbing, m (scaled by speed fraction)
  double sway_amplitude = 0.02;  ///< roll/pitch bobbing, rad (scaled by speed fraction)
};

struct SensorRecord {
  enum class Type { kImu, kEncoder, kContact, kLandmark, kGps, kMag, kTruth };
  Type type = Type::kImu;
  double t = 0.0;
  Vec3 vec_a = Vec3::Zero();   ///< IMU gyro | TRUTH velocity | LANDMARK/GPS/MAG value
  Vec3 vec_b = Vec3::Zero();   ///< IMU accel | TRUTH position
  Eigen::VectorXd values;      ///< ENC joint vector
  int id = 0;                  ///< CONTACT / LANDMARK id
  bool flag = false;           ///< CONTACT state
  Eigen::Quaterniond quat = Eigen::Quaterniond::Identity();  ///< TRUTH orientation
};

struct SensorLog {
  std::vector<SensorRecord> records;
  int encoder_dim = 6;
};

/// Generates a synthetic walking log: a smooth analytic body trajectory with
/// an initial drop and a forward speed ramp, feet placed by the gait schedule
/// and solved by damped-least-squares IK, IMU inputs chosen so that the
/// zero-order-hold integration reproduces the ground truth exactly. Noise and
/// bias random walks follow the NoiseParams densities (per-sample std is
/// density times sqrt(rate)). Throws std::runtime_error when IK cannot reach
/// a foot target, rejecting the trajectory.
SensorLog generate(const TrajectorySpec& spec, const BipedModel& robot,
                   const NoiseParams& noise, const GravityVec& gravity = {});

/// Position samples from a belief's uncertainty: ξ ~ N(0, P) mapped through
/// exp(ξ)X̂ for the invariant filter (right frame), additive Gaussian
/// positions for the QEKF.
std::vector<Vec3> covariance_samples(const FilterBelief& belief, int n,
                                     SubstreamRng& rng);
std::vector<Vec3> covariance_samples(const QekfBelief& belief, int n,
                                     SubstreamRng& rng);

}  // namespace inekf
