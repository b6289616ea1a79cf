#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <vector>

#include "inekf/dynamics.hpp"
#include "inekf/kinematics.hpp"
#include "inekf/state.hpp"

namespace inekf {

/// Quaternion-based EKF belief with decoupled error states
/// (δθ, δv, δp, δd.., ζ), where exp(δθ) = Rᵀ R̂ (so R = R̂ exp(-δθ)),
/// δv = v - v̂, δp = p - p̂, δd = d - d̂ and ζ = θ̂ - θ.
///
/// Quaternion convention: Hamilton, passive, scalar-first when serialized.
struct QekfBelief {
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();  ///< world_R_body
  Vec3 velocity = Vec3::Zero();
  Vec3 position = Vec3::Zero();
  std::vector<TrackedPoint> points;
  std::vector<Vec3> point_positions;
  BiasVector bias;
  Eigen::MatrixXd P = Eigen::MatrixXd::Identity(15, 15);

  Mat3 rotation() const { return orientation.toRotationMatrix(); }
  int num_points() const { return static_cast<int>(points.size()); }
  int dim_p() const { return 15 + 3 * num_points(); }
  int idx_bias() const { return 9 + 3 * num_points(); }
  int point_slot(int id) const;

  /// Group-state view of the mean (columns v, p, d..), for shared integrators
  /// and error metrics.
  SEK3 as_sek3() const;
  void set_from_sek3(const SEK3& x);
};

struct QekfUpdateResult {
  QekfBelief belief;
  bool applied = false;
};

/// Error-dynamics matrix A linearized at the current estimate (this is the
/// state-dependent linearization that the invariant form avoids).
Eigen::MatrixXd qekf_error_dynamics(const QekfBelief& belief, const ImuSample& imu);

/// Prediction step: the same ZOH mean integration as the invariant filter,
/// covariance through Φ = exp_m(A Δt) with A frozen over the step. Set
/// first_order to use Φ ≈ I + AΔt instead.
QekfBelief qekf_predict(const QekfBelief& belief, const ImuSample& imu,
                        const NoiseParams& noise, const GravityVec& gravity = {},
                        bool first_order = false);

/// Forward-kinematic measurement update. Orientation is corrected
/// multiplicatively, the vector states additively. Returns applied=false on a
/// near-singular innovation covariance.
QekfUpdateResult qekf_update(const QekfBelief& belief, const Eigen::VectorXd& alpha,
                             int contact_id, const KinematicsModel& kin,
                             const NoiseParams& noise);

/// Contact lifecycle mirroring the invariant filter's maps with δ-error
/// Jacobians: δd = δp + R̂ skew(h_p) δθ - R̂ J_p w_α to first order.
QekfBelief qekf_add_contact(const QekfBelief& belief, int contact_id,
                            const Eigen::VectorXd& alpha, const KinematicsModel& kin,
                            const NoiseParams& noise);
QekfBelief qekf_remove_contact(const QekfBelief& belief, int contact_id);

}  // namespace inekf
