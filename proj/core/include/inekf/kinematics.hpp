#pragma once

#include <Eigen/Core>
#include <memory>

#include "inekf/lie_group.hpp"

namespace inekf {

/// Forward-kinematics abstraction between the body (IMU) frame and one
/// contact frame: position h_p(α), orientation h_R(α) and the analytic
/// position Jacobian J_p(α). Implementations must be immutable.
class KinematicsModel {
 public:
  virtual ~KinematicsModel() = default;

  virtual int joint_count() const = 0;
  /// Contact position in the body frame. Throws on dimension mismatch.
  virtual Vec3 position(const Eigen::VectorXd& alpha) const = 0;
  /// Contact frame orientation relative to the body frame.
  virtual Mat3 orientation(const Eigen::VectorXd& alpha) const = 0;
  /// 3 x joint_count() analytic Jacobian of position().
  virtual Eigen::MatrixXd jacobian(const Eigen::VectorXd& alpha) const = 0;
};

/// Serial point-foot leg: hip yaw about z, hip pitch about y, knee pitch
/// about y, with link offsets d1=(l1,0,0), d2=(0,0,-l2), d3=(0,0,-l3) so the
/// zero pose points the leg straight down, offset l1 ahead of the hip.
class PointFootLeg final : public KinematicsModel {
 public:
  PointFootLeg(Vec3 base_offset, double l1, double l2, double l3)
      : base_(std::move(base_offset)), l1_(l1), l2_(l2), l3_(l3) {}

  int joint_count() const override { return 3; }
  Vec3 position(const Eigen::VectorXd& alpha) const override;
  Mat3 orientation(const Eigen::VectorXd& alpha) const override;
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& alpha) const override;

  const Vec3& base_offset() const { return base_; }
  double max_reach() const { return l1_ + l2_ + l3_; }

  /// Damped-least-squares inverse kinematics for a body-frame foot target.
  /// Returns true on convergence; alpha is both the seed and the result.
  bool inverse(const Vec3& target, Eigen::VectorXd& alpha, double tol = 1e-10,
               int max_iters = 200) const;

 private:
  void check(const Eigen::VectorXd& alpha) const;

  Vec3 base_;
  double l1_, l2_, l3_;
};

}  // namespace inekf
