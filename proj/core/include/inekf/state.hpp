#pragma once

#include <Eigen/Core>
#include <string>
#include <utility>
#include <vector>

#include "inekf/lie_group.hpp"

namespace inekf {

enum class ErrorFrame { kRightInvariant, kLeftInvariant };
enum class Convention { kWorldCentric, kRoboCentric };
enum class PointKind { kContact, kLandmark };

/// Gyroscope bias stacked over accelerometer bias.
struct BiasVector {
  Vec3 gyro = Vec3::Zero();
  Vec3 accel = Vec3::Zero();

  Vec6 stacked() const {
    Vec6 v;
    v << gyro, accel;
    return v;
  }
  static BiasVector from_stacked(const Vec6& v) { return {v.head<3>(), v.tail<3>()}; }
};

/// Registry entry mapping a semantic point ID to a tracked SE_K(3) column.
struct TrackedPoint {
  int id = -1;
  PointKind kind = PointKind::kContact;
};

/// Filter belief: group state X (columns ordered v, p, then tracked points),
/// bias vector, covariance over (ξ_R, ξ_v, ξ_p, ξ_d1.., ζ_g, ζ_a), the
/// error-frame tag and the world/robo-centric convention.
///
/// Value type; instances are cheap to copy and safe to hand to other threads.
class FilterBelief {
 public:
  FilterBelief();

  SEK3 X;             ///< group state, K+2 columns
  BiasVector bias;
  Eigen::MatrixXd P;  ///< (9+3K+6) square
  ErrorFrame frame = ErrorFrame::kRightInvariant;
  Convention convention = Convention::kWorldCentric;

  // -- dimensions and covariance block indices -------------------------------
  int num_points() const { return static_cast<int>(points_.size()); }
  int dim_p() const { return 15 + 3 * num_points(); }
  static constexpr int idx_rot() { return 0; }
  static constexpr int idx_vel() { return 3; }
  static constexpr int idx_pos() { return 6; }
  int idx_point(int slot) const { return 9 + 3 * slot; }
  int idx_bias() const { return 9 + 3 * num_points(); }

  // -- mean accessors ---------------------------------------------------------
  const Mat3& rotation() const { return X.rotation(); }
  const Vec3& velocity() const { return X.col(0); }
  const Vec3& position() const { return X.col(1); }
  const Vec3& point(int slot) const { return X.col(2 + slot); }

  // -- registry ---------------------------------------------------------------
  const std::vector<TrackedPoint>& points() const { return points_; }
  bool has_point(int id) const { return point_slot(id) >= 0; }
  /// Column slot (0-based among tracked points) or -1 when unknown.
  int point_slot(int id) const;
  TrackedPoint point_info(int slot) const { return points_.at(static_cast<size_t>(slot)); }

  /// Appends a registry entry; the caller is responsible for keeping X and P
  /// consistent (used by the contacts module).
  void register_point(TrackedPoint point) { points_.push_back(point); }
  void unregister_slot(int slot) { points_.erase(points_.begin() + slot); }

  // -- numerical upkeep -------------------------------------------------------
  void symmetrize() { P = (0.5 * (P + P.transpose())).eval(); }
  /// Counts propagation steps; re-projects R onto SO(3) every 256 steps to
  /// bound orthogonality drift in long runs.
  void tick_propagation();

  /// Checks the type invariants (symmetry, PSD within -1e-9, dimensions).
  /// Returns an empty string when valid, else a description of the violation.
  std::string validate() const;

 private:
  std::vector<TrackedPoint> points_;
  int steps_since_projection_ = 0;
};

/// Constructs a K=0 belief. Throws std::invalid_argument on dimension mismatch
/// or when P0 has an eigenvalue below -1e-9.
FilterBelief new_belief(const Mat3& R0, const Vec3& v0, const Vec3& p0,
                        const BiasVector& theta0, const Eigen::MatrixXd& P0,
                        ErrorFrame frame, Convention convention);

/// Invariant group error between the belief mean and a true state, plus the
/// additive bias error θ̂ - θ. Right frame: log(X̂ X⁻¹); left: log(X⁻¹ X̂).
std::pair<Eigen::VectorXd, Vec6> invariant_error(const FilterBelief& belief,
                                                 const SEK3& x_true,
                                                 const BiasVector& theta_true);

/// Exact switch between the right- and left-invariant covariance forms:
/// P' = J P Jᵀ with J = blockdiag(Ad_X̂^{±1}, I₆); the mean is unchanged.
FilterBelief switch_error_frame(const FilterBelief& belief);

}  // namespace inekf
