#pragma once

#include <Eigen/Core>
#include <span>

#include "inekf/dynamics.hpp"
#include "inekf/kinematics.hpp"
#include "inekf/state.hpp"

namespace inekf {

/// One 3-row invariant observation block. The stacked Y and constant b of the
/// invariant observation form are reduced at build time to the 3-vector
/// innovation Π(X̂Y - b) (right form) or Π(X̂⁻¹Y - b) (left form), expressed so
/// that innovation ≈ -Hξ + noise to first order.
struct InvariantObservation {
  ErrorFrame form = ErrorFrame::kRightInvariant;
  Vec3 innovation = Vec3::Zero();
  Mat3 noise = Mat3::Zero();  ///< N̄, already rotated into the update frame
  Eigen::MatrixXd H;          ///< 3 x dim_p
};

struct CorrectionResult {
  FilterBelief belief;
  bool applied = false;
};

struct CorrectionOptions {
  /// Reject updates whose innovation covariance is near-singular.
  double max_condition_number = 1e12;
  /// Optional Mahalanobis gate per 3-row block (99.7% chi-square, 3 dof).
  bool innovation_gate = false;
  double gate_threshold = 13.93;
};

/// Forward-kinematic contact-position observation. World-centric beliefs get
/// the right-invariant form with H = [0 0 -I .. I .. 0 0]; robo-centric
/// beliefs the left-invariant form with the signs negated.
/// Throws std::invalid_argument for an unregistered contact_id.
InvariantObservation fk_position_observation(const FilterBelief& belief,
                                             const Eigen::VectorXd& alpha,
                                             int contact_id, const KinematicsModel& kin,
                                             const NoiseParams& noise);

enum class ObservationKind { kLandmarkRelative, kLandmarkAbsolute, kMagnetometer, kGps };

/// Payload of an exogenous observation. `value` is the measured vector;
/// `reference` carries the known prior (landmark position for the absolute
/// form, field vector for the magnetometer); `id` names a tracked landmark
/// for the relative form.
struct ObservationPayload {
  int id = -1;
  Vec3 value = Vec3::Zero();
  Vec3 reference = Vec3::Zero();
  Mat3 cov = Mat3::Identity();
};

/// H-matrix builder for the Tables of world- and robo-centric observations;
/// the invariant form (left/right) follows the belief's convention.
InvariantObservation build_observation(ObservationKind kind,
                                       const ObservationPayload& payload,
                                       const FilterBelief& belief);

/// Right-invariant update X̂⁺ = exp(K^ξ z) X̂, θ̂⁺ = θ̂ + K^ζ z with the Joseph
/// covariance form. A left-frame belief is switched to the right frame for
/// the update and back afterwards. Observations are stacked into one batched
/// update. Returns applied=false (belief unchanged) when S is ill-conditioned.
CorrectionResult update_right(const FilterBelief& belief,
                              std::span<const InvariantObservation> observations,
                              const CorrectionOptions& options = {});
CorrectionResult update_right(const FilterBelief& belief,
                              const InvariantObservation& observation,
                              const CorrectionOptions& options = {});

/// Left-invariant update X̂⁺ = X̂ exp(K^ξ z); mirror of update_right.
CorrectionResult update_left(const FilterBelief& belief,
                             std::span<const InvariantObservation> observations,
                             const CorrectionOptions& options = {});
CorrectionResult update_left(const FilterBelief& belief,
                             const InvariantObservation& observation,
                             const CorrectionOptions& options = {});

/// Dispatches on observation form; all observations in one call must share it.
CorrectionResult apply_observations(const FilterBelief& belief,
                                    std::span<const InvariantObservation> observations,
                                    const CorrectionOptions& options = {});

}  // namespace inekf
