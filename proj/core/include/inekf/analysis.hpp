#pragma once

#include <Eigen/Core>

#include "inekf/qekf.hpp"
#include "inekf/state.hpp"

namespace inekf {

using Mat9 = Eigen::Matrix<double, 9, 9>;
using Vec9 = Eigen::Matrix<double, 9, 1>;

/// First-order map from the right-invariant base covariance to the Euclidean
/// error covariance over (δφ, δv, δp), with δφ = φ - φ̂ in exponential
/// coordinates: P_eucl = J P J^T,
///   J = [ -Γ₁⁻¹(φ̂)   0   0
///          skew(v̂)   -I   0
///          skew(p̂)    0  -I ].
/// Throws std::domain_error when the orientation angle is within 1e-3 of pi.
Mat9 right_invariant_to_euclidean(const FilterBelief& belief);

/// The Jacobian J above, exposed for sampling-based validation.
Mat9 euclidean_error_jacobian(const FilterBelief& belief);

/// First-order conversion of QEKF error coordinates (δθ, δv, δp, δd..) into
/// the right-invariant tangent (ξ_R, ξ_v, ξ_p, ξ_d..):
///   ξ_R = R̂ δθ,  ξ_v = -δv + skew(v̂) ξ_R,  ξ_p = -δp + skew(p̂) ξ_R, ...
/// evaluated at the belief's mean.
Eigen::VectorXd qekf_error_to_invariant(const Eigen::VectorXd& qekf_errors,
                                        const FilterBelief& belief);

/// Inverse of qekf_error_to_invariant (same first-order accuracy).
Eigen::VectorXd invariant_to_qekf_error(const Eigen::VectorXd& xi,
                                        const FilterBelief& belief);

/// World-centric <-> robo-centric conversion: the mean inverts (X ↔ X⁻¹),
/// the error-frame tag flips (right ↔ left, the exact correspondence), and
/// the covariance maps through the differential of inversion, ξ ↦ -ξ.
FilterBelief world_to_robocentric(const FilterBelief& belief);
FilterBelief robocentric_to_world(const FilterBelief& belief);

/// Convergence detection thresholds for the Monte-Carlo experiments.
struct ConvergenceThresholds {
  double roll_pitch = 2.0 * M_PI / 180.0;  ///< rad
  double body_velocity = 0.05;             ///< m/s
  double hold_time = 0.2;                  ///< s
};

struct ErrorSample {
  double t = 0.0;
  double roll_pitch = 0.0;     ///< norm of (φ_err_x, φ_err_y)
  double body_velocity = 0.0;  ///< norm of body-frame velocity error
  double position = 0.0;       ///< norm of world position error
  double yaw = 0.0;
};

/// First time after which every sample stays below the thresholds for the
/// hold duration; negative when the run never converges.
double time_to_converge(const std::vector<ErrorSample>& errors,
                        const ConvergenceThresholds& thresholds);

}  // namespace inekf
