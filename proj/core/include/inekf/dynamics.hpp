#pragma once

#include <Eigen/Core>

#include "inekf/state.hpp"

namespace inekf {

/// One IMU sample held constant over dt (zero-order hold).
struct ImuSample {
  Vec3 gyro = Vec3::Zero();   ///< rad/s, body frame
  Vec3 accel = Vec3::Zero();  ///< m/s^2, body frame
  double dt = 0.0;            ///< seconds, must lie in (0, 0.1]
};

/// Continuous-time noise densities, one scalar std-dev per channel.
struct NoiseParams {
  double gyro_std = 0.002;        ///< rad/s
  double accel_std = 0.04;        ///< m/s^2
  double gyro_bias_std = 0.001;   ///< rad/s^2
  double accel_bias_std = 0.001;  ///< m/s^3
  double contact_std = 0.05;      ///< m/s
  double encoder_std = 1.0 * M_PI / 180.0;  ///< rad
};

struct GravityVec {
  Vec3 g = Vec3(0, 0, -9.81);
};

/// Exact zero-order-hold mean update of the world-centric model:
///   R+ = R Γ₀(ω̄Δt),  v+ = v + R Γ₁ ā Δt + g Δt,
///   p+ = p + v Δt + R Γ₂ ā Δt² + ½ g Δt²,
/// with bias-corrected inputs ω̄ = ω̃ - b̂_g, ā = ã - b̂_a; tracked points and
/// biases are held constant. Throws on dt outside (0, 0.1].
FilterBelief propagate_mean(const FilterBelief& belief, const ImuSample& imu,
                            const GravityVec& gravity = {});

/// Mean-only ZOH step on a bare group state (world-centric model); shared by
/// the invariant filter and the quaternion baseline.
SEK3 propagate_mean_view(const SEK3& x, const BiasVector& bias, const ImuSample& imu,
                         const GravityVec& gravity = {});

/// Exact ZOH mean update of the robo-centric (inverse-state) model.
FilterBelief propagate_mean_robocentric(const FilterBelief& belief, const ImuSample& imu,
                                        const GravityVec& gravity = {});

/// Analytical world-centric left-invariant state transition matrix
/// Φˡ = exp_m(Aˡ Δt), dimension 15+3K. Tracked-point diagonal blocks are
/// Γ₀ᵀ(ω̄Δt); bias columns use the Γ/Ψ closed forms.
Eigen::MatrixXd phi_left(const ImuSample& imu, const BiasVector& theta_hat,
                         int num_points);

/// Closed forms of Ψ₁ = ∫ skew(Γ₀(ω̄t)ā) Γ₁(ω̄t) t dt and Ψ₂ = ∫ Ψ₁(t) dt over
/// [0, Δt]; truncated double series below ‖ω̄‖Δt < 1e-4.
Mat3 psi1(const Vec3& w, const Vec3& a, double dt);
Mat3 psi2(const Vec3& w, const Vec3& a, double dt);

/// Analytical world-centric right-invariant transition matrix. Needs the
/// propagated and the previous mean: Φʳ blocks reference v̂_{k+1}, p̂_{k+1},
/// d̂_{k+1} alongside R̂_k. Agrees with Ad_{X̂_{k+1}} exp_m(AˡΔt) Ad_{X̂_k}⁻¹.
Eigen::MatrixXd phi_right(const FilterBelief& next_mean, const FilterBelief& prev_mean,
                          const ImuSample& imu, const GravityVec& gravity = {});

/// Continuous noise covariance Cov(w) in tangent ordering
/// (ξ_R, ξ_v, ξ_p, ξ_d.., ζ_g, ζ_a); landmark rows carry no process noise.
Eigen::MatrixXd process_noise_cov(const FilterBelief& belief, const NoiseParams& noise);

/// Discrete noise approximation Q_d = Φ Q̄ Φᵀ Δt.
Eigen::MatrixXd discrete_noise(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& qbar,
                               double dt);

/// Exact discrete noise covariance ∫ Φ(t_{k+1},t) Q̄ Φ(t_{k+1},t)ᵀ dt by
/// quadrature; test/diagnostic path only, not used by propagate().
Eigen::MatrixXd discrete_noise_exact(const FilterBelief& belief, const ImuSample& imu,
                                     const NoiseParams& noise,
                                     const GravityVec& gravity = {}, int panels = 64);

/// The discrete state transition matrix propagate() applies for this belief's
/// frame and convention (the left/right roles swap between the world- and
/// robo-centric forms).
Eigen::MatrixXd transition_matrix(const FilterBelief& belief, const ImuSample& imu,
                                  const GravityVec& gravity = {});

/// Full propagation step: ZOH mean update plus P ← Φ P Φᵀ + Q_d with Φ and Q̄
/// chosen by the belief's error frame and convention (the left/right roles
/// swap between the world- and robo-centric forms).
FilterBelief propagate(const FilterBelief& belief, const ImuSample& imu,
                       const NoiseParams& noise, const GravityVec& gravity = {});

/// Stacked discrete observability matrix [H; HΦ; ...; HΦ^{blocks-1}] of the
/// bias-free world-centric right-invariant system at the belief's state
/// estimate, for a single tracked contact.
Eigen::MatrixXd observability_matrix(const FilterBelief& belief, const ImuSample& imu,
                                     int blocks, const GravityVec& gravity = {});

}  // namespace inekf
