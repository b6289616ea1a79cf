#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "inekf/analysis.hpp"
#include "inekf/correction.hpp"
#include "inekf/sim.hpp"

namespace inekf {

enum class FilterKind { kInekfRight, kInekfLeft, kInekfRobocentric, kQekf };

/// Initial mean estimate plus the Table-style diagonal standard deviations.
struct InitialStd {
  double orientation = 30.0 * M_PI / 180.0;  ///< rad
  double velocity = 1.0;                     ///< m/s
  double position = 0.1;                     ///< m
  double foot = 0.1;                         ///< m, pre-registered feet only
  double gyro_bias = 0.005;                  ///< rad/s
  double accel_bias = 0.05;                  ///< m/s^2
};

struct InitialState {
  Mat3 R = Mat3::Identity();
  Vec3 v = Vec3::Zero();
  Vec3 p = Vec3::Zero();
  BiasVector bias;
  InitialStd std;
  /// Full 15x15 right-invariant covariance override (anisotropic priors).
  Eigen::MatrixXd P0_override;
};

/// Measurement models for the exogenous record types; the invariant filter
/// consumes them, the QEKF baseline ignores them.
struct ExogenousModels {
  double landmark_std = 0.05;  ///< m, relative landmark position
  double gps_std = 0.3;        ///< m
  double mag_std = 0.05;       ///< normalized field units
  Vec3 mag_field = Vec3(std::cos(1.2049), 0.0, std::sin(1.2049));
};

struct ReplayConfig {
  FilterKind kind = FilterKind::kInekfRight;
  NoiseParams noise;
  GravityVec gravity;
  ConvergenceThresholds thresholds;
  CorrectionOptions correction;
  ExogenousModels exo;
  bool estimate_bias = true;  ///< false zeroes the bias covariance rows
  bool record_trajectory = false;
  /// Runs the belief invariants (symmetry, PSD within -1e-9) after every
  /// propagation and correction; test builds only, it is O(dim³) per step.
  bool validate_every_step = false;
};

struct TrajectorySample {
  double t = 0.0;
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();
  Vec3 velocity = Vec3::Zero();
  Vec3 position = Vec3::Zero();
  Vec6 bias = Vec6::Zero();
  Vec9 euclidean_variance = Vec9::Zero();  ///< diag of P_eucl (δφ, δv, δp)
};

struct ReplayResult {
  std::vector<ErrorSample> errors;
  std::vector<TrajectorySample> trajectory;
  double time_to_converge = -1.0;
  bool converged = false;
  double steady_roll_pitch = 0.0;  ///< RMS over the last quarter of the run
  double final_position_error = 0.0;
  /// Belief snapshots at requested times (world-centric right frame).
  std::vector<FilterBelief> snapshots;
  std::vector<QekfBelief> qekf_snapshots;
  int contacts_added = 0;
  int contacts_removed = 0;
  double min_p_eigenvalue = 0.0;  ///< tracked when validate_every_step is set
};

/// Diagonal initial covariance in the right-invariant coordinates, then
/// mapped to the filter's own frame/convention.
FilterBelief build_initial_belief(const InitialState& init, FilterKind kind,
                                  bool estimate_bias);
QekfBelief build_initial_qekf(const InitialState& init, bool estimate_bias);

/// Replays a sensor log through the selected filter: IMU records propagate,
/// encoder records drive forward-kinematic updates for contacts whose latest
/// flag is active, debounced contact edges add/remove tracked points, and
/// exogenous records (landmark, GPS, magnetometer) become invariant
/// observations. Errors are sampled at the truth records.
ReplayResult replay_log(const SensorLog& log, const BipedModel& robot,
                        const ReplayConfig& config, const InitialState& init,
                        const std::vector<double>& snapshot_times = {});

struct MonteCarloSpec {
  int runs = 100;
  uint64_t seed = 0;
  double orientation_range = 30.0 * M_PI / 180.0;  ///< uniform per Euler axis
  double velocity_range = 1.0;                     ///< uniform per axis, m/s
  /// Custom initialization sampler; when set it replaces the uniform ranges.
  std::function<InitialState(int run, SubstreamRng& rng)> init_sampler;
};

struct MonteCarloRun {
  int run = 0;
  bool converged = false;
  double time_to_converge = -1.0;
  double steady_roll_pitch = 0.0;
  double final_position_error = 0.0;
};

/// Runs the filter over the same log with randomized initial orientation and
/// velocity estimates. Deterministic for a fixed seed; runs execute in
/// parallel and are reported in run order.
std::vector<MonteCarloRun> monte_carlo(const SensorLog& log, const BipedModel& robot,
                                       const ReplayConfig& config,
                                       const MonteCarloSpec& spec);

/// Median of time_to_converge over converged runs; -1 when none converged.
double median_time_to_converge(const std::vector<MonteCarloRun>& runs);

struct LinTestPoint {
  double scale = 0.0;       ///< initial orientation error (s,s,s)
  double inekf_diff = 0.0;  ///< ‖ξ_true - ξ_prop‖ after the run
  double qekf_diff = 0.0;   ///< same in QEKF error coordinates
};

/// Deterministic log-linear exactness experiment: noise-free, bias-free
/// propagation for `duration` seconds at `rate` Hz with seeded random IMU
/// inputs, comparing the true error to the error propagated through each
/// filter's linearized dynamics.
std::vector<LinTestPoint> linearization_test(const std::vector<double>& scales,
                                             double duration, double rate,
                                             uint64_t seed,
                                             const GravityVec& gravity = {});

}  // namespace inekf
