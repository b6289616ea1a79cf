#include "inekf/replay.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>
#include <unsupported/Eigen/MatrixFunctions>

#include "inekf/contacts.hpp"

namespace inekf {

namespace {

double wrap_angle(double a) {
  while (a > M_PI) a -= 2.0 * M_PI;
  while (a < -M_PI) a += 2.0 * M_PI;
  return a;
}

// ZYX Euler angles of R = Rz(yaw) Ry(pitch) Rx(roll).
Vec3 euler_zyx(const Mat3& r) {
  const double pitch = -std::asin(std::clamp(r(2, 0), -1.0, 1.0));
  const double roll = std::atan2(r(2, 1), r(2, 2));
  const double yaw = std::atan2(r(1, 0), r(0, 0));
  return {roll, pitch, yaw};
}

ErrorSample make_error_sample(double t, const Mat3& R_hat, const Vec3& v_hat,
                              const Vec3& p_hat, const Mat3& R_true,
                              const Vec3& v_true, const Vec3& p_true) {
  const Vec3 e_hat = euler_zyx(R_hat), e_true = euler_zyx(R_true);
  ErrorSample s;
  s.t = t;
  const double droll = wrap_angle(e_hat[0] - e_true[0]);
  const double dpitch = wrap_angle(e_hat[1] - e_true[1]);
  s.roll_pitch = std::sqrt(droll * droll + dpitch * dpitch);
  s.yaw = wrap_angle(e_hat[2] - e_true[2]);
  s.body_velocity = (R_hat.transpose() * v_hat - R_true.transpose() * v_true).norm();
  s.position = (p_hat - p_true).norm();
  return s;
}

struct WorldMean {
  Mat3 R;
  Vec3 v;
  Vec3 p;
};

WorldMean world_mean(const FilterBelief& belief) {
  if (belief.convention == Convention::kWorldCentric) {
    return {belief.rotation(), belief.velocity(), belief.position()};
  }
  const SEK3 inv = belief.X.inverse();
  return {inv.rotation(), inv.col(0), inv.col(1)};
}

FilterBelief to_world_right(const FilterBelief& belief) {
  FilterBelief out = belief.convention == Convention::kRoboCentric
                         ? robocentric_to_world(belief)
                         : belief;
  if (out.frame != ErrorFrame::kRightInvariant) out = switch_error_frame(out);
  return out;
}

Eigen::VectorXd diag_from_std(const InitialStd& s, bool estimate_bias) {
  Eigen::VectorXd d(15);
  d << Vec3::Constant(s.orientation * s.orientation),
      Vec3::Constant(s.velocity * s.velocity), Vec3::Constant(s.position * s.position),
      Vec3::Constant(estimate_bias ? s.gyro_bias * s.gyro_bias : 0.0),
      Vec3::Constant(estimate_bias ? s.accel_bias * s.accel_bias : 0.0);
  return d;
}

}  // namespace

FilterBelief build_initial_belief(const InitialState& init, FilterKind kind,
                                  bool estimate_bias) {
  Eigen::MatrixXd p0 = init.P0_override.size() > 0
                           ? init.P0_override
                           : Eigen::MatrixXd(diag_from_std(init.std, estimate_bias)
                                                 .asDiagonal());
  if (!estimate_bias) {
    p0.bottomRows(6).setZero();
    p0.rightCols(6).setZero();
  }
  FilterBelief belief = new_belief(init.R, init.v, init.p, init.bias, p0,
                                   ErrorFrame::kRightInvariant,
                                   Convention::kWorldCentric);
  switch (kind) {
    case FilterKind::kInekfRight:
      return belief;
    case FilterKind::kInekfLeft:
      return switch_error_frame(belief);
    case FilterKind::kInekfRobocentric:
      return world_to_robocentric(belief);
    case FilterKind::kQekf:
      throw std::invalid_argument("build_initial_belief: use build_initial_qekf");
  }
  return belief;
}

QekfBelief build_initial_qekf(const InitialState& init, bool estimate_bias) {
  QekfBelief belief;
  belief.orientation = Eigen::Quaterniond(init.R).normalized();
  belief.velocity = init.v;
  belief.position = init.p;
  belief.bias = init.bias;
  belief.P = init.P0_override.size() > 0
                 ? init.P0_override
                 : Eigen::MatrixXd(diag_from_std(init.std, estimate_bias).asDiagonal());
  if (!estimate_bias) {
    belief.P.bottomRows(6).setZero();
    belief.P.rightCols(6).setZero();
  }
  return belief;
}

ReplayResult replay_log(const SensorLog& log, const BipedModel& robot,
                        const ReplayConfig& config, const InitialState& init,
                        const std::vector<double>& snapshot_times) {
  ReplayConfig cfg = config;
  if (!cfg.estimate_bias) {
    cfg.noise.gyro_bias_std = 0.0;
    cfg.noise.accel_bias_std = 0.0;
  }
  const bool qekf = cfg.kind == FilterKind::kQekf;

  FilterBelief belief;
  QekfBelief qbelief;
  if (qekf) {
    qbelief = build_initial_qekf(init, cfg.estimate_bias);
  } else {
    belief = build_initial_belief(init, cfg.kind, cfg.estimate_bias);
  }

  ReplayResult result;
  result.min_p_eigenvalue = std::numeric_limits<double>::infinity();
  double state_time = log.records.empty() ? 0.0 : log.records.front().t;
  bool have_imu = false;
  ImuSample last_imu;
  ContactTracker tracker;
  std::vector<bool> raw_flag(static_cast<size_t>(robot.num_legs()), false);
  std::vector<int> pending_adds;
  size_t next_snapshot = 0;

  auto validate_step = [&]() {
    if (!cfg.validate_every_step) return;
    const Eigen::MatrixXd& p = qekf ? qbelief.P : belief.P;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        Eigen::MatrixXd(0.5 * (p + p.transpose())));
    result.min_p_eigenvalue =
        std::min(result.min_p_eigenvalue, es.eigenvalues().minCoeff());
  };

  auto propagate_to = [&](double t) {
    double gap = t - state_time;
    if (gap <= 0.0) return;
    if (!have_imu || gap > 0.1) {  // no input yet or stale data: do not integrate
      state_time = t;
      return;
    }
    ImuSample step = last_imu;
    step.dt = gap;
    if (qekf) {
      qbelief = qekf_predict(qbelief, step, cfg.noise, cfg.gravity);
    } else {
      belief = propagate(belief, step, cfg.noise, cfg.gravity);
    }
    state_time = t;
    validate_step();
  };

  for (const auto& rec : log.records) {
    switch (rec.type) {
      case SensorRecord::Type::kTruth: {
        propagate_to(rec.t);
        const Mat3 R_true = rec.quat.toRotationMatrix();
        WorldMean mean;
        if (qekf) {
          mean = {qbelief.rotation(), qbelief.velocity, qbelief.position};
        } else {
          mean = world_mean(belief);
        }
        result.errors.push_back(make_error_sample(rec.t, mean.R, mean.v, mean.p, R_true,
                                                  rec.vec_a, rec.vec_b));
        if (next_snapshot < snapshot_times.size() &&
            rec.t >= snapshot_times[next_snapshot] - 1e-9) {
          if (qekf) {
            result.qekf_snapshots.push_back(qbelief);
          } else {
            result.snapshots.push_back(to_world_right(belief));
          }
          ++next_snapshot;
        }
        break;
      }
      case SensorRecord::Type::kImu: {
        propagate_to(rec.t);
        // The trajectory is sampled on the filter clock so that logs without
        // ground-truth rows still produce output.
        if (cfg.record_trajectory) {
          TrajectorySample ts;
          ts.t = rec.t;
          if (qekf) {
            ts.orientation = qbelief.orientation;
            ts.velocity = qbelief.velocity;
            ts.position = qbelief.position;
            ts.bias = qbelief.bias.stacked();
            const Mat3 R = qbelief.rotation();
            const Vec3 phi = log_so3(R);
            Mat9 j = Mat9::Identity();
            j.block<3, 3>(0, 0) = -gamma(1, phi).partialPivLu().solve(R);
            ts.euclidean_variance =
                (j * qbelief.P.topLeftCorner<9, 9>() * j.transpose()).diagonal();
          } else {
            const WorldMean mean = world_mean(belief);
            ts.orientation = Eigen::Quaterniond(mean.R);
            ts.velocity = mean.v;
            ts.position = mean.p;
            ts.bias = belief.bias.stacked();
            ts.euclidean_variance =
                right_invariant_to_euclidean(to_world_right(belief)).diagonal();
          }
          result.trajectory.push_back(ts);
        }
        last_imu.gyro = rec.vec_a;
        last_imu.accel = rec.vec_b;
        have_imu = true;
        break;
      }
      case SensorRecord::Type::kContact: {
        propagate_to(rec.t);
        if (rec.id < 0 || rec.id >= robot.num_legs()) break;
        raw_flag[static_cast<size_t>(rec.id)] = rec.flag;
        const int edge = tracker.observe(rec.id, rec.flag);
        if (edge > 0) {
          pending_adds.push_back(rec.id);
        } else if (edge < 0) {
          pending_adds.erase(std::remove(pending_adds.begin(), pending_adds.end(), rec.id),
                             pending_adds.end());
          if (qekf) {
            if (qbelief.point_slot(rec.id) >= 0) {
              qbelief = qekf_remove_contact(qbelief, rec.id);
              ++result.contacts_removed;
            }
          } else if (belief.has_point(rec.id)) {
            belief = remove_contact(belief, rec.id);
            ++result.contacts_removed;
          }
          validate_step();
        }
        break;
      }
      case SensorRecord::Type::kEncoder: {
        propagate_to(rec.t);
        if (rec.values.size() != robot.encoder_dim()) break;
        for (int id : pending_adds) {
          const Eigen::VectorXd joints = robot.leg_joints(rec.values, id);
          if (qekf) {
            if (qbelief.point_slot(id) < 0) {
              qbelief = qekf_add_contact(qbelief, id, joints, robot.leg(id), cfg.noise);
              ++result.contacts_added;
            }
          } else if (!belief.has_point(id)) {
            belief = add_contact(belief, id, joints, robot.leg(id), cfg.noise);
            ++result.contacts_added;
          }
          validate_step();
        }
        pending_adds.clear();

        if (qekf) {
          for (int id = 0; id < robot.num_legs(); ++id) {
            if (!raw_flag[static_cast<size_t>(id)] || qbelief.point_slot(id) < 0) continue;
            qbelief = qekf_update(qbelief, robot.leg_joints(rec.values, id), id,
                                  robot.leg(id), cfg.noise)
                          .belief;
          }
        } else {
          std::vector<InvariantObservation> obs;
          for (int id = 0; id < robot.num_legs(); ++id) {
            if (!raw_flag[static_cast<size_t>(id)] || !belief.has_point(id)) continue;
            obs.push_back(fk_position_observation(
                belief, robot.leg_joints(rec.values, id), id, robot.leg(id), cfg.noise));
          }
          if (!obs.empty()) {
            belief = apply_observations(belief, obs, cfg.correction).belief;
          }
        }
        validate_step();
        break;
      }
      case SensorRecord::Type::kLandmark: {
        if (qekf) break;
        propagate_to(rec.t);
        const Mat3 cov = cfg.exo.landmark_std * cfg.exo.landmark_std * Mat3::Identity();
        if (!belief.has_point(rec.id)) {
          belief = add_landmark(belief, rec.id, rec.vec_a, cov);
        } else {
          ObservationPayload payload;
          payload.id = rec.id;
          payload.value = rec.vec_a;
          payload.cov = cov;
          const auto obs =
              build_observation(ObservationKind::kLandmarkRelative, payload, belief);
          belief = apply_observations(belief, {&obs, 1}, cfg.correction).belief;
        }
        break;
      }
      case SensorRecord::Type::kGps: {
        if (qekf) break;
        propagate_to(rec.t);
        ObservationPayload payload;
        payload.value = rec.vec_a;
        payload.cov = cfg.exo.gps_std * cfg.exo.gps_std * Mat3::Identity();
        const auto obs = build_observation(ObservationKind::kGps, payload, belief);
        belief = apply_observations(belief, {&obs, 1}, cfg.correction).belief;
        break;
      }
      case SensorRecord::Type::kMag: {
        if (qekf) break;
        propagate_to(rec.t);
        ObservationPayload payload;
        payload.value = rec.vec_a;
        payload.reference = cfg.exo.mag_field;
        payload.cov = cfg.exo.mag_std * cfg.exo.mag_std * Mat3::Identity();
        const auto obs = build_observation(ObservationKind::kMagnetometer, payload, belief);
        belief = apply_observations(belief, {&obs, 1}, cfg.correction).belief;
        break;
      }
    }
  }

  if (!cfg.validate_every_step) result.min_p_eigenvalue = 0.0;
  result.time_to_converge = time_to_converge(result.errors, cfg.thresholds);
  result.converged = result.time_to_converge >= 0.0;
  if (!result.errors.empty()) {
    const double t_end = result.errors.back().t;
    double acc = 0.0;
    int count = 0;
    for (const auto& e : result.errors) {
      if (e.t >= 0.75 * t_end) {
        acc += e.roll_pitch * e.roll_pitch;
        ++count;
      }
    }
    result.steady_roll_pitch = count > 0 ? std::sqrt(acc / count) : 0.0;
    result.final_position_error = result.errors.back().position;
  }
  return result;
}

std::vector<MonteCarloRun> monte_carlo(const SensorLog& log, const BipedModel& robot,
                                       const ReplayConfig& config,
                                       const MonteCarloSpec& spec) {
  // Truth initial state seeds the unobservable part of the estimate.
  Vec3 v_true = Vec3::Zero(), p_true = Vec3::Zero();
  for (const auto& rec : log.records) {
    if (rec.type == SensorRecord::Type::kTruth) {
      v_true = rec.vec_a;
      p_true = rec.vec_b;
      break;
    }
  }

  std::vector<InitialState> inits(static_cast<size_t>(spec.runs));
  for (int run = 0; run < spec.runs; ++run) {
    SubstreamRng rng =
        make_stream(spec.seed, NoiseStream::kMonteCarlo, static_cast<uint64_t>(run));
    if (spec.init_sampler) {
      inits[static_cast<size_t>(run)] = spec.init_sampler(run, rng);
      continue;
    }
    const double roll = rng.uniform(-spec.orientation_range, spec.orientation_range);
    const double pitch = rng.uniform(-spec.orientation_range, spec.orientation_range);
    const double yaw = rng.uniform(-spec.orientation_range, spec.orientation_range);
    InitialState init;
    init.R = (Eigen::AngleAxisd(yaw, Vec3::UnitZ()) *
              Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
              Eigen::AngleAxisd(roll, Vec3::UnitX()))
                 .toRotationMatrix();
    init.v = Vec3(rng.uniform(-spec.velocity_range, spec.velocity_range),
                  rng.uniform(-spec.velocity_range, spec.velocity_range),
                  rng.uniform(-spec.velocity_range, spec.velocity_range));
    init.p = p_true;
    inits[static_cast<size_t>(run)] = init;
  }

  std::vector<MonteCarloRun> results(static_cast<size_t>(spec.runs));
  std::atomic<int> next{0};
  const unsigned n_threads =
      std::max(1u, std::min(std::thread::hardware_concurrency(), 16u));
  auto worker = [&]() {
    for (;;) {
      const int run = next.fetch_add(1);
      if (run >= spec.runs) break;
      const ReplayResult r = replay_log(log, robot, config, inits[static_cast<size_t>(run)]);
      MonteCarloRun& out = results[static_cast<size_t>(run)];
      out.run = run;
      out.converged = r.converged;
      out.time_to_converge = r.time_to_converge;
      out.steady_roll_pitch = r.steady_roll_pitch;
      out.final_position_error = r.final_position_error;
    }
  };
  std::vector<std::thread> pool;
  for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  return results;
}

double median_time_to_converge(const std::vector<MonteCarloRun>& runs) {
  std::vector<double> times;
  for (const auto& r : runs) {
    if (r.converged) times.push_back(r.time_to_converge);
  }
  if (times.empty()) return -1.0;
  std::sort(times.begin(), times.end());
  const size_t n = times.size();
  return n % 2 == 1 ? times[n / 2] : 0.5 * (times[n / 2 - 1] + times[n / 2]);
}

std::vector<LinTestPoint> linearization_test(const std::vector<double>& scales,
                                             double duration, double rate,
                                             uint64_t seed, const GravityVec& gravity) {
  const double dt = 1.0 / rate;
  const int steps = static_cast<int>(std::llround(duration * rate));

  // Shared random input sequence across all sweep points.
  SubstreamRng rng = make_stream(seed, NoiseStream::kInit);
  std::vector<ImuSample> inputs(static_cast<size_t>(steps));
  for (auto& u : inputs) {
    u.gyro = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    u.accel = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)) -
              gravity.g;
    u.dt = dt;
  }

  // Constant bias-free right-invariant transition matrix.
  Eigen::Matrix<double, 9, 9> phi_r = Eigen::Matrix<double, 9, 9>::Identity();
  phi_r.block<3, 3>(3, 0) = skew(gravity.g) * dt;
  phi_r.block<3, 3>(6, 0) = 0.5 * skew(gravity.g) * dt * dt;
  phi_r.block<3, 3>(6, 3) = Mat3::Identity() * dt;

  const BiasVector zero_bias;
  std::vector<LinTestPoint> out;
  for (double s : scales) {
    Eigen::VectorXd xi0 = Eigen::VectorXd::Zero(9);
    xi0.head<3>() = Vec3::Constant(s);

    SEK3 x_true = SEK3::identity(2);
    SEK3 x_hat = exp_sek3(xi0);  // right-invariant error exp(ξ₀) at identity truth
    Eigen::VectorXd xi_prop = xi0;

    Eigen::VectorXd e_prop(9);  // QEKF coordinates (δθ, δv, δp)
    e_prop.head<3>() = log_so3(x_hat.rotation());
    e_prop.segment<3>(3) = x_true.col(0) - x_hat.col(0);
    e_prop.segment<3>(6) = x_true.col(1) - x_hat.col(1);

    for (const auto& u : inputs) {
      Eigen::Matrix<double, 9, 9> a_q = Eigen::Matrix<double, 9, 9>::Zero();
      a_q.block<3, 3>(0, 0) = -skew(u.gyro);
      a_q.block<3, 3>(3, 0) = x_hat.rotation() * skew(u.accel);
      a_q.block<3, 3>(6, 3) = Mat3::Identity();
      e_prop = (a_q * dt).exp() * e_prop;

      x_true = propagate_mean_view(x_true, zero_bias, u, gravity);
      x_hat = propagate_mean_view(x_hat, zero_bias, u, gravity);
      xi_prop = phi_r * xi_prop;
    }

    LinTestPoint point;
    point.scale = s;
    point.inekf_diff = (log_sek3(x_hat * x_true.inverse()) - xi_prop).norm();
    Eigen::VectorXd e_true(9);
    e_true.head<3>() = log_so3(x_true.rotation().transpose() * x_hat.rotation());
    e_true.segment<3>(3) = x_true.col(0) - x_hat.col(0);
    e_true.segment<3>(6) = x_true.col(1) - x_hat.col(1);
    point.qekf_diff = (e_true - e_prop).norm();
    out.push_back(point);
  }
  return out;
}

}  // namespace inekf
