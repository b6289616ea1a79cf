#include "inekf/sim.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace inekf {

namespace {

struct Smooth {
  double value = 0.0;
  double d1 = 0.0;
};

// C1 smoothstep of t/width clamped to [0,1].
Smooth smoothstep(double t, double width) {
  if (width <= 0.0 || t >= width) return {1.0, 0.0};
  if (t <= 0.0) return {0.0, 0.0};
  const double u = t / width;
  return {u * u * (3.0 - 2.0 * u), 6.0 * u * (1.0 - u) / width};
}

// Integral of smoothstep(t/width) from 0 to t.
double smoothstep_integral(double t, double width) {
  if (width <= 0.0) return std::max(t, 0.0);
  if (t <= 0.0) return 0.0;
  if (t >= width) return 0.5 * width + (t - width);
  const double u = t / width;
  return width * (u * u * u - 0.5 * u * u * u * u);
}

// Analytic body trajectory: forward speed ramp, initial drop, speed-scaled
// vertical bobbing and roll/pitch sway. All derivatives are closed-form.
class BodySpline {
 public:
  BodySpline(const TrajectorySpec& spec) : spec_(spec) {
    gait_freq_ = 2.0 * M_PI / (2.0 * spec.gait.step_period);
  }

  Vec3 position(double t) const {
    const double x = spec_.speed.target_speed *
                     smoothstep_integral(t, spec_.speed.ramp_time);
    const double drop = -spec_.speed.drop_depth *
                        smoothstep(t, spec_.speed.drop_time).value;
    const double bob = spec_.bob_amplitude * fraction(t).value * std::sin(2.0 * gait_freq_ * t);
    return {x, 0.0, spec_.body_height + drop + bob};
  }

  Vec3 velocity(double t) const {
    const Smooth f = fraction(t);
    const double vx = spec_.speed.target_speed * smoothstep(t, spec_.speed.ramp_time).value;
    const double dz_drop = -spec_.speed.drop_depth * smoothstep(t, spec_.speed.drop_time).d1;
    const double dz_bob = spec_.bob_amplitude *
                          (f.d1 * std::sin(2.0 * gait_freq_ * t) +
                           f.value * 2.0 * gait_freq_ * std::cos(2.0 * gait_freq_ * t));
    return {vx, 0.0, dz_drop + dz_bob};
  }

  // Roll/pitch sway; yaw held at zero. Returns angles and their rates.
  void euler(double t, Vec3* rpy, Vec3* rpy_rate) const {
    const Smooth f = fraction(t);
    const double a = spec_.sway_amplitude;
    const double s1 = std::sin(gait_freq_ * t), c1 = std::cos(gait_freq_ * t);
    const double s2 = std::sin(2.0 * gait_freq_ * t), c2 = std::cos(2.0 * gait_freq_ * t);
    (*rpy)[0] = a * f.value * s1;
    (*rpy)[1] = 0.5 * a * f.value * s2;
    (*rpy)[2] = 0.0;
    (*rpy_rate)[0] = a * (f.d1 * s1 + f.value * gait_freq_ * c1);
    (*rpy_rate)[1] = 0.5 * a * (f.d1 * s2 + f.value * 2.0 * gait_freq_ * c2);
    (*rpy_rate)[2] = 0.0;
  }

  Mat3 rotation(double t) const {
    Vec3 rpy, rate;
    euler(t, &rpy, &rate);
    return (Eigen::AngleAxisd(rpy[2], Vec3::UnitZ()) *
            Eigen::AngleAxisd(rpy[1], Vec3::UnitY()) *
            Eigen::AngleAxisd(rpy[0], Vec3::UnitX()))
        .toRotationMatrix();
  }

 private:
  // Motion amplitude scale: zero at rest so a zero-speed spec is exactly static.
  Smooth fraction(double t) const {
    if (spec_.speed.target_speed == 0.0) return {0.0, 0.0};
    return smoothstep(t, spec_.speed.ramp_time);
  }

  TrajectorySpec spec_;
  double gait_freq_;
};

// Gait schedule: leg i begins its k-th stance at (2k + i) * step_period and
// holds it for stance_fraction * step_period.
struct StanceWindow {
  double touchdown;
  double liftoff;
  Vec3 foothold;
};

class GaitSchedule {
 public:
  GaitSchedule(const TrajectorySpec& spec, const BodySpline& spline,
               const BipedModel& robot)
      : standing_(spec.speed.target_speed == 0.0) {
    const double period = spec.gait.step_period;
    const double stance = spec.gait.stance_fraction * period;
    for (int leg = 0; leg < robot.num_legs(); ++leg) {
      // Nominal ground point below the zero-pose foot.
      const Vec3 zero_foot = robot.leg(leg).position(Eigen::Vector3d::Zero());
      std::vector<StanceWindow>& w = windows_[leg];
      for (double td = leg * period; td < spec.duration + 2.0 * period; td += 2.0 * period) {
        const double mid = td + 0.5 * stance;
        w.push_back({td, td + stance,
                     {spline.position(mid).x() + zero_foot.x(), zero_foot.y(), 0.0}});
      }
      // Virtual pre-first foothold so an early swing has a start point.
      prior_foothold_[leg] =
          Vec3(spline.position(0.0).x() + zero_foot.x(), zero_foot.y(), 0.0);
    }
  }

  bool in_stance(int leg, double t) const {
    if (standing_) return true;  // a stationary robot keeps both feet planted
    for (const auto& w : windows_[leg]) {
      if (t >= w.touchdown && t < w.liftoff) return true;
    }
    return false;
  }

  // World foot position at time t: the foothold during stance, a cycloidal
  // arc between footholds during swing.
  Vec3 foot_position(int leg, double t, double swing_height) const {
    if (standing_) return prior_foothold_[leg];
    const auto& w = windows_[leg];
    for (size_t i = 0; i < w.size(); ++i) {
      if (t >= w[i].touchdown && t < w[i].liftoff) return w[i].foothold;
      if (t < w[i].touchdown) {
        const Vec3 from = i == 0 ? prior_foothold_[leg] : w[i - 1].foothold;
        const double start = i == 0 ? 0.0 : w[i - 1].liftoff;
        const double span = w[i].touchdown - start;
        const double tau = span > 0.0 ? std::clamp((t - start) / span, 0.0, 1.0) : 1.0;
        const double along = tau - std::sin(2.0 * M_PI * tau) / (2.0 * M_PI);
        Vec3 p = from + (w[i].foothold - from) * along;
        p.z() += 0.5 * swing_height * (1.0 - std::cos(2.0 * M_PI * tau));
        return p;
      }
    }
    return w.back().foothold;
  }

 private:
  bool standing_;
  std::vector<StanceWindow> windows_[2];
  Vec3 prior_foothold_[2];
};

}  // namespace

SensorLog generate(const TrajectorySpec& spec, const BipedModel& robot,
                   const NoiseParams& noise, const GravityVec& gravity) {
  if (spec.imu_rate_hz <= 0.0 || spec.encoder_rate_hz <= 0.0) {
    throw std::invalid_argument("generate: rates must be positive");
  }
  if (spec.gait.stance_fraction <= 0.0 || spec.gait.stance_fraction > 1.0) {
    throw std::invalid_argument("generate: stance fraction must lie in (0,1]");
  }
  const double dt = 1.0 / spec.imu_rate_hz;
  const int n_steps = static_cast<int>(std::llround(spec.duration * spec.imu_rate_hz));
  const int enc_every =
      std::max(1, static_cast<int>(std::llround(spec.imu_rate_hz / spec.encoder_rate_hz)));

  const BodySpline spline(spec);
  const GaitSchedule schedule(spec, spline, robot);

  SubstreamRng rng_gyro = make_stream(spec.seed, NoiseStream::kGyro);
  SubstreamRng rng_accel = make_stream(spec.seed, NoiseStream::kAccel);
  SubstreamRng rng_bg = make_stream(spec.seed, NoiseStream::kGyroBias);
  SubstreamRng rng_ba = make_stream(spec.seed, NoiseStream::kAccelBias);
  SubstreamRng rng_enc = make_stream(spec.seed, NoiseStream::kEncoder);

  const double sqrt_rate = std::sqrt(spec.imu_rate_hz);
  const double sqrt_dt = std::sqrt(dt);

  SensorLog log;
  log.encoder_dim = robot.encoder_dim();
  log.records.reserve(static_cast<size_t>(2 * n_steps + 4 * n_steps / enc_every + 8));

  Mat3 R = spline.rotation(0.0);
  Vec3 v = spline.velocity(0.0);
  Vec3 p = spline.position(0.0);
  Vec3 bias_g = Vec3::Zero(), bias_a = Vec3::Zero();
  Eigen::VectorXd alpha_prev = Eigen::VectorXd::Zero(robot.encoder_dim());
  bool alpha_seeded = false;

  for (int k = 0; k <= n_steps; ++k) {
    const double t = k * dt;

    SensorRecord truth;
    truth.type = SensorRecord::Type::kTruth;
    truth.t = t;
    truth.quat = Eigen::Quaterniond(R);
    truth.vec_a = v;
    truth.vec_b = p;
    log.records.push_back(truth);
    if (k == n_steps) break;

    // ZOH-exact inputs over [t, t+dt]: the discrete integration of these
    // reproduces the spline rotation and velocity without drift.
    const Mat3 R_next = spline.rotation(t + dt);
    const Vec3 v_next = spline.velocity(t + dt);
    const Vec3 w_bar = log_so3(R.transpose() * R_next) / dt;
    const Vec3 a_bar = gamma(1, w_bar * dt)
                           .partialPivLu()
                           .solve(R.transpose() * (v_next - v - gravity.g * dt)) /
                       dt;

    SensorRecord imu;
    imu.type = SensorRecord::Type::kImu;
    imu.t = t;
    imu.vec_a = w_bar + bias_g + rng_gyro.normal3(noise.gyro_std * sqrt_rate);
    imu.vec_b = a_bar + bias_a + rng_accel.normal3(noise.accel_std * sqrt_rate);
    log.records.push_back(imu);

    if (k % enc_every == 0) {
      for (int leg = 0; leg < robot.num_legs(); ++leg) {
        SensorRecord contact;
        contact.type = SensorRecord::Type::kContact;
        contact.t = t;
        contact.id = leg;
        contact.flag = schedule.in_stance(leg, t);
        log.records.push_back(contact);
      }
      Eigen::VectorXd alpha(robot.encoder_dim());
      for (int leg = 0; leg < robot.num_legs(); ++leg) {
        const Vec3 foot_world =
            schedule.foot_position(leg, t, spec.gait.swing_height);
        const Vec3 target = R.transpose() * (foot_world - p);
        Eigen::VectorXd joints = alpha_seeded
                                     ? Eigen::VectorXd(alpha_prev.segment<3>(3 * leg))
                                     : Eigen::VectorXd(Eigen::Vector3d(0.0, 0.3, -0.6));
        if (!robot.leg(leg).inverse(target, joints, 1e-12, 400)) {
          std::ostringstream oss;
          oss << "generate: IK target out of reach at t=" << t << " leg " << leg
              << " target [" << target.transpose() << "]";
          throw std::runtime_error(oss.str());
        }
        alpha.segment<3>(3 * leg) = joints;
      }
      alpha_prev = alpha;
      alpha_seeded = true;

      SensorRecord enc;
      enc.type = SensorRecord::Type::kEncoder;
      enc.t = t;
      enc.values = alpha;
      for (int i = 0; i < enc.values.size(); ++i) {
        enc.values[i] += noise.encoder_std * rng_enc.normal();
      }
      log.records.push_back(enc);
    }

    // Advance the truth by the exact ZOH step and the biases by their walks.
    const Vec3 phi = w_bar * dt;
    p += v * dt + R * (gamma(2, phi) * a_bar) * dt * dt + 0.5 * gravity.g * dt * dt;
    R = R_next;
    v = v_next;
    bias_g += rng_bg.normal3(noise.gyro_bias_std * sqrt_dt);
    bias_a += rng_ba.normal3(noise.accel_bias_std * sqrt_dt);
  }
  return log;
}

std::vector<Vec3> covariance_samples(const FilterBelief& belief, int n,
                                     SubstreamRng& rng) {
  const FilterBelief right = belief.frame == ErrorFrame::kRightInvariant
                                 ? belief
                                 : switch_error_frame(belief);
  const int base = right.dim_p() - 6;
  Eigen::MatrixXd p_base = right.P.topLeftCorner(base, base);
  p_base.diagonal().array() += 1e-14;
  const Eigen::MatrixXd chol = Eigen::LLT<Eigen::MatrixXd>(p_base).matrixL();

  std::vector<Vec3> out;
  out.reserve(static_cast<size_t>(n));
  Eigen::VectorXd z(base);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < base; ++j) z[j] = rng.normal();
    const SEK3 sample = exp_sek3(chol * z) * right.X;
    out.push_back(sample.col(1));
  }
  return out;
}

std::vector<Vec3> covariance_samples(const QekfBelief& belief, int n,
                                     SubstreamRng& rng) {
  Mat3 p_pos = belief.P.block<3, 3>(6, 6);
  p_pos.diagonal().array() += 1e-14;
  const Mat3 chol = Eigen::LLT<Mat3>(p_pos).matrixL();
  std::vector<Vec3> out;
  out.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    out.push_back(belief.position + chol * Vec3(rng.normal(), rng.normal(), rng.normal()));
  }
  return out;
}

}  // namespace inekf
