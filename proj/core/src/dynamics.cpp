#include "inekf/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace inekf {

namespace {
constexpr double kMaxDt = 0.1;
// Series/closed-form switch for Ψ₁/Ψ₂ on θ = ‖ω̄‖Δt. The closed forms carry
// numerator cancellations against 1/‖ω̄‖³ amplification, so they need
// θ ≳ 1e-2; the truncated double series is accurate to ~1e-13 there.
constexpr double kPsiSmallAngle = 1e-2;

void check_imu(const ImuSample& imu) {
  if (!(imu.dt > 0.0) || imu.dt > kMaxDt) {
    throw std::invalid_argument("ImuSample: dt must lie in (0, 0.1]");
  }
  if (!imu.gyro.allFinite() || !imu.accel.allFinite()) {
    throw std::invalid_argument("ImuSample: non-finite entries");
  }
}

// Σ_{n+m<=5} skew(Wⁿa) Wᵐ / (n! (m+1)!) · Δt^{n+m+2} weighted per integral.
void psi_series(const Vec3& w, const Vec3& a, double dt, Mat3* out1, Mat3* out2) {
  const Mat3 W = skew(w);
  Mat3 wn_a_hat[6];  // skew(Wⁿ a)
  Vec3 wa = a;
  Mat3 wm[6];  // Wᵐ
  Mat3 acc = Mat3::Identity();
  double nfact[6], mfact[6];
  double f = 1.0;
  for (int n = 0; n < 6; ++n) {
    wn_a_hat[n] = skew(wa);
    wa = W * wa;
    wm[n] = acc;
    acc = acc * W;
    nfact[n] = f;
    f *= (n + 1);
    mfact[n] = nfact[n] * (n + 1);  // (m+1)!
  }
  if (out1) out1->setZero();
  if (out2) out2->setZero();
  double dtp[9];
  dtp[0] = 1.0;
  for (int i = 1; i < 9; ++i) dtp[i] = dtp[i - 1] * dt;
  for (int n = 0; n <= 5; ++n) {
    for (int m = 0; n + m <= 5; ++m) {
      const Mat3 term = wn_a_hat[n] * wm[m] / (nfact[n] * mfact[m]);
      const int p = n + m + 2;
      if (out1) *out1 += term * dtp[p] / p;
      if (out2) *out2 += term * dtp[p + 1] / (p * (p + 1));
    }
  }
}

struct PsiTrig {
  Mat3 wx, wx2, ax;
  double s, c, s2, c2, th, th3, th4, th5, th6, th7;
};

PsiTrig psi_trig(const Vec3& w, const Vec3& a, double dt) {
  PsiTrig t;
  t.wx = skew(w);
  t.wx2 = t.wx * t.wx;
  t.ax = skew(a);
  const double phi = w.norm();
  t.th = phi * dt;
  t.s = std::sin(t.th);
  t.c = std::cos(t.th);
  t.s2 = std::sin(2 * t.th);
  t.c2 = std::cos(2 * t.th);
  t.th3 = phi * phi * phi;
  t.th4 = t.th3 * phi;
  t.th5 = t.th4 * phi;
  t.th6 = t.th5 * phi;
  t.th7 = t.th6 * phi;
  return t;
}

// Extended adjoint blockdiag(Ad_X, I6) matching the covariance ordering.
Eigen::MatrixXd extended_adjoint(const SEK3& x) {
  const int dim = 3 + 3 * x.k() + 6;
  Eigen::MatrixXd adj = Eigen::MatrixXd::Identity(dim, dim);
  adj.topLeftCorner(dim - 6, dim - 6) = x.adjoint();
  return adj;
}

// World-centric left-invariant analytical Φ; negate_bias flips the bias
// columns, which turns it into the robo-centric right-invariant form.
Eigen::MatrixXd phi_left_pattern(const ImuSample& imu, const BiasVector& theta_hat,
                                 int num_points, bool negate_bias) {
  check_imu(imu);
  const double dt = imu.dt;
  const Vec3 w = imu.gyro - theta_hat.gyro;
  const Vec3 a = imu.accel - theta_hat.accel;
  const Vec3 phi = w * dt;
  const Mat3 g0 = gamma(0, phi);
  const Mat3 g1 = gamma(1, phi);
  const Mat3 g2 = gamma(2, phi);
  const Mat3 g0t = g0.transpose();

  const int dim = 15 + 3 * num_points;
  const int ib = dim - 6;
  Eigen::MatrixXd out = Eigen::MatrixXd::Identity(dim, dim);
  out.block<3, 3>(0, 0) = g0t;
  out.block<3, 3>(3, 0) = -g0t * skew(g1 * a) * dt;
  out.block<3, 3>(6, 0) = -g0t * skew(g2 * a) * dt * dt;
  out.block<3, 3>(3, 3) = g0t;
  out.block<3, 3>(6, 3) = g0t * dt;
  out.block<3, 3>(6, 6) = g0t;
  for (int i = 0; i < num_points; ++i) {
    out.block<3, 3>(9 + 3 * i, 9 + 3 * i) = g0t;
  }
  const double sign = negate_bias ? -1.0 : 1.0;
  out.block<3, 3>(0, ib) = sign * -g0t * g1 * dt;
  out.block<3, 3>(3, ib) = sign * g0t * psi1(w, a, dt);
  out.block<3, 3>(6, ib) = sign * g0t * psi2(w, a, dt);
  out.block<3, 3>(3, ib + 3) = sign * -g0t * g1 * dt;
  out.block<3, 3>(6, ib + 3) = sign * -g0t * g2 * dt * dt;
  return out;
}
}  // namespace

Mat3 psi1(const Vec3& w, const Vec3& a, double dt) {
  if (w.norm() * dt < kPsiSmallAngle) {
    Mat3 out;
    psi_series(w, a, dt, &out, nullptr);
    return out;
  }
  const PsiTrig t = psi_trig(w, a, dt);
  const double th = t.th, s = t.s, c = t.c, s2 = t.s2, c2 = t.c2;
  return t.ax * gamma(2, -w * dt) * dt * dt
    + ((s - th * c) / t.th3) * (t.wx * t.ax)
    - ((c2 - 4 * c + 3) / (4 * t.th4)) * (t.wx * t.ax * t.wx)
    + ((4 * s + s2 - 4 * th * c - 2 * th) / (4 * t.th5)) * (t.wx * t.ax * t.wx2)
    + ((th * th - 2 * th * s - 2 * c + 2) / (2 * t.th4)) * (t.wx2 * t.ax)
    - ((6 * th - 8 * s + s2) / (4 * t.th5)) * (t.wx2 * t.ax * t.wx)
    + ((2 * th * th - 4 * th * s - c2 + 1) / (4 * t.th6)) * (t.wx2 * t.ax * t.wx2);
}

Mat3 psi2(const Vec3& w, const Vec3& a, double dt) {
  if (w.norm() * dt < kPsiSmallAngle) {
    Mat3 out;
    psi_series(w, a, dt, nullptr, &out);
    return out;
  }
  const PsiTrig t = psi_trig(w, a, dt);
  const double th = t.th, s = t.s, c = t.c, s2 = t.s2, c2 = t.c2;
  const double th2 = th * th, th3c = th2 * th;
  return t.ax * gamma(3, -w * dt) * dt * dt * dt
    - ((th * s + 2 * c - 2) / t.th4) * (t.wx * t.ax)
    - ((6 * th - 8 * s + s2) / (8 * t.th5)) * (t.wx * t.ax * t.wx)
    - ((2 * th2 + 8 * th * s + 16 * c + c2 - 17) / (8 * t.th6)) * (t.wx * t.ax * t.wx2)
    + ((th3c + 6 * th - 12 * s + 6 * th * c) / (6 * t.th5)) * (t.wx2 * t.ax)
    - ((6 * th2 + 16 * c - c2 - 15) / (8 * t.th6)) * (t.wx2 * t.ax * t.wx)
    + ((4 * th3c + 6 * th - 24 * s - 3 * s2 + 24 * th * c) / (24 * t.th7)) *
          (t.wx2 * t.ax * t.wx2);
}

SEK3 propagate_mean_view(const SEK3& x, const BiasVector& bias, const ImuSample& imu,
                         const GravityVec& gravity) {
  check_imu(imu);
  const double dt = imu.dt;
  const Vec3 w = imu.gyro - bias.gyro;
  const Vec3 a = imu.accel - bias.accel;
  const Vec3 phi = w * dt;
  const Mat3 g0 = gamma(0, phi);
  const Mat3 g1 = gamma(1, phi);
  const Mat3 g2 = gamma(2, phi);
  const Mat3& R = x.rotation();
  const Vec3& v = x.col(0);
  const Vec3& p = x.col(1);

  SEK3 out = x;
  out.set_rotation(R * g0);
  out.set_col(0, v + (R * (g1 * a) + gravity.g) * dt);
  out.set_col(1, p + v * dt + (R * (g2 * a) + 0.5 * gravity.g) * dt * dt);
  return out;
}

FilterBelief propagate_mean(const FilterBelief& belief, const ImuSample& imu,
                            const GravityVec& gravity) {
  FilterBelief out = belief;
  out.X = propagate_mean_view(belief.X, belief.bias, imu, gravity);
  return out;
}

FilterBelief propagate_mean_robocentric(const FilterBelief& belief, const ImuSample& imu,
                                        const GravityVec& gravity) {
  check_imu(imu);
  const double dt = imu.dt;
  const Vec3 w = imu.gyro - belief.bias.gyro;
  const Vec3 a = imu.accel - belief.bias.accel;
  const Vec3 phi = w * dt;
  const Mat3 g0t = gamma(0, phi).transpose();
  const Mat3 g1 = gamma(1, phi);
  const Mat3 g2 = gamma(2, phi);
  const Mat3& R = belief.rotation();
  const Vec3& v = belief.velocity();
  const Vec3& p = belief.position();

  FilterBelief out = belief;
  out.X.set_rotation(g0t * R);
  out.X.set_col(0, g0t * (v - (g1 * a + R * gravity.g) * dt));
  out.X.set_col(1, g0t * (p + v * dt - (g2 * a + 0.5 * R * gravity.g) * dt * dt));
  for (int i = 0; i < belief.num_points(); ++i) {
    out.X.set_col(2 + i, g0t * belief.point(i));
  }
  return out;
}

Eigen::MatrixXd phi_left(const ImuSample& imu, const BiasVector& theta_hat,
                         int num_points) {
  return phi_left_pattern(imu, theta_hat, num_points, false);
}

Eigen::MatrixXd phi_right(const FilterBelief& next_mean, const FilterBelief& prev_mean,
                          const ImuSample& imu, const GravityVec& gravity) {
  check_imu(imu);
  const double dt = imu.dt;
  const Vec3 w = imu.gyro - prev_mean.bias.gyro;
  const Vec3 a = imu.accel - prev_mean.bias.accel;
  const Vec3 phi = w * dt;
  const Mat3 g1 = gamma(1, phi);
  const Mat3 g2 = gamma(2, phi);
  const Mat3& Rk = prev_mean.rotation();
  const Mat3 gx = skew(gravity.g);
  const Mat3 RG1dt = Rk * g1 * dt;

  const int num_points = prev_mean.num_points();
  const int dim = 15 + 3 * num_points;
  const int ib = dim - 6;
  Eigen::MatrixXd out = Eigen::MatrixXd::Identity(dim, dim);
  out.block<3, 3>(3, 0) = gx * dt;
  out.block<3, 3>(6, 0) = 0.5 * gx * dt * dt;
  out.block<3, 3>(6, 3) = Mat3::Identity() * dt;
  out.block<3, 3>(0, ib) = -RG1dt;
  out.block<3, 3>(3, ib) = -skew(next_mean.velocity()) * RG1dt + Rk * psi1(w, a, dt);
  out.block<3, 3>(6, ib) = -skew(next_mean.position()) * RG1dt + Rk * psi2(w, a, dt);
  for (int i = 0; i < num_points; ++i) {
    out.block<3, 3>(9 + 3 * i, ib) = -skew(next_mean.point(i)) * RG1dt;
  }
  out.block<3, 3>(3, ib + 3) = -RG1dt;
  out.block<3, 3>(6, ib + 3) = -Rk * g2 * dt * dt;
  return out;
}

Eigen::MatrixXd process_noise_cov(const FilterBelief& belief, const NoiseParams& noise) {
  const int dim = belief.dim_p();
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(dim, dim);
  q.block<3, 3>(0, 0) = noise.gyro_std * noise.gyro_std * Mat3::Identity();
  q.block<3, 3>(3, 3) = noise.accel_std * noise.accel_std * Mat3::Identity();
  for (int i = 0; i < belief.num_points(); ++i) {
    if (belief.point_info(i).kind == PointKind::kContact) {
      q.block<3, 3>(9 + 3 * i, 9 + 3 * i) =
          noise.contact_std * noise.contact_std * Mat3::Identity();
    }
  }
  const int ib = belief.idx_bias();
  q.block<3, 3>(ib, ib) = noise.gyro_bias_std * noise.gyro_bias_std * Mat3::Identity();
  q.block<3, 3>(ib + 3, ib + 3) =
      noise.accel_bias_std * noise.accel_bias_std * Mat3::Identity();
  return q;
}

Eigen::MatrixXd discrete_noise(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& qbar,
                               double dt) {
  Eigen::MatrixXd qd = phi * qbar * phi.transpose() * dt;
  return 0.5 * (qd + qd.transpose());
}

Eigen::MatrixXd discrete_noise_exact(const FilterBelief& belief, const ImuSample& imu,
                                     const NoiseParams& noise, const GravityVec& gravity,
                                     int panels) {
  check_imu(imu);
  const bool robo = belief.convention == Convention::kRoboCentric;
  const Eigen::MatrixXd qbar = process_noise_cov(belief, noise);
  const int dim = belief.dim_p();

  // The frame with a constant A admits Φ(t_{k+1}, s) directly.
  auto phi_tail = [&](double remaining) -> Eigen::MatrixXd {
    if (remaining <= 0.0) return Eigen::MatrixXd::Identity(dim, dim);
    ImuSample partial = imu;
    partial.dt = remaining;
    return phi_left_pattern(partial, belief.bias, belief.num_points(), robo);
  };

  // Composite Simpson over s in [0, dt].
  const int n = 2 * std::max(panels / 2, 1);
  const double h = imu.dt / n;
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(dim, dim);
  for (int i = 0; i <= n; ++i) {
    const Eigen::MatrixXd f = phi_tail(imu.dt - i * h) * qbar *
                              phi_tail(imu.dt - i * h).transpose();
    const double wgt = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    sum += wgt * f;
  }
  Eigen::MatrixXd qd = sum * (h / 3.0);

  const bool state_dependent_frame =
      (!robo && belief.frame == ErrorFrame::kRightInvariant) ||
      (robo && belief.frame == ErrorFrame::kLeftInvariant);
  if (state_dependent_frame) {
    FilterBelief next = robo ? propagate_mean_robocentric(belief, imu, gravity)
                             : propagate_mean(belief, imu, gravity);
    const SEK3 conj = robo ? next.X.inverse() : next.X;
    const Eigen::MatrixXd adj = extended_adjoint(conj);
    qd = adj * qd * adj.transpose();
  }
  return 0.5 * (qd + qd.transpose());
}

namespace {
struct TransitionPair {
  Eigen::MatrixXd phi;
  Eigen::MatrixXd noise_map;  // Φ·G with Q_d = (ΦG) Q̄ (ΦG)ᵀ Δt
};

TransitionPair transition_pair(const FilterBelief& belief, const FilterBelief& next,
                               const ImuSample& imu, const GravityVec& gravity) {
  const bool robo = belief.convention == Convention::kRoboCentric;
  TransitionPair out;
  if (!robo && belief.frame == ErrorFrame::kLeftInvariant) {
    out.phi = phi_left_pattern(imu, belief.bias, belief.num_points(), false);
    out.noise_map = out.phi;
  } else if (robo && belief.frame == ErrorFrame::kRightInvariant) {
    out.phi = phi_left_pattern(imu, belief.bias, belief.num_points(), true);
    out.noise_map = out.phi;
  } else if (!robo) {  // world-centric right-invariant
    out.phi = phi_right(next, belief, imu, gravity);
    out.noise_map = out.phi * extended_adjoint(belief.X);
  } else {  // robo-centric left-invariant: adjoint sandwich of the right form
    const Eigen::MatrixXd phi_rr =
        phi_left_pattern(imu, belief.bias, belief.num_points(), true);
    out.phi =
        extended_adjoint(next.X.inverse()) * phi_rr * extended_adjoint(belief.X);
    out.noise_map = out.phi * extended_adjoint(belief.X.inverse());
  }
  return out;
}
}  // namespace

Eigen::MatrixXd transition_matrix(const FilterBelief& belief, const ImuSample& imu,
                                  const GravityVec& gravity) {
  const bool robo = belief.convention == Convention::kRoboCentric;
  const FilterBelief next = robo ? propagate_mean_robocentric(belief, imu, gravity)
                                 : propagate_mean(belief, imu, gravity);
  return transition_pair(belief, next, imu, gravity).phi;
}

FilterBelief propagate(const FilterBelief& belief, const ImuSample& imu,
                       const NoiseParams& noise, const GravityVec& gravity) {
  const bool robo = belief.convention == Convention::kRoboCentric;
  FilterBelief next = robo ? propagate_mean_robocentric(belief, imu, gravity)
                           : propagate_mean(belief, imu, gravity);

  const Eigen::MatrixXd qbar = process_noise_cov(belief, noise);
  const TransitionPair tp = transition_pair(belief, next, imu, gravity);
  next.P = tp.phi * belief.P * tp.phi.transpose() +
           discrete_noise(tp.noise_map, qbar, imu.dt);
  next.symmetrize();
  next.tick_propagation();
  return next;
}

Eigen::MatrixXd observability_matrix(const FilterBelief& belief, const ImuSample& imu,
                                     int blocks, const GravityVec& gravity) {
  if (belief.num_points() < 1) {
    throw std::invalid_argument("observability_matrix: needs a tracked contact");
  }
  const FilterBelief next = propagate_mean(belief, imu, gravity);
  const int base = belief.dim_p() - 6;
  const Eigen::MatrixXd phi =
      phi_right(next, belief, imu, gravity).topLeftCorner(base, base);

  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(3, base);
  h.block<3, 3>(0, 6) = -Mat3::Identity();
  h.block<3, 3>(0, 9) = Mat3::Identity();

  Eigen::MatrixXd obs(3 * blocks, base);
  Eigen::MatrixXd row = h;
  for (int i = 0; i < blocks; ++i) {
    obs.middleRows(3 * i, 3) = row;
    row = row * phi;
  }
  return obs;
}

}  // namespace inekf
