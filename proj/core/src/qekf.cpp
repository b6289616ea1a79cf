#include "inekf/qekf.hpp"

#include <Eigen/Dense>
#include <stdexcept>
#include <unsupported/Eigen/MatrixFunctions>

namespace inekf {

namespace {
Eigen::Quaterniond exp_quat(const Vec3& phi) {
  const double angle = phi.norm();
  if (angle < 1e-12) {
    return Eigen::Quaterniond(1.0, 0.5 * phi.x(), 0.5 * phi.y(), 0.5 * phi.z())
        .normalized();
  }
  return Eigen::Quaterniond(Eigen::AngleAxisd(angle, phi / angle));
}
}  // namespace

int QekfBelief::point_slot(int id) const {
  for (size_t i = 0; i < points.size(); ++i) {
    if (points[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

SEK3 QekfBelief::as_sek3() const {
  std::vector<Vec3> cols;
  cols.reserve(2 + point_positions.size());
  cols.push_back(velocity);
  cols.push_back(position);
  for (const auto& d : point_positions) cols.push_back(d);
  return SEK3(rotation(), std::move(cols));
}

void QekfBelief::set_from_sek3(const SEK3& x) {
  orientation = Eigen::Quaterniond(x.rotation()).normalized();
  velocity = x.col(0);
  position = x.col(1);
  for (size_t i = 0; i < point_positions.size(); ++i) {
    point_positions[i] = x.col(2 + static_cast<int>(i));
  }
}

Eigen::MatrixXd qekf_error_dynamics(const QekfBelief& belief, const ImuSample& imu) {
  const Vec3 w = imu.gyro - belief.bias.gyro;
  const Vec3 a = imu.accel - belief.bias.accel;
  const Mat3 R = belief.rotation();
  const int dim = belief.dim_p();
  const int ib = belief.idx_bias();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(dim, dim);
  A.block<3, 3>(0, 0) = -skew(w);
  A.block<3, 3>(0, ib) = -Mat3::Identity();
  A.block<3, 3>(3, 0) = R * skew(a);
  A.block<3, 3>(3, ib + 3) = R;
  A.block<3, 3>(6, 3) = Mat3::Identity();
  return A;
}

QekfBelief qekf_predict(const QekfBelief& belief, const ImuSample& imu,
                        const NoiseParams& noise, const GravityVec& gravity,
                        bool first_order) {
  QekfBelief out = belief;

  // Means go through the same ZOH integrator as the invariant filter; the
  // decoupled contact states stay constant.
  out.set_from_sek3(propagate_mean_view(belief.as_sek3(), belief.bias, imu, gravity));

  const int dim = belief.dim_p();
  const Eigen::MatrixXd A = qekf_error_dynamics(belief, imu);
  const Eigen::MatrixXd phi =
      first_order ? Eigen::MatrixXd(Eigen::MatrixXd::Identity(dim, dim) + A * imu.dt)
                  : Eigen::MatrixXd((A * imu.dt).exp());

  const Mat3 R = belief.rotation();
  Eigen::MatrixXd qbar = Eigen::MatrixXd::Zero(dim, dim);
  qbar.block<3, 3>(0, 0) = noise.gyro_std * noise.gyro_std * Mat3::Identity();
  qbar.block<3, 3>(3, 3) =
      noise.accel_std * noise.accel_std * (R * R.transpose());  // isotropic in practice
  for (int i = 0; i < belief.num_points(); ++i) {
    if (belief.points[static_cast<size_t>(i)].kind == PointKind::kContact) {
      qbar.block<3, 3>(9 + 3 * i, 9 + 3 * i) =
          noise.contact_std * noise.contact_std * Mat3::Identity();
    }
  }
  const int ib = belief.idx_bias();
  qbar.block<3, 3>(ib, ib) =
      noise.gyro_bias_std * noise.gyro_bias_std * Mat3::Identity();
  qbar.block<3, 3>(ib + 3, ib + 3) =
      noise.accel_bias_std * noise.accel_bias_std * Mat3::Identity();

  out.P = phi * belief.P * phi.transpose() + phi * qbar * phi.transpose() * imu.dt;
  out.P = 0.5 * (out.P + out.P.transpose());
  out.orientation.normalize();
  return out;
}

QekfUpdateResult qekf_update(const QekfBelief& belief, const Eigen::VectorXd& alpha,
                             int contact_id, const KinematicsModel& kin,
                             const NoiseParams& noise) {
  const int slot = belief.point_slot(contact_id);
  if (slot < 0) {
    throw std::invalid_argument("qekf_update: unknown contact id");
  }
  if (alpha.size() != kin.joint_count()) {
    throw std::invalid_argument("qekf_update: encoder dimension mismatch");
  }
  const Mat3 R = belief.rotation();
  const Mat3 Rt = R.transpose();
  const Vec3 expected = Rt * (belief.point_positions[static_cast<size_t>(slot)] -
                              belief.position);
  const Eigen::MatrixXd j = kin.jacobian(alpha);
  const Mat3 n = j * (noise.encoder_std * noise.encoder_std *
                      Eigen::MatrixXd::Identity(alpha.size(), alpha.size())) *
                 j.transpose();

  const int dim = belief.dim_p();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(3, dim);
  h.block<3, 3>(0, 0) = -skew(expected);
  h.block<3, 3>(0, 6) = -Rt;
  h.block<3, 3>(0, 9 + 3 * slot) = Rt;

  Mat3 s = h * belief.P * h.transpose() + n;
  s = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<Mat3> es(s);
  if (es.eigenvalues().minCoeff() <= 0.0 ||
      es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff() > 1e12) {
    return {belief, false};
  }

  const Eigen::MatrixXd k = belief.P * h.transpose() * s.inverse();
  const Vec3 innovation = kin.position(alpha) - expected;
  const Eigen::VectorXd delta = k * innovation;

  QekfBelief out = belief;
  out.orientation = (belief.orientation * exp_quat(-delta.head<3>())).normalized();
  out.velocity += delta.segment<3>(3);
  out.position += delta.segment<3>(6);
  for (int i = 0; i < belief.num_points(); ++i) {
    out.point_positions[static_cast<size_t>(i)] += delta.segment<3>(9 + 3 * i);
  }
  out.bias = BiasVector::from_stacked(belief.bias.stacked() - delta.tail<6>());

  const Eigen::MatrixXd ikh = Eigen::MatrixXd::Identity(dim, dim) - k * h;
  out.P = ikh * belief.P * ikh.transpose() + k * n * k.transpose();
  out.P = 0.5 * (out.P + out.P.transpose());
  return {out, true};
}

QekfBelief qekf_add_contact(const QekfBelief& belief, int contact_id,
                            const Eigen::VectorXd& alpha, const KinematicsModel& kin,
                            const NoiseParams& noise) {
  if (belief.point_slot(contact_id) >= 0) {
    throw std::invalid_argument("qekf_add_contact: duplicate contact id");
  }
  const Vec3 h_p = kin.position(alpha);
  const Eigen::MatrixXd j = kin.jacobian(alpha);
  const Mat3 R = belief.rotation();
  const Mat3 cov = R *
                   (j * (noise.encoder_std * noise.encoder_std *
                         Eigen::MatrixXd::Identity(alpha.size(), alpha.size())) *
                    j.transpose()) *
                   R.transpose();

  const int dim = belief.dim_p();
  const int ib = belief.idx_bias();
  QekfBelief out = belief;
  out.points.push_back({contact_id, PointKind::kContact});
  out.point_positions.push_back(belief.position + R * h_p);

  Eigen::MatrixXd row = Eigen::MatrixXd::Zero(3, dim);
  row.block<3, 3>(0, 0) = R * skew(h_p);
  row.block<3, 3>(0, 6) = Mat3::Identity();

  Eigen::MatrixXd p_new = Eigen::MatrixXd::Zero(dim + 3, dim + 3);
  p_new.topLeftCorner(ib, ib) = belief.P.topLeftCorner(ib, ib);
  p_new.block(0, ib + 3, ib, 6) = belief.P.block(0, ib, ib, 6);
  p_new.block(ib + 3, 0, 6, ib) = belief.P.block(ib, 0, 6, ib);
  p_new.block(ib + 3, ib + 3, 6, 6) = belief.P.block(ib, ib, 6, 6);
  const Eigen::MatrixXd row_p = row * belief.P;
  p_new.block(ib, 0, 3, ib) = row_p.leftCols(ib);
  p_new.block(ib, ib + 3, 3, 6) = row_p.rightCols(6);
  p_new.block(0, ib, ib, 3) = row_p.leftCols(ib).transpose();
  p_new.block(ib + 3, ib, 6, 3) = row_p.rightCols(6).transpose();
  p_new.block<3, 3>(ib, ib) = row_p * row.transpose() + cov;
  out.P = std::move(p_new);
  return out;
}

QekfBelief qekf_remove_contact(const QekfBelief& belief, int contact_id) {
  const int slot = belief.point_slot(contact_id);
  if (slot < 0) {
    throw std::invalid_argument("qekf_remove_contact: unknown contact id");
  }
  const int dim = belief.dim_p();
  const int cut = 9 + 3 * slot;
  const int tail = dim - cut - 3;

  QekfBelief out = belief;
  out.points.erase(out.points.begin() + slot);
  out.point_positions.erase(out.point_positions.begin() + slot);

  Eigen::MatrixXd p_new(dim - 3, dim - 3);
  p_new.topLeftCorner(cut, cut) = belief.P.topLeftCorner(cut, cut);
  p_new.topRightCorner(cut, tail) = belief.P.block(0, cut + 3, cut, tail);
  p_new.bottomLeftCorner(tail, cut) = belief.P.block(cut + 3, 0, tail, cut);
  p_new.bottomRightCorner(tail, tail) = belief.P.block(cut + 3, cut + 3, tail, tail);
  out.P = std::move(p_new);
  return out;
}

}  // namespace inekf
