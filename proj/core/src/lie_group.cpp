#include "inekf/lie_group.hpp"

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <cmath>
#include <stdexcept>

namespace inekf {

namespace {
// Γ₀/Γ₁ switch to a truncated series below 1e-5. The Γ₂/Γ₃ closed forms hit
// catastrophic cancellation much earlier (their lead numerators are O(‖φ‖⁴)),
// so they switch at 0.08 with a longer series; both branches agree to better
// than 1e-10 at their thresholds.
constexpr double kSmallAngleLow = 1e-5;
constexpr double kSmallAngleHigh = 0.08;
constexpr double kLogAngleGuard = M_PI - 1e-6;

Mat3 gamma_series(int m, const Vec3& phi, int terms) {
  const Mat3 s = skew(phi);
  Mat3 term = Mat3::Identity();
  Mat3 out = Mat3::Zero();
  double fact = 1.0;
  for (int i = 2; i <= m; ++i) fact *= i;
  for (int n = 0; n <= terms; ++n) {
    out += term / fact;
    term = term * s;
    fact *= (n + m + 1);
  }
  return out;
}
}  // namespace

Mat3 skew(const Vec3& phi) {
  Mat3 m;
  m << 0.0, -phi.z(), phi.y(),
       phi.z(), 0.0, -phi.x(),
       -phi.y(), phi.x(), 0.0;
  return m;
}

Vec3 unskew(const Mat3& m) { return Vec3(m(2, 1), m(0, 2), m(1, 0)); }

Mat3 gamma(int m, const Vec3& phi) {
  if (m < 0 || m > 3) {
    throw std::invalid_argument("gamma: m must be in {0,1,2,3}");
  }
  const double theta = phi.norm();
  if (theta < (m <= 1 ? kSmallAngleLow : kSmallAngleHigh)) {
    return gamma_series(m, phi, m <= 1 ? 5 : 11);
  }
  const Mat3 s = skew(phi);
  const Mat3 s2 = s * s;
  const double t2 = theta * theta;
  const double st = std::sin(theta);
  const double ct = std::cos(theta);
  switch (m) {
    case 0:
      return Mat3::Identity() + (st / theta) * s + ((1.0 - ct) / t2) * s2;
    case 1:
      return Mat3::Identity() + ((1.0 - ct) / t2) * s +
             ((theta - st) / (t2 * theta)) * s2;
    case 2:
      return 0.5 * Mat3::Identity() + ((theta - st) / (t2 * theta)) * s +
             ((t2 + 2.0 * ct - 2.0) / (2.0 * t2 * t2)) * s2;
    default:  // m == 3
      return (1.0 / 6.0) * Mat3::Identity() +
             ((ct - 1.0 + 0.5 * t2) / (t2 * t2)) * s +
             ((st - theta + t2 * theta / 6.0) / (t2 * t2 * theta)) * s2;
  }
}

Mat3 exp_so3(const Vec3& phi) { return gamma(0, phi); }

Vec3 log_so3(const Mat3& rotation) {
  // Quaternion route is well conditioned near both 0 and pi.
  Eigen::Quaterniond q(rotation);
  q.normalize();
  const double vec_norm = q.vec().norm();
  const double angle = 2.0 * std::atan2(vec_norm, std::abs(q.w()));
  if (angle >= kLogAngleGuard) {
    throw std::domain_error("log_so3: rotation angle within 1e-6 of pi");
  }
  if (vec_norm < 1e-12) {
    return 2.0 * q.vec() * (q.w() < 0 ? -1.0 : 1.0);
  }
  const double sign = q.w() < 0 ? -1.0 : 1.0;
  return sign * (angle / vec_norm) * q.vec();
}

Mat3 project_rotation(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0) {
    Mat3 flip = Mat3::Identity();
    flip(2, 2) = -1.0;
    r = svd.matrixU() * flip * svd.matrixV().transpose();
  }
  return r;
}

SEK3::SEK3(Mat3 rotation, std::vector<Vec3> columns)
    : rotation_(std::move(rotation)), columns_(std::move(columns)) {}

SEK3 SEK3::identity(int k) {
  SEK3 x;
  x.columns_.assign(static_cast<size_t>(k), Vec3::Zero());
  return x;
}

SEK3 SEK3::compose(const SEK3& other) const {
  if (k() != other.k()) {
    throw std::invalid_argument("SEK3::compose: mismatched K");
  }
  SEK3 out;
  out.rotation_ = rotation_ * other.rotation_;
  out.columns_.resize(columns_.size());
  for (size_t i = 0; i < columns_.size(); ++i) {
    out.columns_[i] = rotation_ * other.columns_[i] + columns_[i];
  }
  return out;
}

SEK3 SEK3::inverse() const {
  SEK3 out;
  out.rotation_ = rotation_.transpose();
  out.columns_.resize(columns_.size());
  for (size_t i = 0; i < columns_.size(); ++i) {
    out.columns_[i] = -out.rotation_ * columns_[i];
  }
  return out;
}

Eigen::MatrixXd SEK3::adjoint() const {
  const int n = 3 + 3 * k();
  Eigen::MatrixXd adj = Eigen::MatrixXd::Zero(n, n);
  adj.topLeftCorner<3, 3>() = rotation_;
  for (int i = 0; i < k(); ++i) {
    adj.block<3, 3>(3 + 3 * i, 3 + 3 * i) = rotation_;
    adj.block<3, 3>(3 + 3 * i, 0) = skew(columns_[static_cast<size_t>(i)]) * rotation_;
  }
  return adj;
}

Eigen::MatrixXd SEK3::dense() const {
  const int n = 3 + k();
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n);
  m.topLeftCorner<3, 3>() = rotation_;
  for (int i = 0; i < k(); ++i) {
    m.block<3, 1>(0, 3 + i) = columns_[static_cast<size_t>(i)];
  }
  return m;
}

SEK3 exp_sek3(const Eigen::VectorXd& xi) {
  if (xi.size() % 3 != 0 || xi.size() < 3) {
    throw std::invalid_argument("exp_sek3: xi dimension must be 3+3K");
  }
  const Vec3 phi = xi.head<3>();
  const Mat3 jl = gamma(1, phi);
  SEK3 out;
  out.set_rotation(gamma(0, phi));
  const int k = static_cast<int>(xi.size() / 3) - 1;
  for (int i = 0; i < k; ++i) {
    out.append_col(jl * xi.segment<3>(3 + 3 * i));
  }
  return out;
}

Eigen::VectorXd log_sek3(const SEK3& x) {
  const Vec3 phi = log_so3(x.rotation());
  const Mat3 jl = gamma(1, phi);
  Eigen::PartialPivLU<Mat3> lu(jl);
  Eigen::VectorXd xi(3 + 3 * x.k());
  xi.head<3>() = phi;
  for (int i = 0; i < x.k(); ++i) {
    xi.segment<3>(3 + 3 * i) = lu.solve(x.col(i));
  }
  return xi;
}

Eigen::MatrixXd hat_sek3(const Eigen::VectorXd& xi) {
  if (xi.size() % 3 != 0 || xi.size() < 3) {
    throw std::invalid_argument("hat_sek3: xi dimension must be 3+3K");
  }
  const int k = static_cast<int>(xi.size() / 3) - 1;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(3 + k, 3 + k);
  m.topLeftCorner<3, 3>() = skew(xi.head<3>());
  for (int i = 0; i < k; ++i) {
    m.block<3, 1>(0, 3 + i) = xi.segment<3>(3 + 3 * i);
  }
  return m;
}

}  // namespace inekf
