#include "inekf/kinematics.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace inekf {

namespace {
Mat3 rot_z(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 m;
  m << c, -s, 0, s, c, 0, 0, 0, 1;
  return m;
}
Mat3 rot_y(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 m;
  m << c, 0, s, 0, 1, 0, -s, 0, c;
  return m;
}
}  // namespace

void PointFootLeg::check(const Eigen::VectorXd& alpha) const {
  if (alpha.size() != 3) {
    throw std::invalid_argument("PointFootLeg: expected 3 joint angles");
  }
}

Vec3 PointFootLeg::position(const Eigen::VectorXd& alpha) const {
  check(alpha);
  const Mat3 r1 = rot_z(alpha[0]);
  const Mat3 r2 = rot_y(alpha[1]);
  const Mat3 r3 = rot_y(alpha[2]);
  const Vec3 d1(l1_, 0, 0), d2(0, 0, -l2_), d3(0, 0, -l3_);
  return base_ + r1 * (d1 + r2 * (d2 + r3 * d3));
}

Mat3 PointFootLeg::orientation(const Eigen::VectorXd& alpha) const {
  check(alpha);
  return rot_z(alpha[0]) * rot_y(alpha[1]) * rot_y(alpha[2]);
}

Eigen::MatrixXd PointFootLeg::jacobian(const Eigen::VectorXd& alpha) const {
  check(alpha);
  const Mat3 r1 = rot_z(alpha[0]);
  const Mat3 r12 = r1 * rot_y(alpha[1]);
  const Vec3 d1(l1_, 0, 0), d2(0, 0, -l2_), d3(0, 0, -l3_);

  const Vec3 o1 = base_;               // hip yaw joint
  const Vec3 o2 = o1 + r1 * d1;        // hip pitch joint
  const Vec3 o3 = o2 + r12 * d2;       // knee pitch joint
  const Vec3 p = o3 + r12 * rot_y(alpha[2]) * d3;

  const Vec3 a1 = Vec3::UnitZ();
  const Vec3 a2 = r1 * Vec3::UnitY();
  const Vec3 a3 = r12 * Vec3::UnitY();

  Eigen::MatrixXd j(3, 3);
  j.col(0) = a1.cross(p - o1);
  j.col(1) = a2.cross(p - o2);
  j.col(2) = a3.cross(p - o3);
  return j;
}

bool PointFootLeg::inverse(const Vec3& target, Eigen::VectorXd& alpha, double tol,
                           int max_iters) const {
  check(alpha);
  // Levenberg-style damping plus a step clamp keep the iteration stable near
  // the straight-knee singularity; canonical reseeds recover a wrong branch.
  auto solve_from = [&](Eigen::Vector3d a, Eigen::VectorXd* out) {
    for (int it = 0; it < max_iters; ++it) {
      const Vec3 err = target - position(a);
      if (err.norm() < tol) {
        *out = a;
        return true;
      }
      const Eigen::MatrixXd j = jacobian(a);
      const double damping = 1e-9 + 1e-2 * err.squaredNorm();
      Eigen::Vector3d step =
          (j.transpose() * j + damping * Mat3::Identity())
              .ldlt()
              .solve(j.transpose() * err);
      const double step_norm = step.norm();
      if (step_norm > 0.7) step *= 0.7 / step_norm;
      a += step;
    }
    return false;
  };

  if (solve_from(alpha.head<3>(), &alpha)) return true;
  for (const auto& seed :
       {Eigen::Vector3d(0.0, 0.3, -0.6), Eigen::Vector3d(0.0, 0.8, -1.4),
        Eigen::Vector3d(0.0, -0.2, -0.4), Eigen::Vector3d(0.3, 0.5, -1.0)}) {
    if (solve_from(seed, &alpha)) return true;
  }
  return false;
}

}  // namespace inekf
