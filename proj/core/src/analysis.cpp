#include "inekf/analysis.hpp"

#include <Eigen/Dense>
#include <stdexcept>

namespace inekf {

namespace {
constexpr double kGammaAngleGuard = M_PI - 1e-3;
}

Mat9 euclidean_error_jacobian(const FilterBelief& belief) {
  const Vec3 phi = log_so3(belief.rotation());
  if (phi.norm() >= kGammaAngleGuard) {
    throw std::domain_error("euclidean_error_jacobian: angle too close to pi");
  }
  Mat9 j = Mat9::Zero();
  j.block<3, 3>(0, 0) = -gamma(1, phi).partialPivLu().solve(Mat3::Identity());
  j.block<3, 3>(3, 0) = skew(belief.velocity());
  j.block<3, 3>(3, 3) = -Mat3::Identity();
  j.block<3, 3>(6, 0) = skew(belief.position());
  j.block<3, 3>(6, 6) = -Mat3::Identity();
  return j;
}

Mat9 right_invariant_to_euclidean(const FilterBelief& belief) {
  if (belief.frame != ErrorFrame::kRightInvariant) {
    throw std::invalid_argument("right_invariant_to_euclidean: belief not right-frame");
  }
  const Mat9 j = euclidean_error_jacobian(belief);
  const Mat9 p_base = belief.P.topLeftCorner<9, 9>();
  Mat9 out = j * p_base * j.transpose();
  return 0.5 * (out + out.transpose());
}

Eigen::VectorXd qekf_error_to_invariant(const Eigen::VectorXd& qekf_errors,
                                        const FilterBelief& belief) {
  const int base = belief.dim_p() - 6;
  if (qekf_errors.size() != base) {
    throw std::invalid_argument("qekf_error_to_invariant: dimension mismatch");
  }
  Eigen::VectorXd xi(base);
  const Vec3 xi_r = belief.rotation() * qekf_errors.head<3>();
  xi.head<3>() = xi_r;
  xi.segment<3>(3) = -qekf_errors.segment<3>(3) + skew(belief.velocity()) * xi_r;
  xi.segment<3>(6) = -qekf_errors.segment<3>(6) + skew(belief.position()) * xi_r;
  for (int i = 0; i < belief.num_points(); ++i) {
    xi.segment<3>(9 + 3 * i) =
        -qekf_errors.segment<3>(9 + 3 * i) + skew(belief.point(i)) * xi_r;
  }
  return xi;
}

Eigen::VectorXd invariant_to_qekf_error(const Eigen::VectorXd& xi,
                                        const FilterBelief& belief) {
  const int base = belief.dim_p() - 6;
  if (xi.size() != base) {
    throw std::invalid_argument("invariant_to_qekf_error: dimension mismatch");
  }
  Eigen::VectorXd dq(base);
  const Vec3 xi_r = xi.head<3>();
  dq.head<3>() = belief.rotation().transpose() * xi_r;
  dq.segment<3>(3) = -xi.segment<3>(3) + skew(belief.velocity()) * xi_r;
  dq.segment<3>(6) = -xi.segment<3>(6) + skew(belief.position()) * xi_r;
  for (int i = 0; i < belief.num_points(); ++i) {
    dq.segment<3>(9 + 3 * i) = -xi.segment<3>(9 + 3 * i) + skew(belief.point(i)) * xi_r;
  }
  return dq;
}

namespace {
FilterBelief invert_convention(const FilterBelief& belief, Convention target) {
  FilterBelief out = belief;
  out.X = belief.X.inverse();
  out.convention = target;
  out.frame = belief.frame == ErrorFrame::kRightInvariant ? ErrorFrame::kLeftInvariant
                                                          : ErrorFrame::kRightInvariant;
  // Differential of inversion at the identity error: ξ ↦ -ξ; bias unchanged.
  const int base = belief.dim_p() - 6;
  out.P.topRightCorner(base, 6) = -belief.P.topRightCorner(base, 6);
  out.P.bottomLeftCorner(6, base) = -belief.P.bottomLeftCorner(6, base);
  return out;
}
}  // namespace

FilterBelief world_to_robocentric(const FilterBelief& belief) {
  if (belief.convention != Convention::kWorldCentric) {
    throw std::invalid_argument("world_to_robocentric: belief already robo-centric");
  }
  return invert_convention(belief, Convention::kRoboCentric);
}

FilterBelief robocentric_to_world(const FilterBelief& belief) {
  if (belief.convention != Convention::kRoboCentric) {
    throw std::invalid_argument("robocentric_to_world: belief already world-centric");
  }
  return invert_convention(belief, Convention::kWorldCentric);
}

double time_to_converge(const std::vector<ErrorSample>& errors,
                        const ConvergenceThresholds& thresholds) {
  if (errors.empty()) return -1.0;
  // Earliest sample from which the errors stay below the thresholds for the
  // full hold window.
  const double t_end = errors.back().t;
  double candidate = -1.0;
  for (const auto& e : errors) {
    const bool below = e.roll_pitch < thresholds.roll_pitch &&
                       e.body_velocity < thresholds.body_velocity;
    if (!below) {
      candidate = -1.0;
      continue;
    }
    if (candidate < 0.0) candidate = e.t;
    if (e.t - candidate >= thresholds.hold_time) return candidate;
  }
  // A run that stays below through the end counts when the window fits.
  if (candidate >= 0.0 && t_end - candidate >= thresholds.hold_time) return candidate;
  return -1.0;
}

}  // namespace inekf
