#include "inekf/analysis.hpp"

#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace inekf;

namespace {

FilterBelief make_belief(oracle::Rand& rng, int k = 0,
                         ErrorFrame frame = ErrorFrame::kRightInvariant) {
  FilterBelief b = new_belief(rng.rotation(1.5), rng.vec3(), rng.vec3(),
                              BiasVector{rng.vec3(0.01), rng.vec3(0.05)},
                              rng.psd(15, 0.05), frame, Convention::kWorldCentric);
  for (int i = 0; i < k; ++i) {
    b.X.append_col(rng.vec3());
    b.register_point({i, PointKind::kContact});
  }
  b.P = rng.psd(b.dim_p(), 0.05);
  return b;
}

}  // namespace

TEST(EuclideanConversion, IdentityMeanIsNegatedIdentityJacobian) {
  oracle::Rand rng(140);
  FilterBelief b = make_belief(rng);
  b.X = SEK3::identity(2);
  const Mat9 j = euclidean_error_jacobian(b);
  Mat9 expected = -Mat9::Identity();
  EXPECT_LT((j - expected).cwiseAbs().maxCoeff(), 1e-12);
  const Mat9 p_eucl = right_invariant_to_euclidean(b);
  EXPECT_LT((p_eucl - b.P.topLeftCorner<9, 9>()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(EuclideanConversion, MatchesSamplingOracle) {
  oracle::Rand rng(141);
  FilterBelief b = make_belief(rng);
  b.P = rng.psd(15, 1e-4);  // small covariance: first-order map is accurate
  const Mat9 p_eucl = right_invariant_to_euclidean(b);

  const Eigen::MatrixXd chol =
      Eigen::LLT<Eigen::MatrixXd>(
          Eigen::MatrixXd(b.P.topLeftCorner<9, 9>() + 1e-14 * Mat9::Identity()))
          .matrixL();
  const Vec3 phi_hat = log_so3(b.rotation());
  std::vector<Eigen::VectorXd> samples;
  for (int i = 0; i < 40000; ++i) {
    const Eigen::VectorXd xi = chol * rng.vec(9);
    const SEK3 x = exp_sek3(xi) * SEK3(b.rotation(), {b.velocity(), b.position()});
    Eigen::VectorXd e(9);
    e.head<3>() = log_so3(x.rotation()) - phi_hat;
    e.segment<3>(3) = x.col(0) - b.velocity();
    e.segment<3>(6) = x.col(1) - b.position();
    samples.push_back(e);
  }
  const Eigen::MatrixXd emp = oracle::sample_cov(samples);
  EXPECT_LT((emp - p_eucl).cwiseAbs().maxCoeff() / p_eucl.cwiseAbs().maxCoeff(), 0.05);
}

TEST(EuclideanConversion, PureYawAtUnitXShowsYVariance) {
  FilterBelief b = new_belief(Mat3::Identity(), Vec3::Zero(), Vec3(1, 0, 0), BiasVector{},
                              Eigen::MatrixXd::Zero(15, 15),
                              ErrorFrame::kRightInvariant, Convention::kWorldCentric);
  const double yaw_var = 0.01;
  b.P(2, 2) = yaw_var;  // pure yaw uncertainty
  const Mat9 p_eucl = right_invariant_to_euclidean(b);
  // exp of a yaw error rotates p̂=(1,0,0) along y: δp variance appears on y.
  EXPECT_NEAR(p_eucl(7, 7), yaw_var, 1e-12);
  EXPECT_LT(p_eucl(6, 6), 1e-15);
  EXPECT_LT(p_eucl(8, 8), 1e-15);
}

TEST(EuclideanConversion, RejectsAngleNearPi) {
  oracle::Rand rng(142);
  FilterBelief b = make_belief(rng);
  b.X.set_rotation(Eigen::AngleAxisd(M_PI - 1e-4, Vec3::UnitX()).toRotationMatrix());
  EXPECT_THROW(right_invariant_to_euclidean(b), std::domain_error);
}

TEST(QekfErrorConversion, ZeroMapsToZero) {
  oracle::Rand rng(143);
  const FilterBelief b = make_belief(rng, 1);
  EXPECT_LT(qekf_error_to_invariant(Eigen::VectorXd::Zero(12), b).norm(), 1e-15);
  EXPECT_LT(invariant_to_qekf_error(Eigen::VectorXd::Zero(12), b).norm(), 1e-15);
}

TEST(QekfErrorConversion, PureOrientationErrorAtZeroVelocity) {
  oracle::Rand rng(144);
  FilterBelief b = make_belief(rng);
  b.X.set_col(0, Vec3::Zero());
  Eigen::VectorXd dq = Eigen::VectorXd::Zero(9);
  dq.head<3>() = Vec3(0.01, -0.02, 0.005);
  const Eigen::VectorXd xi = qekf_error_to_invariant(dq, b);
  EXPECT_LT((xi.head<3>() - b.rotation() * dq.head<3>()).norm(), 1e-14);
  EXPECT_LT(xi.segment<3>(3).norm(), 1e-14);  // ξ_v = 0 when v̂ = 0
}

TEST(QekfErrorConversion, RoundTripIsFirstOrderExact) {
  oracle::Rand rng(145);
  const FilterBelief b = make_belief(rng, 1);
  const Eigen::VectorXd dir = rng.vec(12).normalized();
  // The two linear maps are exact inverses of one another.
  const Eigen::VectorXd back =
      invariant_to_qekf_error(qekf_error_to_invariant(dir, b), b);
  EXPECT_LT((back - dir).norm(), 1e-12);
}

TEST(QekfErrorConversion, ConversionResidualIsSecondOrder) {
  // Ground-truth conversion: build the true state from QEKF errors, compute
  // the exact invariant error, compare with the linear map; residual O(s²).
  oracle::Rand rng(146);
  const FilterBelief b = make_belief(rng);
  const Eigen::VectorXd dir = rng.vec(9).normalized();

  std::vector<double> scales, errors;
  for (double s : {0.2, 0.1, 0.05, 0.025, 0.0125}) {
    const Eigen::VectorXd dq = s * dir;
    // exp(δθ) = Rᵀ R̂  =>  R = R̂ exp(-δθ); δv = v - v̂ means v = v̂ + δv.
    const Mat3 r_true = b.rotation() * exp_so3(-dq.head<3>());
    const SEK3 x_true(r_true, {b.velocity() + dq.segment<3>(3),
                               b.position() + dq.segment<3>(6)});
    const SEK3 x_hat(b.rotation(), {b.velocity(), b.position()});
    const Eigen::VectorXd xi_exact = log_sek3(x_hat * x_true.inverse());
    const Eigen::VectorXd xi_linear = qekf_error_to_invariant(dq, b);
    scales.push_back(s);
    errors.push_back((xi_exact - xi_linear).norm());
  }
  EXPECT_GT(oracle::loglog_slope(scales, errors), 1.9);
}

TEST(Conversion, WorldRoboIdentity) {
  FilterBelief b = new_belief(Mat3::Identity(), Vec3::Zero(), Vec3::Zero(), BiasVector{},
                              Eigen::MatrixXd::Identity(15, 15),
                              ErrorFrame::kRightInvariant, Convention::kWorldCentric);
  const FilterBelief robo = world_to_robocentric(b);
  EXPECT_EQ(robo.convention, Convention::kRoboCentric);
  EXPECT_EQ(robo.frame, ErrorFrame::kLeftInvariant);
  EXPECT_LT((robo.X.dense() - b.X.dense()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Conversion, DoubleConversionIsInvolution) {
  oracle::Rand rng(147);
  const FilterBelief b = make_belief(rng, 2);
  const FilterBelief back = robocentric_to_world(world_to_robocentric(b));
  EXPECT_LT((back.X.dense() - b.X.dense()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((back.P - b.P).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(back.frame, b.frame);
}

TEST(Conversion, RoboCentricVelocitySign) {
  oracle::Rand rng(148);
  const FilterBelief b = make_belief(rng);
  const FilterBelief robo = world_to_robocentric(b);
  EXPECT_LT((robo.velocity() + robo.rotation() * b.velocity()).norm(), 1e-12);
  EXPECT_LT((robo.velocity() + b.rotation().transpose() * b.velocity()).norm(), 1e-12);
}

TEST(Conversion, CovarianceConsistentWithSampling) {
  // The ξ ↦ -ξ map: a right-invariant world sample exp(ξ)X̂ inverts to
  // X̂⁻¹ exp(-ξ), a left-invariant robo-centric sample with negated tangent.
  oracle::Rand rng(149);
  FilterBelief b = make_belief(rng);
  b.P = rng.psd(15, 1e-2);
  const FilterBelief robo = world_to_robocentric(b);
  EXPECT_LT((robo.P.topLeftCorner<9, 9>() - b.P.topLeftCorner<9, 9>()).cwiseAbs().maxCoeff(),
            1e-14);
  EXPECT_LT((robo.P.topRightCorner<9, 6>() + b.P.topRightCorner<9, 6>()).cwiseAbs().maxCoeff(),
            1e-14);
}

TEST(TimeToConverge, DetectsHoldWindow) {
  ConvergenceThresholds th;
  std::vector<ErrorSample> errors;
  for (int i = 0; i <= 100; ++i) {
    ErrorSample e;
    e.t = 0.01 * i;
    e.roll_pitch = i < 40 ? 0.1 : 0.001;
    e.body_velocity = i < 40 ? 0.6 : 0.01;
    errors.push_back(e);
  }
  EXPECT_NEAR(time_to_converge(errors, th), 0.40, 1e-9);

  // An excursion inside the first hold window delays convergence.
  errors[45].roll_pitch = 0.5;
  EXPECT_NEAR(time_to_converge(errors, th), 0.46, 1e-9);

  // Never below thresholds long enough: no convergence.
  std::vector<ErrorSample> flappy = errors;
  for (size_t i = 0; i < flappy.size(); i += 10) flappy[i].body_velocity = 0.6;
  EXPECT_LT(time_to_converge(flappy, th), 0.0);
}
