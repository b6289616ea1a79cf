#include "inekf/state.hpp"

#include <Eigen/Dense>
#include <sstream>
#include <stdexcept>

namespace inekf {

namespace {
constexpr double kPsdTolerance = -1e-9;
constexpr int kProjectionPeriod = 256;

Eigen::MatrixXd frame_switch_jacobian(const FilterBelief& belief) {
  const int dim = belief.dim_p();
  Eigen::MatrixXd j = Eigen::MatrixXd::Identity(dim, dim);
  const int base = dim - 6;
  if (belief.frame == ErrorFrame::kLeftInvariant) {
    j.topLeftCorner(base, base) = belief.X.adjoint();          // ξʳ = Ad_X̂ ξˡ
  } else {
    j.topLeftCorner(base, base) = belief.X.inverse().adjoint();
  }
  return j;
}
}  // namespace

FilterBelief::FilterBelief() : X(SEK3::identity(2)), P(Eigen::MatrixXd::Identity(15, 15)) {}

int FilterBelief::point_slot(int id) const {
  for (size_t i = 0; i < points_.size(); ++i) {
    if (points_[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

void FilterBelief::tick_propagation() {
  if (++steps_since_projection_ >= kProjectionPeriod) {
    X.orthonormalize();
    steps_since_projection_ = 0;
  }
}

std::string FilterBelief::validate() const {
  std::ostringstream oss;
  if (X.k() != 2 + num_points()) {
    oss << "X has " << X.k() << " columns, expected " << 2 + num_points();
    return oss.str();
  }
  if (P.rows() != dim_p() || P.cols() != dim_p()) {
    oss << "P is " << P.rows() << "x" << P.cols() << ", expected " << dim_p();
    return oss.str();
  }
  const double asym = (P - P.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-9) {
    oss << "P asymmetry " << asym;
    return oss.str();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P);
  if (es.eigenvalues().minCoeff() < kPsdTolerance) {
    oss << "P min eigenvalue " << es.eigenvalues().minCoeff();
    return oss.str();
  }
  if (!P.allFinite() || !bias.stacked().allFinite()) {
    return "non-finite entries";
  }
  const double ortho = (X.rotation().transpose() * X.rotation() - Mat3::Identity())
                           .cwiseAbs()
                           .maxCoeff();
  if (ortho > 1e-6) {
    oss << "rotation orthogonality drift " << ortho;
    return oss.str();
  }
  return {};
}

FilterBelief new_belief(const Mat3& R0, const Vec3& v0, const Vec3& p0,
                        const BiasVector& theta0, const Eigen::MatrixXd& P0,
                        ErrorFrame frame, Convention convention) {
  if (P0.rows() != 15 || P0.cols() != 15) {
    throw std::invalid_argument("new_belief: P0 must be 15x15 for K=0");
  }
  if ((P0 - P0.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
    throw std::invalid_argument("new_belief: P0 not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P0);
  if (es.eigenvalues().minCoeff() < kPsdTolerance) {
    throw std::invalid_argument("new_belief: P0 not positive semidefinite");
  }
  FilterBelief belief;
  belief.X = SEK3(R0, {v0, p0});
  belief.bias = theta0;
  belief.P = P0;
  belief.frame = frame;
  belief.convention = convention;
  return belief;
}

std::pair<Eigen::VectorXd, Vec6> invariant_error(const FilterBelief& belief,
                                                 const SEK3& x_true,
                                                 const BiasVector& theta_true) {
  if (x_true.k() != belief.X.k()) {
    throw std::invalid_argument("invariant_error: mismatched K");
  }
  const SEK3 eta = belief.frame == ErrorFrame::kRightInvariant
                       ? belief.X * x_true.inverse()
                       : x_true.inverse() * belief.X;
  return {log_sek3(eta), belief.bias.stacked() - theta_true.stacked()};
}

FilterBelief switch_error_frame(const FilterBelief& belief) {
  const Eigen::MatrixXd j = frame_switch_jacobian(belief);
  FilterBelief out = belief;
  out.P = j * belief.P * j.transpose();
  out.frame = belief.frame == ErrorFrame::kRightInvariant ? ErrorFrame::kLeftInvariant
                                                          : ErrorFrame::kRightInvariant;
  out.symmetrize();
  return out;
}

}  // namespace inekf
