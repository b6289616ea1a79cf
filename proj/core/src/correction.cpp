#include "inekf/correction.hpp"

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

namespace inekf {

namespace {

Eigen::MatrixXd zero_h(const FilterBelief& belief) {
  return Eigen::MatrixXd::Zero(3, belief.dim_p());
}

int require_slot(const FilterBelief& belief, int id, const char* what) {
  const int slot = belief.point_slot(id);
  if (slot < 0) {
    throw std::invalid_argument(std::string(what) + ": unknown point id");
  }
  return slot;
}

CorrectionResult batched_update(const FilterBelief& belief,
                                std::span<const InvariantObservation> observations,
                                ErrorFrame side, const CorrectionOptions& options) {
  for (const auto& obs : observations) {
    if (obs.form != side) {
      throw std::invalid_argument("update: observation form does not match update side");
    }
    if (obs.H.rows() != 3 || obs.H.cols() != belief.dim_p()) {
      throw std::invalid_argument("update: H has wrong shape for this belief");
    }
  }
  if (observations.empty()) {
    return {belief, true};
  }

  const bool switched = belief.frame != side;
  FilterBelief work = switched ? switch_error_frame(belief) : belief;
  const int dim = work.dim_p();

  std::vector<const InvariantObservation*> used;
  used.reserve(observations.size());
  for (const auto& obs : observations) {
    if (options.innovation_gate) {
      const Mat3 s_block = obs.H * work.P * obs.H.transpose() + obs.noise;
      const double maha = obs.innovation.dot(s_block.ldlt().solve(obs.innovation));
      if (maha > options.gate_threshold) continue;
    }
    used.push_back(&obs);
  }
  if (used.empty()) {
    return {belief, true};
  }

  const int rows = 3 * static_cast<int>(used.size());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(rows, dim);
  Eigen::VectorXd z(rows);
  Eigen::MatrixXd n = Eigen::MatrixXd::Zero(rows, rows);
  for (size_t i = 0; i < used.size(); ++i) {
    h.middleRows<3>(3 * static_cast<int>(i)) = used[i]->H;
    z.segment<3>(3 * static_cast<int>(i)) = used[i]->innovation;
    n.block<3, 3>(3 * static_cast<int>(i), 3 * static_cast<int>(i)) = used[i]->noise;
  }

  const Eigen::MatrixXd pht = work.P * h.transpose();
  Eigen::MatrixXd s = h * pht + n;
  s = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
  const double eig_min = es.eigenvalues().minCoeff();
  const double eig_max = es.eigenvalues().maxCoeff();
  if (eig_min <= 0.0 || eig_max / eig_min > options.max_condition_number) {
    return {belief, false};
  }

  const Eigen::MatrixXd k = s.ldlt().solve(pht.transpose()).transpose();
  const Eigen::VectorXd delta = k * z;
  const SEK3 dx = exp_sek3(delta.head(dim - 6));
  work.X = side == ErrorFrame::kRightInvariant ? dx * work.X : work.X * dx;
  work.bias = BiasVector::from_stacked(work.bias.stacked() + delta.tail<6>());

  const Eigen::MatrixXd ikh = Eigen::MatrixXd::Identity(dim, dim) - k * h;
  work.P = ikh * work.P * ikh.transpose() + k * n * k.transpose();
  work.symmetrize();

  FilterBelief out = switched ? switch_error_frame(work) : work;
  return {out, true};
}

}  // namespace

InvariantObservation fk_position_observation(const FilterBelief& belief,
                                             const Eigen::VectorXd& alpha,
                                             int contact_id, const KinematicsModel& kin,
                                             const NoiseParams& noise) {
  const int slot = require_slot(belief, contact_id, "fk_position_observation");
  if (alpha.size() != kin.joint_count()) {
    throw std::invalid_argument("fk_position_observation: encoder dimension mismatch");
  }
  const Vec3 h_p = kin.position(alpha);
  const Eigen::MatrixXd j = kin.jacobian(alpha);
  const Mat3 joint_cov = j * (noise.encoder_std * noise.encoder_std *
                              Eigen::MatrixXd::Identity(alpha.size(), alpha.size())) *
                         j.transpose();
  const Mat3& R = belief.rotation();

  InvariantObservation obs;
  obs.H = zero_h(belief);
  if (belief.convention == Convention::kWorldCentric) {
    obs.form = ErrorFrame::kRightInvariant;
    obs.H.block<3, 3>(0, FilterBelief::idx_pos()) = -Mat3::Identity();
    obs.H.block<3, 3>(0, belief.idx_point(slot)) = Mat3::Identity();
    obs.innovation = R * h_p + belief.position() - belief.point(slot);
    obs.noise = R * joint_cov * R.transpose();
  } else {
    obs.form = ErrorFrame::kLeftInvariant;
    obs.H.block<3, 3>(0, FilterBelief::idx_pos()) = Mat3::Identity();
    obs.H.block<3, 3>(0, belief.idx_point(slot)) = -Mat3::Identity();
    obs.innovation = R.transpose() * (h_p - (belief.position() - belief.point(slot)));
    obs.noise = R.transpose() * joint_cov * R;
  }
  return obs;
}

InvariantObservation build_observation(ObservationKind kind,
                                       const ObservationPayload& payload,
                                       const FilterBelief& belief) {
  const bool world = belief.convention == Convention::kWorldCentric;
  const Mat3& R = belief.rotation();
  const Vec3& p = belief.position();

  InvariantObservation obs;
  obs.H = zero_h(belief);
  obs.form = ErrorFrame::kRightInvariant;
  switch (kind) {
    case ObservationKind::kLandmarkRelative: {
      const int slot = require_slot(belief, payload.id, "build_observation");
      const Vec3& l = belief.point(slot);
      if (world) {
        obs.H.block<3, 3>(0, FilterBelief::idx_pos()) = -Mat3::Identity();
        obs.H.block<3, 3>(0, belief.idx_point(slot)) = Mat3::Identity();
        obs.innovation = R * payload.value + p - l;
        obs.noise = R * payload.cov * R.transpose();
      } else {
        obs.form = ErrorFrame::kLeftInvariant;
        obs.H.block<3, 3>(0, FilterBelief::idx_pos()) = Mat3::Identity();
        obs.H.block<3, 3>(0, belief.idx_point(slot)) = -Mat3::Identity();
        obs.innovation = R.transpose() * (payload.value - (p - l));
        obs.noise = R.transpose() * payload.cov * R;
      }
      break;
    }
    case ObservationKind::kLandmarkAbsolute: {
      const Vec3& l = payload.reference;
      if (world) {
        obs.H.block<3, 3>(0, FilterBelief::idx_rot()) = skew(l);
        obs.H.block<3, 3>(0, FilterBelief::idx_pos()) = -Mat3::Identity();
        obs.innovation = R * payload.value + p - l;
        obs.noise = R * payload.cov * R.transpose();
      } else {
        obs.form = ErrorFrame::kLeftInvariant;
        obs.H.block<3, 3>(0, FilterBelief::idx_rot()) = -skew(l);
        obs.H.block<3, 3>(0, FilterBelief::idx_pos()) = Mat3::Identity();
        obs.innovation = R.transpose() * (payload.value - p) - l;
        obs.noise = R.transpose() * payload.cov * R;
      }
      break;
    }
    case ObservationKind::kMagnetometer: {
      const Vec3& m = payload.reference;
      if (world) {
        obs.H.block<3, 3>(0, FilterBelief::idx_rot()) = skew(m);
        obs.innovation = R * payload.value - m;
        obs.noise = R * payload.cov * R.transpose();
      } else {
        obs.form = ErrorFrame::kLeftInvariant;
        obs.H.block<3, 3>(0, FilterBelief::idx_rot()) = -skew(m);
        obs.innovation = R.transpose() * payload.value - m;
        obs.noise = R.transpose() * payload.cov * R;
      }
      break;
    }
    case ObservationKind::kGps: {
      if (world) {
        obs.form = ErrorFrame::kLeftInvariant;
        obs.H.block<3, 3>(0, FilterBelief::idx_pos()) = Mat3::Identity();
        obs.innovation = R.transpose() * (payload.value - p);
        obs.noise = R.transpose() * payload.cov * R;
      } else {
        obs.H.block<3, 3>(0, FilterBelief::idx_pos()) = -Mat3::Identity();
        obs.innovation = R * payload.value + p;
        obs.noise = R * payload.cov * R.transpose();
      }
      break;
    }
  }
  return obs;
}

CorrectionResult update_right(const FilterBelief& belief,
                              std::span<const InvariantObservation> observations,
                              const CorrectionOptions& options) {
  return batched_update(belief, observations, ErrorFrame::kRightInvariant, options);
}

CorrectionResult update_right(const FilterBelief& belief,
                              const InvariantObservation& observation,
                              const CorrectionOptions& options) {
  return batched_update(belief, {&observation, 1}, ErrorFrame::kRightInvariant, options);
}

CorrectionResult update_left(const FilterBelief& belief,
                             std::span<const InvariantObservation> observations,
                             const CorrectionOptions& options) {
  return batched_update(belief, observations, ErrorFrame::kLeftInvariant, options);
}

CorrectionResult update_left(const FilterBelief& belief,
                             const InvariantObservation& observation,
                             const CorrectionOptions& options) {
  return batched_update(belief, {&observation, 1}, ErrorFrame::kLeftInvariant, options);
}

CorrectionResult apply_observations(const FilterBelief& belief,
                                    std::span<const InvariantObservation> observations,
                                    const CorrectionOptions& options) {
  if (observations.empty()) return {belief, true};
  return batched_update(belief, observations, observations.front().form, options);
}

}  // namespace inekf
