#include "inekf/contacts.hpp"

#include <stdexcept>

namespace inekf {

namespace {

// Appends one tracked point with body-frame relative position h and
// body-frame augmentation covariance. Old covariance blocks are copied
// verbatim so that add-then-remove restores them bitwise.
FilterBelief augment_point(const FilterBelief& belief, TrackedPoint point,
                           const Vec3& h, const Mat3& cov_body) {
  if (belief.has_point(point.id)) {
    throw std::invalid_argument("augment_point: duplicate point id");
  }
  const bool world = belief.convention == Convention::kWorldCentric;
  const int dim = belief.dim_p();
  const int ib = belief.idx_bias();  // insertion row for the new point

  FilterBelief out = belief;
  out.X.append_col(world ? Vec3(belief.position() + belief.rotation() * h)
                         : Vec3(belief.position() - h));
  out.register_point(point);

  // ξ_d row of the augmentation map F; the duplication form pairs with
  // (world, right) and (robo, left), the skew form with the other two.
  const bool duplication =
      (world && belief.frame == ErrorFrame::kRightInvariant) ||
      (!world && belief.frame == ErrorFrame::kLeftInvariant);
  Eigen::MatrixXd row = Eigen::MatrixXd::Zero(3, dim);
  row.block<3, 3>(0, FilterBelief::idx_pos()) = Mat3::Identity();
  if (!duplication) {
    row.block<3, 3>(0, FilterBelief::idx_rot()) = -skew(h);
  }

  Mat3 g;  // noise map into the new row
  if (world) {
    g = belief.frame == ErrorFrame::kRightInvariant ? Mat3(belief.rotation())
                                                    : Mat3::Identity();
  } else {
    g = belief.frame == ErrorFrame::kRightInvariant
            ? Mat3(-Mat3::Identity())
            : Mat3(-belief.rotation().transpose());
  }

  Eigen::MatrixXd p_new = Eigen::MatrixXd::Zero(dim + 3, dim + 3);
  p_new.topLeftCorner(ib, ib) = belief.P.topLeftCorner(ib, ib);
  p_new.block(0, ib + 3, ib, 6) = belief.P.block(0, ib, ib, 6);
  p_new.block(ib + 3, 0, 6, ib) = belief.P.block(ib, 0, 6, ib);
  p_new.block(ib + 3, ib + 3, 6, 6) = belief.P.block(ib, ib, 6, 6);

  const Eigen::MatrixXd row_p = row * belief.P;  // 3 x dim, old ordering
  p_new.block(ib, 0, 3, ib) = row_p.leftCols(ib);
  p_new.block(ib, ib + 3, 3, 6) = row_p.rightCols(6);
  p_new.block(0, ib, ib, 3) = row_p.leftCols(ib).transpose();
  p_new.block(ib + 3, ib, 6, 3) = row_p.rightCols(6).transpose();
  p_new.block<3, 3>(ib, ib) = row_p * row.transpose() + g * cov_body * g.transpose();

  // p_new is symmetric by construction; old blocks are verbatim copies so
  // that a later remove restores them bitwise.
  out.P = std::move(p_new);
  return out;
}

}  // namespace

FilterBelief remove_contact(const FilterBelief& belief, int contact_id) {
  const int slot = belief.point_slot(contact_id);
  if (slot < 0) {
    throw std::invalid_argument("remove_contact: unknown point id");
  }
  const int dim = belief.dim_p();
  const int cut = belief.idx_point(slot);
  const int tail = dim - cut - 3;

  FilterBelief out = belief;
  out.X.erase_col(2 + slot);
  out.unregister_slot(slot);

  Eigen::MatrixXd p_new(dim - 3, dim - 3);
  p_new.topLeftCorner(cut, cut) = belief.P.topLeftCorner(cut, cut);
  p_new.topRightCorner(cut, tail) = belief.P.block(0, cut + 3, cut, tail);
  p_new.bottomLeftCorner(tail, cut) = belief.P.block(cut + 3, 0, tail, cut);
  p_new.bottomRightCorner(tail, tail) = belief.P.block(cut + 3, cut + 3, tail, tail);
  out.P = std::move(p_new);
  return out;
}

FilterBelief add_contact(const FilterBelief& belief, int contact_id,
                         const Eigen::VectorXd& alpha, const KinematicsModel& kin,
                         const NoiseParams& noise) {
  if (alpha.size() != kin.joint_count()) {
    throw std::invalid_argument("add_contact: encoder dimension mismatch");
  }
  const Eigen::MatrixXd j = kin.jacobian(alpha);
  const Mat3 cov_body = j * (noise.encoder_std * noise.encoder_std *
                             Eigen::MatrixXd::Identity(alpha.size(), alpha.size())) *
                        j.transpose();
  return augment_point(belief, {contact_id, PointKind::kContact}, kin.position(alpha),
                       cov_body);
}

FilterBelief add_landmark(const FilterBelief& belief, int landmark_id,
                          const Vec3& relative_position, const Mat3& meas_cov) {
  return augment_point(belief, {landmark_id, PointKind::kLandmark}, relative_position,
                       meas_cov);
}

int ContactTracker::observe(int id, bool flag) {
  for (auto& e : entries_) {
    if (e.id != id) continue;
    int edge = 0;
    if (flag == e.last_flag) {
      if (!e.seeded) {
        e.seeded = true;
        e.debounced = flag;
        if (flag) edge = 1;
      } else if (flag != e.debounced) {
        e.debounced = flag;
        edge = flag ? 1 : -1;
      }
    }
    e.last_flag = flag;
    return edge;
  }
  entries_.push_back({id, flag, false, false});
  return 0;
}

}  // namespace inekf
