#pragma once

#include <Eigen/Core>

#include "inekf/dynamics.hpp"
#include "inekf/kinematics.hpp"
#include "inekf/state.hpp"

namespace inekf {

/// Marginalizes a tracked point: its SE_K(3) column is dropped and P is
/// reduced by the selection map M (P ← M P Mᵀ), which is the same in both
/// error frames. Remaining columns compact left, the registry re-indexes.
/// Throws std::invalid_argument for an unknown id.
FilterBelief remove_contact(const FilterBelief& belief, int contact_id);

/// Augments the state with a new contact. The mean comes from forward
/// kinematics (d̂ = p̂ + R̂ h_p world-centric, d̂ = p̂ - h_p robo-centric); the
/// covariance map P ← F P Fᵀ + G Cov(w_α) Gᵀ picks F and G by the belief's
/// error frame. Throws on a duplicate id.
FilterBelief add_contact(const FilterBelief& belief, int contact_id,
                         const Eigen::VectorXd& alpha, const KinematicsModel& kin,
                         const NoiseParams& noise);

/// Augments the state with a static landmark from a body-frame relative
/// position measurement; same machinery as add_contact but with the sensor
/// covariance in place of J_p Cov(w_α) J_pᵀ and no process noise afterwards.
FilterBelief add_landmark(const FilterBelief& belief, int landmark_id,
                          const Vec3& relative_position, const Mat3& meas_cov);

/// Edge-triggered contact lifecycle from a binary flag stream, debounced by
/// requiring two consecutive identical flags per id.
class ContactTracker {
 public:
  /// Feeds one flag observation; returns +1 when a debounced rising edge
  /// fires, -1 on a falling edge, 0 otherwise.
  int observe(int id, bool flag);

 private:
  struct Entry {
    int id;
    bool last_flag;
    bool debounced;
    bool seeded;  // true once two samples agree
  };
  std::vector<Entry> entries_;
};

}  // namespace inekf
