#pragma once

#include <Eigen/Core>
#include <vector>

namespace inekf {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;

/// Skew-symmetric matrix of a 3-vector, skew(a)*b == a.cross(b).
Mat3 skew(const Vec3& phi);

/// Inverse of skew() for antisymmetric matrices (uses the strict lower triangle).
Vec3 unskew(const Mat3& m);

/// Gamma series Γ_m(φ) = Σ_n skew(φ)^n / (n+m)!, for m in {0,1,2,3}.
///
/// Γ₀ is the SO(3) exponential, Γ₁ the left Jacobian; Γ₂ and Γ₃ show up in the
/// double and triple integrals of the zero-order-hold discretization. Closed
/// forms are used above a small-angle threshold, a truncated series below it.
Mat3 gamma(int m, const Vec3& phi);

/// SO(3) exponential map (equals gamma(0, phi)).
Mat3 exp_so3(const Vec3& phi);

/// SO(3) logarithm. Throws std::domain_error for rotation angle >= pi - 1e-6.
Vec3 log_so3(const Mat3& rotation);

/// Nearest rotation matrix by symmetric orthogonalization (polar factor).
Mat3 project_rotation(const Mat3& m);

/// Element of SE_K(3): one rotation shared by K translation-like columns.
///
/// Stored as the rotation plus the column list; the dense (3+K)x(3+K) matrix
/// embedding is only materialized on demand (test oracles, debugging).
class SEK3 {
 public:
  SEK3() : rotation_(Mat3::Identity()) {}
  SEK3(Mat3 rotation, std::vector<Vec3> columns);

  static SEK3 identity(int k);

  int k() const { return static_cast<int>(columns_.size()); }
  const Mat3& rotation() const { return rotation_; }
  const Vec3& col(int i) const { return columns_.at(static_cast<size_t>(i)); }
  const std::vector<Vec3>& cols() const { return columns_; }

  void set_rotation(const Mat3& rotation) { rotation_ = rotation; }
  void set_col(int i, const Vec3& value) { columns_.at(static_cast<size_t>(i)) = value; }
  void append_col(const Vec3& value) { columns_.push_back(value); }
  void erase_col(int i) { columns_.erase(columns_.begin() + i); }

  /// Group action (matrix product semantics). Throws on K mismatch.
  SEK3 compose(const SEK3& other) const;
  SEK3 inverse() const;

  /// Matrix representation of the adjoint map, (3+3K)x(3+3K), block
  /// lower-triangular with R on the diagonal and skew(col_i)*R below.
  Eigen::MatrixXd adjoint() const;

  /// Dense (3+K)x(3+K) matrix embedding.
  Eigen::MatrixXd dense() const;

  /// Re-projects the rotation block onto SO(3).
  void orthonormalize() { rotation_ = project_rotation(rotation_); }

 private:
  Mat3 rotation_;
  std::vector<Vec3> columns_;
};

inline SEK3 operator*(const SEK3& a, const SEK3& b) { return a.compose(b); }

/// Exponential map of SE_K(3); xi is ordered (φ, ξ₁, ..., ξ_K).
SEK3 exp_sek3(const Eigen::VectorXd& xi);

/// Logarithm of SE_K(3); inverse of exp_sek3 for rotation angle < pi - 1e-6.
Eigen::VectorXd log_sek3(const SEK3& x);

/// Lie-algebra element as a dense (3+K)x(3+K) matrix (hat operator).
Eigen::MatrixXd hat_sek3(const Eigen::VectorXd& xi);

}  // namespace inekf
