#pragma once

#include <Eigen/Dense>

namespace rcwbc {

using Vector3 = Eigen::Vector3d;
using Matrix3 = Eigen::Matrix3d;
using Vector6 = Eigen::Matrix<double, 6, 1>;
using Matrix6 = Eigen::Matrix<double, 6, 6>;
using VectorX = Eigen::VectorXd;
using MatrixX = Eigen::MatrixXd;

Matrix3 skew(const Vector3& v);

/// Rigid transform giving the pose of a child frame in its parent frame:
/// p_parent = rotation * p_child + translation.
struct Transform {
  Matrix3 rotation = Matrix3::Identity();
  Vector3 translation = Vector3::Zero();

  static Transform Identity() { return {}; }
  Transform operator*(const Transform& rhs) const;
  Vector3 apply(const Vector3& p) const { return rotation * p + translation; }
  Transform inverse() const;
};

/// Fixed-axis roll-pitch-yaw: R = Rz(yaw) * Ry(pitch) * Rx(roll).
Matrix3 rotation_from_rpy(const Vector3& rpy);
Vector3 rpy_from_rotation(const Matrix3& r);
Matrix3 exp_so3(const Vector3& w);
/// Rotation vector of r; |result| <= pi.
Vector3 log_so3(const Matrix3& r);

// Spatial vectors are stacked angular-above-linear: motion m = [w; v], force f = [n; f].
// `child_in_parent` is the pose of frame C in frame P.

/// Re-expresses a motion vector given in P in the coordinates of C.
Vector6 motion_to_child(const Transform& child_in_parent, const Vector6& m);
Vector6 motion_to_parent(const Transform& child_in_parent, const Vector6& m);
/// Re-expresses a force given in C in the coordinates of P (transpose of motion_to_child).
Vector6 force_to_parent(const Transform& child_in_parent, const Vector6& f);
/// 6x6 matrix of motion_to_child.
Matrix6 motion_transform_to_child(const Transform& child_in_parent);

Vector6 cross_motion(const Vector6& v, const Vector6& m);
Vector6 cross_force(const Vector6& v, const Vector6& f);

/// Spatial inertia about the frame origin for a body with the given mass,
/// centre of mass and rotational inertia about the centre of mass.
Matrix6 spatial_inertia(double mass, const Vector3& com, const Matrix3& inertia_com);

}  // namespace rcwbc
