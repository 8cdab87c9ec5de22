#include "rcwbc/spatial.hpp"

#include <algorithm>
#include <cmath>

namespace rcwbc {

Matrix3 skew(const Vector3& v) {
  Matrix3 s;
  s << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return s;
}

Transform Transform::operator*(const Transform& rhs) const {
  return {rotation * rhs.rotation, rotation * rhs.translation + translation};
}

Transform Transform::inverse() const {
  return {rotation.transpose(), -(rotation.transpose() * translation)};
}

Matrix3 rotation_from_rpy(const Vector3& rpy) {
  return (Eigen::AngleAxisd(rpy.z(), Vector3::UnitZ()) *
          Eigen::AngleAxisd(rpy.y(), Vector3::UnitY()) *
          Eigen::AngleAxisd(rpy.x(), Vector3::UnitX()))
      .toRotationMatrix();
}

Vector3 rpy_from_rotation(const Matrix3& r) {
  const double pitch = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
  const double roll = std::atan2(r(2, 1), r(2, 2));
  const double yaw = std::atan2(r(1, 0), r(0, 0));
  return {roll, pitch, yaw};
}

Matrix3 exp_so3(const Vector3& w) {
  const double angle = w.norm();
  if (angle < 1e-12) return Matrix3::Identity() + skew(w);
  return Eigen::AngleAxisd(angle, w / angle).toRotationMatrix();
}

Vector3 log_so3(const Matrix3& r) {
  const Eigen::AngleAxisd aa(r);
  return aa.angle() * aa.axis();
}

Vector6 motion_to_child(const Transform& x, const Vector6& m) {
  const Matrix3 rt = x.rotation.transpose();
  const Vector3 w = m.head<3>();
  const Vector3 v = m.tail<3>();
  Vector6 out;
  out << rt * w, rt * (v - x.translation.cross(w));
  return out;
}

Vector6 motion_to_parent(const Transform& x, const Vector6& m) {
  const Vector3 w = x.rotation * m.head<3>();
  const Vector3 v = x.rotation * m.tail<3>() + x.translation.cross(w);
  Vector6 out;
  out << w, v;
  return out;
}

Vector6 force_to_parent(const Transform& x, const Vector6& f) {
  const Vector3 force = x.rotation * f.tail<3>();
  const Vector3 moment = x.rotation * f.head<3>() + x.translation.cross(force);
  Vector6 out;
  out << moment, force;
  return out;
}

Matrix6 motion_transform_to_child(const Transform& x) {
  const Matrix3 rt = x.rotation.transpose();
  Matrix6 out = Matrix6::Zero();
  out.topLeftCorner<3, 3>() = rt;
  out.bottomRightCorner<3, 3>() = rt;
  out.bottomLeftCorner<3, 3>() = -rt * skew(x.translation);
  return out;
}

Vector6 cross_motion(const Vector6& v, const Vector6& m) {
  const Vector3 w = v.head<3>();
  Vector6 out;
  out << w.cross(m.head<3>()), w.cross(m.tail<3>()) + v.tail<3>().cross(m.head<3>());
  return out;
}

Vector6 cross_force(const Vector6& v, const Vector6& f) {
  const Vector3 w = v.head<3>();
  Vector6 out;
  out << w.cross(f.head<3>()) + v.tail<3>().cross(f.tail<3>()), w.cross(f.tail<3>());
  return out;
}

Matrix6 spatial_inertia(double mass, const Vector3& com, const Matrix3& inertia_com) {
  const Matrix3 c = skew(com);
  Matrix6 out;
  out.topLeftCorner<3, 3>() = inertia_com + mass * c * c.transpose();
  out.topRightCorner<3, 3>() = mass * c;
  out.bottomLeftCorner<3, 3>() = mass * c.transpose();
  out.bottomRightCorner<3, 3>() = mass * Matrix3::Identity();
  return out;
}

}  // namespace rcwbc
